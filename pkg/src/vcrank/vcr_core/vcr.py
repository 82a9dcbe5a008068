"""Bootstrap concept ranking by directional derivatives along ridge CAVs."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, replace

import numpy as np

from vcrank.concept_oracle import ConceptVocabulary, descriptor_matrix, normalize_rows
from vcrank.rng import PCG32
from vcrank.synthgen.datasets import POSITIVE
from vcrank.timing import NULL_TIMER
from vcrank.toy_lmm import ToyModel, activations_and_gradients, downsample_batch
from vcrank.vcr_core.cav import ConceptVector, factorized_directions
from vcrank.vcr_core.stats import P_FLOOR, bonferroni_threshold, t_statistics

RECORD_COLUMNS = ("concept", "psi_mean", "psi_std", "t", "p", "significant", "direction")


@dataclass(frozen=True)
class VcrConfig:
    lam: float = 1.0
    bootstrap_B: int = 30
    alpha: float = 0.05
    center_features: bool = True
    seed: int = 0
    refit_per_replicate: bool = True
    variance_weighting: bool = False

    def __post_init__(self):
        if self.bootstrap_B < 2:
            raise ValueError(f"bootstrap_B must be >= 2, got {self.bootstrap_B}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.lam >= 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class SensitivityRecord:
    concept_name: str
    psi_samples: np.ndarray
    psi_mean: float
    t_stat: float
    p_value: float
    significant: bool
    direction: int

    @property
    def psi_std(self) -> float:
        return float(np.std(self.psi_samples, ddof=1))


def sensitivity(gradients, cav: ConceptVector | np.ndarray) -> float:
    """Mean directional derivative of the task score along a unit concept vector."""
    g = np.atleast_2d(np.asarray(gradients, dtype=np.float64))
    v = np.asarray(getattr(cav, "unit_vector", cav), dtype=np.float64)
    if v.ndim != 1 or g.shape[1] != v.shape[0]:
        raise ValueError(f"gradient width {g.shape[1]} does not match concept vector length {v.shape}")
    return float((g @ v).mean())


def _project(gbars: np.ndarray, g_facs: np.ndarray, phi: np.ndarray, block: int = 2048) -> np.ndarray:
    """psi[k, b] = gbar_b . w_kb / |w_kb| with w_kb = g_facs[b] @ phi_k.

    ``gbars`` is (B, D), ``g_facs`` is (B, D, R) and ``phi`` is (K, R). All
    replicates are handled in one matrix product per block of concepts.
    """
    n_b, _, r = g_facs.shape
    w = np.einsum("bdr,bd->rb", g_facs, gbars)  # (R, B)
    grams = np.einsum("bdr,bds->rbs", g_facs, g_facs).reshape(r, n_b * r)
    out = np.zeros((phi.shape[0], n_b))
    for lo in range(0, phi.shape[0], block):
        ph = phi[lo : lo + block]
        num = ph @ w
        den2 = np.einsum("kbs,ks->kb", (ph @ grams).reshape(len(ph), n_b, r), ph)
        den = np.sqrt(np.maximum(den2, 0.0))
        ok = den > 0
        out[lo : lo + block][ok] = num[ok] / den[ok]
    return out


def _label_variance(u: np.ndarray, phi: np.ndarray) -> np.ndarray:
    uc = u - u.mean(axis=0)
    cov = uc.T @ uc / u.shape[0]
    return np.einsum("kr,kr->k", phi @ cov, phi)


def _records(names, samples: np.ndarray, alpha: float) -> list[SensitivityRecord]:
    t, p = t_statistics(samples)
    p = np.maximum(p, P_FLOOR)
    means = samples.mean(axis=1)
    thr = bonferroni_threshold(alpha, len(names))
    rows = np.array(samples, dtype=np.float64)  # private copy, rows handed out as views
    # same order as sort_records, computed without building key tuples
    order = np.lexsort((np.asarray(names, dtype=str), -np.abs(means))).tolist()
    names = [names[i] for i in order]
    m, t, p = means[order].tolist(), t[order].tolist(), p[order].tolist()
    return [
        SensitivityRecord(name, rows[i], mk, tk, pk, pk < thr, (mk > 0) - (mk < 0))
        for name, i, mk, tk, pk in zip(names, order, m, t, p)
    ]


def sort_records(records) -> list[SensitivityRecord]:
    """By |psi_mean| descending, ties broken by concept name."""
    return sorted(records, key=lambda r: (-abs(r.psi_mean), r.concept_name))


def bonferroni_rank(records, alpha: float, k: int) -> list[SensitivityRecord]:
    thr = bonferroni_threshold(alpha, k)
    return sort_records(replace(r, significant=bool(r.p_value < thr)) for r in records)


def replicate_indices(seed: int, replicate: int, n: int) -> np.ndarray:
    """Bootstrap indices for one replicate; independent of scheduling order."""
    return PCG32(seed, stream=replicate).choices(n, n)


def psi_samples(
    model: ToyModel,
    probe,
    vocab: ConceptVocabulary,
    cfg: VcrConfig = VcrConfig(),
    timer=NULL_TIMER,
    target_label: str = POSITIVE,
    descriptors: np.ndarray | None = None,
    inputs: np.ndarray | None = None,
) -> np.ndarray:
    """K x B matrix of per-replicate sensitivities.

    The label matrix of a replicate is never materialised: image descriptors are
    computed once per probe image and the ridge fit is solved against the
    16-column unit descriptors, then projected onto each concept embedding.
    ``descriptors`` and ``inputs`` may carry precomputed per-image rows.
    Inputs are downsampled once; the forward and backward passes are rerun,
    one image at a time, for every resampled probe.
    """
    n = len(probe)
    if n == 0:
        raise ValueError("probe set is empty")
    if len(vocab) == 0:
        raise ValueError("vocabulary is empty")
    with timer.section("concept_embedding"):
        desc = descriptor_matrix(probe) if descriptors is None else np.asarray(descriptors, dtype=np.float64)
        u_all, _ = normalize_rows(desc)
        phi, _ = normalize_rows(np.asarray(vocab.embeddings, dtype=np.float64))

    with timer.section("directional_derivatives"):
        x_all = downsample_batch(probe) if inputs is None else np.asarray(inputs, dtype=np.float64)
    fixed = None
    if not cfg.refit_per_replicate:
        with timer.section("directional_derivatives"):
            acts_all, _ = activations_and_gradients(model, None, target_label, inputs=x_all)
        with timer.section("concept_model_training"):
            fixed = factorized_directions(acts_all, u_all, cfg.lam, cfg.center_features)

    gbars, g_facs = [], []
    weights = np.ones((len(vocab), cfg.bootstrap_B))
    for b in range(cfg.bootstrap_B):
        idx = replicate_indices(cfg.seed, b, n)
        with timer.section("directional_derivatives"):
            acts, grads = activations_and_gradients(model, None, target_label, inputs=x_all[idx])
            gbars.append(grads.mean(axis=0))
        u = u_all[idx]
        with timer.section("concept_model_training"):
            g_facs.append(fixed if fixed is not None else factorized_directions(acts, u, cfg.lam, cfg.center_features))
        if cfg.variance_weighting:
            weights[:, b] = _label_variance(u, phi)
    with timer.section("directional_derivatives"):
        out = _project(np.stack(gbars), np.stack(g_facs), phi)
        if cfg.variance_weighting:
            out *= weights
    return out


def run_vcr(
    model: ToyModel,
    probe,
    vocab: ConceptVocabulary,
    cfg: VcrConfig = VcrConfig(),
    timer=NULL_TIMER,
    target_label: str = POSITIVE,
    descriptors: np.ndarray | None = None,
    inputs: np.ndarray | None = None,
) -> list[SensitivityRecord]:
    """Rank every vocabulary concept by bootstrap sensitivity with a Bonferroni gate."""
    samples = psi_samples(model, probe, vocab, cfg, timer, target_label, descriptors, inputs)
    return _records(vocab.names, samples, cfg.alpha)


# -- export ------------------------------------------------------------------


def _write_comment(fh, comment: str | None) -> None:
    if comment:
        for line in comment.splitlines():
            fh.write(f"# {line}\n")


def write_records_csv(records, path: str | os.PathLike, comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        _write_comment(fh, comment)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in records:
            w.writerow(
                [r.concept_name, repr(r.psi_mean), repr(r.psi_std), repr(r.t_stat), repr(r.p_value), int(r.significant), r.direction]
            )


def records_payload(records, cfg: VcrConfig, extra: dict | None = None) -> dict:
    k = len(records)
    payload = {
        "config": asdict(cfg),
        "K": k,
        "bonferroni_threshold": bonferroni_threshold(cfg.alpha, k) if k else None,
        "records": [
            {
                "concept": r.concept_name,
                "psi_mean": r.psi_mean,
                "psi_std": r.psi_std,
                "t": r.t_stat,
                "p": r.p_value,
                "significant": r.significant,
                "direction": r.direction,
                "psi_samples": [float(x) for x in r.psi_samples],
            }
            for r in records
        ],
    }
    if extra:
        payload.update(extra)
    return payload


def write_records_json(records, path: str | os.PathLike, cfg: VcrConfig, extra: dict | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(records_payload(records, cfg, extra), fh, indent=2, sort_keys=True)
        fh.write("\n")
