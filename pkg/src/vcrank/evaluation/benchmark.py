"""Correlation-grid and adversarial-shift benchmarks."""

from __future__ import annotations

import csv
import math
import multiprocessing
import os
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np

from vcrank.concept_oracle import cosine_labels, descriptor_matrix, vocabulary_from_names
from vcrank.evaluation.metrics import (
    correlational_baseline,
    effect_from_probabilities,
    sign_concordance,
)
from vcrank.rng import derive_seed
from vcrank.synthgen.datasets import (
    GRID_RHOS,
    DatasetConfig,
    LabeledDataset,
    bootstrap_indices,
    build_adversarial_sets,
    build_balanced_test_set,
    build_training_set,
)
from vcrank.synthgen.images import NON_POSITIONAL_IDS, PAIR_IDS, get_pair
from vcrank.toy_lmm import TrainConfig, class_probabilities, downsample_batch, fine_tune, init_model
from vcrank.vcr_core.stats import UndefinedCorrelationError, pearson
from vcrank.vcr_core.vcr import VcrConfig, psi_samples

GRID_COLUMNS = (
    "pair_id",
    "rho_a",
    "replicate",
    "feature",
    "concept",
    "vcr_psi",
    "clip_r",
    "interventional_delta",
    "train_seed",
)
ADVERSARIAL_COLUMNS = (
    "pair_id",
    "replicate",
    "feature",
    "designation",
    "concept",
    "vcr_psi",
    "clip_r",
    "interventional_delta",
    "train_seed",
)


@dataclass(frozen=True)
class BenchmarkConfig:
    seed: int = 0
    replicates: int = 5
    pairs: tuple[str, ...] = PAIR_IDS
    rhos: tuple[float, ...] = GRID_RHOS
    n_train: int = 400
    n_test: int = 200
    hook_layer: int = 1
    train: TrainConfig = field(default_factory=TrainConfig)
    vcr: VcrConfig = field(default_factory=VcrConfig)
    jobs: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        for p in self.pairs:
            get_pair(p)


@dataclass(frozen=True)
class ExperimentRow:
    pair_id: str
    rho_a: float
    replicate: int
    feature: str
    concept: str
    vcr_psi: float
    clip_r: float
    interventional_delta: float
    train_seed: int


@dataclass(frozen=True)
class AdversarialRow:
    pair_id: str
    replicate: int
    feature: str
    designation: str
    concept: str
    vcr_psi: float
    clip_r: float
    interventional_delta: float
    train_seed: int


class BenchmarkError(RuntimeError):
    """A condition failed; ``completed`` lists the conditions that finished."""

    def __init__(self, message: str, condition: tuple, completed: list[tuple]):
        super().__init__(message)
        self.condition = condition
        self.completed = completed


# -- cached per-process assets ----------------------------------------------


@dataclass(frozen=True)
class _ProbeAssets:
    data: LabeledDataset
    descriptors: np.ndarray
    inputs: np.ndarray


def _probe_assets(data: LabeledDataset) -> _ProbeAssets:
    return _ProbeAssets(data, descriptor_matrix(data.images), downsample_batch(data.images))


@lru_cache(maxsize=2)
def _grid_train(pair: str, rho: float, seed: int, n_train: int):
    data = build_training_set(DatasetConfig(pair, n_train=n_train, rho_a=rho, base_seed=seed))
    return data, downsample_batch(data.images)


@lru_cache(maxsize=2)
def _balanced_test(pair: str, seed: int, n_test: int) -> _ProbeAssets:
    return _probe_assets(build_balanced_test_set(DatasetConfig(pair, n_test=n_test, base_seed=seed)))


@lru_cache(maxsize=1)
def _adversarial(pair: str, seed: int):
    train, test = build_adversarial_sets(pair, seed)
    return train, downsample_batch(train.images), _probe_assets(test)


def clear_caches() -> None:
    _grid_train.cache_clear()
    _balanced_test.cache_clear()
    _adversarial.cache_clear()


# -- one condition -----------------------------------------------------------


@dataclass(frozen=True)
class _Scores:
    psi: np.ndarray
    clip_r: np.ndarray
    delta: np.ndarray


def _train_model(cfg: BenchmarkConfig, cseed: int, train: LabeledDataset, x_train: np.ndarray):
    idx = bootstrap_indices(len(train), derive_seed(cseed, "bootstrap"))
    model = init_model(derive_seed(cseed, "init"), hook_layer=cfg.hook_layer)
    tcfg = replace(cfg.train, seed=derive_seed(cseed, "train"))
    return fine_tune(model, train.subset(idx.tolist()), tcfg, inputs=x_train[idx])


def _score(cfg: BenchmarkConfig, cseed: int, model, pair: str, probe: _ProbeAssets, effect_set: _ProbeAssets) -> _Scores:
    fpair = get_pair(pair)
    vocab = vocabulary_from_names([fpair.concept_name_a, fpair.concept_name_b])
    vcfg = replace(cfg.vcr, seed=derive_seed(cseed, "vcr"))
    samples = psi_samples(model, probe.data.images, vocab, vcfg, descriptors=probe.descriptors, inputs=probe.inputs)
    p_probe = class_probabilities(model, None, inputs=probe.inputs)
    y_probe, _ = cosine_labels(probe.descriptors, vocab)
    clip = correlational_baseline(y_probe, p_probe).r
    if effect_set is probe:
        p_eff = p_probe
    else:
        p_eff = class_probabilities(model, None, inputs=effect_set.inputs)
    delta = np.array(
        [
            effect_from_probabilities(p_eff, effect_set.data.has_a, "A").delta,
            effect_from_probabilities(p_eff, effect_set.data.has_b, "B").delta,
        ]
    )
    return _Scores(samples.mean(axis=1), clip, delta)


def grid_condition_seed(cfg: BenchmarkConfig, pair: str, rho: float, replicate: int) -> int:
    return derive_seed("grid", cfg.seed, pair, repr(float(rho)), replicate)


def run_grid_condition(cfg: BenchmarkConfig, pair: str, rho: float, replicate: int) -> list[ExperimentRow]:
    """Fine-tune on a bootstrap resample, then score both concepts of the pair."""
    cseed = grid_condition_seed(cfg, pair, rho, replicate)
    train, x_train = _grid_train(pair, float(rho), cfg.seed, cfg.n_train)
    test = _balanced_test(pair, cfg.seed, cfg.n_test)
    model = _train_model(cfg, cseed, train, x_train)
    s = _score(cfg, cseed, model, pair, test, test)
    fpair = get_pair(pair)
    names = (fpair.concept_name_a, fpair.concept_name_b)
    return [
        ExperimentRow(pair, float(rho), replicate, feat, names[j], float(s.psi[j]), float(s.clip_r[j]), float(s.delta[j]), cseed)
        for j, feat in enumerate(("A", "B"))
    ]


def adversarial_condition_seed(cfg: BenchmarkConfig, pair: str, replicate: int) -> int:
    return derive_seed("adversarial", cfg.seed, pair, replicate)


def run_adversarial_condition(cfg: BenchmarkConfig, pair: str, replicate: int) -> list[AdversarialRow]:
    """Train under the shifted design, probe on the shifted test set.

    Ground-truth effects come from a balanced test set of the same pair, where
    the two features are independent of each other and of the label.
    """
    cseed = adversarial_condition_seed(cfg, pair, replicate)
    train, x_train, shifted = _adversarial(pair, cfg.seed)
    balanced = _balanced_test(pair, cfg.seed, cfg.n_test)
    model = _train_model(cfg, cseed, train, x_train)
    s = _score(cfg, cseed, model, pair, shifted, balanced)
    fpair = get_pair(pair)
    names = (fpair.concept_name_a, fpair.concept_name_b)
    designations = ("reliable", "spurious")
    return [
        AdversarialRow(
            pair, replicate, feat, designations[j], names[j], float(s.psi[j]), float(s.clip_r[j]), float(s.delta[j]), cseed
        )
        for j, feat in enumerate(("A", "B"))
    ]


# -- orchestration -----------------------------------------------------------


def _call(task):
    fn, cfg, args = task
    return args, fn(cfg, *args)


def _run_all(fn, cfg: BenchmarkConfig, conditions: list[tuple], progress=None) -> list:
    rows: list = []
    completed: list[tuple] = []
    tasks = [(fn, cfg, c) for c in conditions]

    def consume(results):
        current = None
        try:
            for i, (args, out) in enumerate(results):
                current = args
                rows.extend(out)
                completed.append(args)
                if progress is not None:
                    progress(i + 1, len(tasks), args)
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            failed = next((c for c in conditions if c not in completed), current)
            raise BenchmarkError(f"condition {failed} failed: {exc}", failed, list(completed)) from exc

    if cfg.jobs == 1:
        consume(_call(t) for t in tasks)
    else:
        ctx = multiprocessing.get_context("spawn" if os.name == "nt" else "fork")
        with ctx.Pool(cfg.jobs) as pool:
            consume(pool.imap(_call, tasks, chunksize=1))
    return rows


def run_correlation_grid(cfg: BenchmarkConfig = BenchmarkConfig(), progress=None) -> list[ExperimentRow]:
    """All (pair, rho, replicate) conditions; two rows each, canonically sorted."""
    conditions = [(p, float(r), k) for p in cfg.pairs for r in cfg.rhos for k in range(cfg.replicates)]
    rows = _run_all(run_grid_condition, cfg, conditions, progress)
    order = {p: i for i, p in enumerate(PAIR_IDS)}
    return sorted(rows, key=lambda r: (order[r.pair_id], r.rho_a, r.replicate, r.feature))


def run_adversarial_benchmark(cfg: BenchmarkConfig, progress=None) -> list[AdversarialRow]:
    pairs = [p for p in cfg.pairs if not get_pair(p).positional] if cfg.pairs != PAIR_IDS else list(NON_POSITIONAL_IDS)
    conditions = [(p, k) for p in pairs for k in range(cfg.replicates)]
    rows = _run_all(run_adversarial_condition, cfg, conditions, progress)
    order = {p: i for i, p in enumerate(PAIR_IDS)}
    return sorted(rows, key=lambda r: (order[r.pair_id], r.replicate, r.feature))


# -- summaries ---------------------------------------------------------------


def _safe_pearson(x, y) -> float | None:
    try:
        return pearson(x, y)
    except (UndefinedCorrelationError, ValueError):
        return None


def fisher_z_mean(rs) -> float | None:
    """Average of correlations on the Fisher-z scale."""
    vals = [r for r in rs if r is not None]
    if not vals:
        return None
    z = np.arctanh(np.clip(vals, -1 + 1e-12, 1 - 1e-12))
    return float(np.tanh(z.mean()))


def grid_summary(rows: list[ExperimentRow]) -> dict:
    psi = np.array([r.vcr_psi for r in rows])
    clip = np.array([r.clip_r for r in rows])
    delta = np.array([r.interventional_delta for r in rows])
    per_pair = {}
    for pair in PAIR_IDS:
        sel = [i for i, r in enumerate(rows) if r.pair_id == pair]
        if sel:
            per_pair[pair] = {
                "vcr_r": _safe_pearson(psi[sel], delta[sel]),
                "clip_r": _safe_pearson(clip[sel], delta[sel]),
                "n_rows": len(sel),
            }
    return {
        "n_rows": len(rows),
        "pooled_vcr_r": _safe_pearson(psi, delta) if len(rows) >= 2 else None,
        "pooled_clip_r": _safe_pearson(clip, delta) if len(rows) >= 2 else None,
        "fisher_z_vcr_r": fisher_z_mean([v["vcr_r"] for v in per_pair.values()]),
        "per_pair": per_pair,
        "mean_abs_delta": float(np.mean(np.abs(delta))) if len(rows) else None,
    }


def adversarial_summary(rows: list[AdversarialRow]) -> dict:
    """Concordance of VCR and the baseline with the measured effects.

    ``*_designated`` fractions compare against the designed signs instead
    (positive for the reliable feature, negative for the spurious one).
    """
    des = [r.designation for r in rows]
    delta = [r.interventional_delta for r in rows]
    designed = [1.0 if d == "reliable" else -1.0 for d in des]
    out: dict = {"n_rows": len(rows)}
    for method, attr in (("vcr", "vcr_psi"), ("clip", "clip_r")):
        scores = [getattr(r, attr) for r in rows]
        measured = sign_concordance(scores, delta, des)
        intended = sign_concordance(scores, designed, des)
        out[f"{method}_reliable"] = measured["reliable"]
        out[f"{method}_spurious"] = measured["spurious"]
        out[f"{method}_reliable_designated"] = intended["reliable"]
        out[f"{method}_spurious_designated"] = intended["spurious"]
        out[f"{method}_r"] = _safe_pearson(scores, delta) if len(rows) >= 2 else None
    out["delta_sign_matches_design"] = sign_concordance(delta, designed, des)
    return out


# -- output ------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def write_rows_csv(rows, path: str | os.PathLike, columns: tuple[str, ...], comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            d = asdict(r)
            w.writerow([_fmt(d[c]) for c in columns])


def config_dict(cfg: BenchmarkConfig) -> dict:
    d = asdict(cfg)
    d["pairs"] = list(cfg.pairs)
    d["rhos"] = list(cfg.rhos)
    return d
