"""Colored-dot intervention on neutral images, with augmentation replicates.

Two models are trained on the same base task. In one, dots appear far more
often on positives than on negatives; in the other, dots appear at the same
rate in both classes. Each model is then scored on neutral images with and
without dots, paired through identical augmentation draws.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from vcrank.rng import PCG32, derive_seed
from vcrank.synthgen.datasets import POSITIVE, DatasetConfig, LabeledDataset, build_training_set
from vcrank.synthgen.images import render_feature_image
from vcrank.synthgen.transforms import DOT_COLOR, DOT_COUNT, DOT_RADIUS, apply_dot_intervention, augment
from vcrank.toy_lmm import ToyModel, TrainConfig, downsample, fine_tune, forward_inputs, init_model, score_from_logits


@dataclass(frozen=True)
class DotExperimentConfig:
    seed: int = 0
    pair: str = "red_green"
    rho_a: float = 1.0
    correlated_rates: tuple[float, float] = (0.8, 0.2)  # dot rate among positives, negatives
    uncorrelated_rates: tuple[float, float] = (0.5, 0.5)
    n_probe: int = 10
    n_augment: int = 10
    replicates: int = 10
    n_dots: int = DOT_COUNT
    radius: int = DOT_RADIUS
    color: tuple[int, int, int] = DOT_COLOR
    train: TrainConfig = field(default_factory=TrainConfig)


@dataclass(frozen=True)
class DotEffect:
    """Paired change in mean task score when dots are added."""

    delta: float
    replicate_deltas: tuple[float, ...]
    no_dot_means: tuple[float, ...]
    dot_means: tuple[float, ...]
    no_dot_sd: float  # across every augmented no-dot copy

    @property
    def no_dot_spread(self) -> float:
        """Standard deviation of the no-dot scores over augmented copies."""
        return self.no_dot_sd

    @property
    def no_dot_mean_range(self) -> float:
        """Range of the per-replicate no-dot means (a stricter yardstick)."""
        return float(max(self.no_dot_means) - min(self.no_dot_means))

    @property
    def standard_error(self) -> float:
        d = np.asarray(self.replicate_deltas)
        return float(d.std(ddof=1) / math.sqrt(d.size)) if d.size > 1 else float("nan")


def dotted_training_set(cfg: DotExperimentConfig, rates: tuple[float, float], tag: str) -> LabeledDataset:
    """Base training set with dots painted on an exact fraction of each class."""
    base = build_training_set(DatasetConfig(cfg.pair, rho_a=cfg.rho_a, base_seed=cfg.seed))
    labels = base.labels
    rng = PCG32(derive_seed("dots-assign", cfg.seed, tag))
    dotted = np.zeros(len(base), dtype=bool)
    for cls, rate in ((1, rates[0]), (0, rates[1])):
        members = np.flatnonzero(labels == cls)
        k = math.floor(len(members) * rate)
        order = rng.permutation(len(members))
        dotted[members[order[:k]]] = True
    items = []
    for i, (img, lab) in enumerate(base.items):
        if dotted[i]:
            img = apply_dot_intervention(img, cfg.n_dots, cfg.radius, cfg.color, derive_seed("dots-train", cfg.seed, tag, i))
        items.append((img, lab))
    meta = dict(base.meta, dot_rates=list(rates), dotted=int(dotted.sum()))
    return LabeledDataset(items, base.pair, base.provenance, meta)


def train_dot_model(cfg: DotExperimentConfig, correlated: bool) -> ToyModel:
    tag = "correlated" if correlated else "uncorrelated"
    data = dotted_training_set(cfg, cfg.correlated_rates if correlated else cfg.uncorrelated_rates, tag)
    model = init_model(derive_seed("dots-init", cfg.seed, tag))
    return fine_tune(model, data, replace(cfg.train, seed=derive_seed("dots-train-order", cfg.seed, tag)))


def _score(model: ToyModel, img) -> float:
    return score_from_logits(model, forward_inputs(model, downsample(img))[1], POSITIVE)


def measure_dot_effect(model: ToyModel, cfg: DotExperimentConfig) -> DotEffect:
    """Mean positive-class score with dots minus without, over neutral probes.

    Each replicate draws fresh neutral images (no feature present); every
    image is augmented ``n_augment`` times, and the dotted copy reuses the
    undotted copy's augmentation seed.
    """
    no_dot, with_dot, every = [], [], []
    for r in range(cfg.replicates):
        s0, s1 = [], []
        for i in range(cfg.n_probe):
            img = render_feature_image(cfg.pair, False, False, derive_seed("dots-probe", cfg.seed, r, i))
            dotted = apply_dot_intervention(img, cfg.n_dots, cfg.radius, cfg.color, derive_seed("dots-probe-dots", cfg.seed, r, i))
            for k in range(cfg.n_augment):
                aseed = derive_seed("dots-aug", cfg.seed, r, i, k)
                s0.append(_score(model, augment(img, aseed)))
                s1.append(_score(model, augment(dotted, aseed)))
        every.extend(s0)
        no_dot.append(float(np.mean(s0)))
        with_dot.append(float(np.mean(s1)))
    deltas = tuple(b - a for a, b in zip(no_dot, with_dot))
    return DotEffect(float(np.mean(deltas)), deltas, tuple(no_dot), tuple(with_dot), float(np.std(every, ddof=1)))


def run_dot_experiment(cfg: DotExperimentConfig = DotExperimentConfig()) -> dict:
    out = {"config": asdict(cfg)}
    for tag, correlated in (("correlated", True), ("uncorrelated", False)):
        eff = measure_dot_effect(train_dot_model(cfg, correlated), cfg)
        out[tag] = {
            "delta": eff.delta,
            "standard_error": eff.standard_error,
            "no_dot_spread": eff.no_dot_spread,
            "no_dot_mean_range": eff.no_dot_mean_range,
            "replicate_deltas": list(eff.replicate_deltas),
            "no_dot_means": list(eff.no_dot_means),
            "dot_means": list(eff.dot_means),
        }
    return out
