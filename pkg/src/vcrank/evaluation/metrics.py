"""Ground-truth interventional effects, the correlational baseline and sign agreement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vcrank.synthgen.datasets import LabeledDataset
from vcrank.toy_lmm import ToyModel, class_probabilities
from vcrank.vcr_core.stats import UndefinedCorrelationError, pearson

FEATURES = ("A", "B")


@dataclass(frozen=True)
class InterventionalEffect:
    feature: str
    delta: float
    n_present: int
    n_absent: int


def effect_from_probabilities(probs, present, feature: str) -> InterventionalEffect:
    """Mean P(positive) where the feature is present minus where it is absent."""
    probs = np.asarray(probs, dtype=np.float64)
    present = np.asarray(present, dtype=bool)
    if probs.shape != present.shape:
        raise ValueError("probabilities and feature flags differ in length")
    n_p = int(present.sum())
    n_a = int((~present).sum())
    if n_p == 0 or n_a == 0:
        raise ValueError(f"feature {feature}: a present/absent cell is empty ({n_p}/{n_a})")
    delta = float(probs[present].mean() - probs[~present].mean())
    return InterventionalEffect(feature, delta, n_p, n_a)


def interventional_effect(
    model: ToyModel, test: LabeledDataset, feature: str, probs: np.ndarray | None = None
) -> InterventionalEffect:
    if feature not in FEATURES:
        raise ValueError(f"feature must be 'A' or 'B', got {feature!r}")
    if probs is None:
        probs = class_probabilities(model, test.images)
    flags = test.has_a if feature == "A" else test.has_b
    return effect_from_probabilities(probs, flags, feature)


@dataclass(frozen=True)
class BaselineScores:
    concept_names: tuple[str, ...]
    r: np.ndarray  # per concept
    undefined: np.ndarray  # bool, r forced to 0 because a column was constant


def correlational_baseline(y_test, p_test) -> BaselineScores:
    """Pearson r between each concept-label column and the model's probabilities.

    ``y_test`` is a :class:`~vcrank.concept_oracle.ConceptLabelMatrix` or a bare
    N x K array. Constant inputs give r = 0 with the ``undefined`` flag set.
    """
    values = np.asarray(getattr(y_test, "values", y_test), dtype=np.float64)
    names = tuple(getattr(y_test, "concept_names", range(values.shape[1])))
    p = np.asarray(p_test, dtype=np.float64).ravel()
    if values.ndim != 2 or values.shape[0] != p.shape[0]:
        raise ValueError(f"label matrix rows {values.shape[0]} != probability count {p.shape[0]}")
    r = np.zeros(values.shape[1])
    undefined = np.zeros(values.shape[1], dtype=bool)
    for k in range(values.shape[1]):
        try:
            r[k] = pearson(values[:, k], p)
        except UndefinedCorrelationError:
            undefined[k] = True
    return BaselineScores(names, r, undefined)


def _concordant(scores, effects) -> np.ndarray:
    s = np.sign(np.asarray(scores, dtype=np.float64))
    e = np.sign(np.asarray(effects, dtype=np.float64))
    if s.shape != e.shape:
        raise ValueError("scores and effects must be matched")
    return (s == e) & (s != 0)


def sign_concordance(scores, effects, designations=None):
    """Fraction of features whose score sign matches the effect sign.

    A zero score never counts as concordant. With ``designations`` (one of
    ``"reliable"``/``"spurious"`` per feature) a dict of per-designation
    fractions is returned instead of a single number.
    """
    hits = _concordant(scores, effects)
    if designations is None:
        return float(hits.mean()) if hits.size else 0.0
    labels = np.asarray(designations)
    if labels.shape != hits.shape:
        raise ValueError("designations must match the feature list")
    out = {}
    for name in ("reliable", "spurious"):
        mask = labels == name
        out[name] = float(hits[mask].mean()) if mask.any() else float("nan")
    return out
