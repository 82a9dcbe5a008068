"""Correlation-controlled training sets, balanced test sets and shifted sets."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from vcrank.rng import PCG32
from vcrank.synthgen.images import FeaturePairSpec, Image, get_pair, render_feature_image
from vcrank.synthgen.ppm import read_ppm, write_ppm

POSITIVE = "positive"
NEGATIVE = "negative"
LABELS = (POSITIVE, NEGATIVE)
GRID_RHOS = (-1.0, -0.5, 0.0, 0.5, 1.0)

MANIFEST_COLUMNS = ("index", "path", "label", "has_a", "has_b", "seed")

# PCG32 stream ids used for flag assignment, distinct from image rendering
_STREAM_A = 0xA
_STREAM_B = 0xB


@dataclass(frozen=True)
class DatasetConfig:
    pair: FeaturePairSpec
    n_train: int = 400
    n_test: int = 200
    rho_a: float = 0.0
    rho_b: float | None = None  # defaults to -rho_a
    base_seed: int = 0
    test_seed_offset: int = 10000

    def __post_init__(self):
        object.__setattr__(self, "pair", get_pair(self.pair))
        if self.rho_b is None:
            object.__setattr__(self, "rho_b", -self.rho_a)

    @property
    def test_seed(self) -> int:
        return self.base_seed + self.test_seed_offset


@dataclass
class LabeledDataset:
    items: list[tuple[Image, str]]
    pair: FeaturePairSpec
    provenance: str
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.items)

    @property
    def images(self) -> list[Image]:
        return [img for img, _ in self.items]

    @property
    def labels(self) -> np.ndarray:
        """1 for positive, 0 for negative."""
        return np.array([lab == POSITIVE for _, lab in self.items], dtype=np.int64)

    @property
    def has_a(self) -> np.ndarray:
        return np.array([img.has_a for img, _ in self.items], dtype=bool)

    @property
    def has_b(self) -> np.ndarray:
        return np.array([img.has_b for img, _ in self.items], dtype=bool)

    @property
    def seeds(self) -> list[int]:
        return [img.seed for img, _ in self.items]

    def subset(self, indices) -> "LabeledDataset":
        return LabeledDataset([self.items[i] for i in indices], self.pair, self.provenance, dict(self.meta))


def _exact(x: float) -> Fraction:
    # decimal reading of the float so that e.g. 0.3 is 3/10, not its binary neighbour
    return Fraction(repr(float(x)))


def count_with_feature_positive(n_pos: int, rho: float) -> int:
    """Positives carrying the feature: floor(N_pos/2 * (rho + 1))."""
    return math.floor(Fraction(n_pos, 2) * (_exact(rho) + 1))


def count_with_feature_negative(n_neg: int, rho: float) -> int:
    """Negatives carrying the feature: floor(N_neg/2 * (1 - (rho + 1)/2))."""
    return math.floor(Fraction(n_neg, 2) * (1 - (_exact(rho) + 1) / 2))


def _check_rho(name: str, rho: float) -> None:
    if not (-1.0 <= rho <= 1.0) or math.isnan(rho):
        raise ValueError(f"{name}={rho} outside [-1, 1]")


def _flags(rng: PCG32, n: int, k: int) -> list[bool]:
    """Exactly ``k`` of ``n`` flags set, positions drawn by a seeded shuffle."""
    order = rng.permutation(n)
    flags = [False] * n
    for i in order[:k]:
        flags[i] = True
    return flags


def _assemble(pair, labels, has_a, has_b, seed0, provenance, meta) -> LabeledDataset:
    items = []
    for i, (lab, a, b) in enumerate(zip(labels, has_a, has_b)):
        img = render_feature_image(pair, a, b, seed0 + i)
        items.append((img, lab))
    return LabeledDataset(items, pair, provenance, meta)


def _split_flags(base_seed: int, stream: int, n_pos: int, n_neg: int, k_pos: int, k_neg: int) -> list[bool]:
    rng = PCG32(base_seed, stream)
    return _flags(rng, n_pos, k_pos) + _flags(rng, n_neg, k_neg)


def build_training_set(cfg: DatasetConfig) -> LabeledDataset:
    """Training set whose per-label feature counts follow the floor formulas exactly.

    Items ``0..N_pos-1`` are positive and the rest negative; item ``i`` is
    rendered with seed ``base_seed + i``.
    """
    if cfg.n_train <= 0 or cfg.n_train % 2:
        raise ValueError(f"n_train must be a positive even count, got {cfg.n_train}")
    _check_rho("rho_a", cfg.rho_a)
    _check_rho("rho_b", cfg.rho_b)
    n_pos = n_neg = cfg.n_train // 2
    has_a = _split_flags(
        cfg.base_seed,
        _STREAM_A,
        n_pos,
        n_neg,
        count_with_feature_positive(n_pos, cfg.rho_a),
        count_with_feature_negative(n_neg, cfg.rho_a),
    )
    has_b = _split_flags(
        cfg.base_seed,
        _STREAM_B,
        n_pos,
        n_neg,
        count_with_feature_positive(n_pos, cfg.rho_b),
        count_with_feature_negative(n_neg, cfg.rho_b),
    )
    labels = [POSITIVE] * n_pos + [NEGATIVE] * n_neg
    meta = {"rho_a": cfg.rho_a, "rho_b": cfg.rho_b, "base_seed": cfg.base_seed}
    return _assemble(cfg.pair, labels, has_a, has_b, cfg.base_seed, "grid_train", meta)


def build_balanced_test_set(cfg: DatasetConfig) -> LabeledDataset:
    """``n_test/4`` images per (has_a, has_b) cell, labels alternating within a cell."""
    if cfg.n_test <= 0 or cfg.n_test % 4:
        raise ValueError(f"n_test must be a positive multiple of 4, got {cfg.n_test}")
    per_cell = cfg.n_test // 4
    labels, has_a, has_b = [], [], []
    for a, b in ((True, True), (True, False), (False, True), (False, False)):
        for r in range(per_cell):
            labels.append(POSITIVE if r % 2 == 0 else NEGATIVE)
            has_a.append(a)
            has_b.append(b)
    meta = {"base_seed": cfg.base_seed, "test_seed_offset": cfg.test_seed_offset}
    return _assemble(cfg.pair, labels, has_a, has_b, cfg.test_seed, "grid_test", meta)


ADVERSARIAL_N_TRAIN = 400
ADVERSARIAL_N_TEST = 200


def build_adversarial_sets(
    pair: str | FeaturePairSpec, base_seed: int, test_seed_offset: int = 10000
) -> tuple[LabeledDataset, LabeledDataset]:
    """Train/test sets where feature B flips from negatively to positively predictive.

    Train: A in 100% of positives / 0% of negatives, B in 10% / 90%.
    Test: A in 100% / 0%, B in 80% / 20%.
    """
    fpair = get_pair(pair)
    if fpair.positional:
        raise ValueError(f"positional pair {fpair.id!r} is excluded from the adversarial benchmark")

    def make(n, frac_b_pos, frac_b_neg, seed0, provenance):
        n_pos = n_neg = n // 2
        has_a = [True] * n_pos + [False] * n_neg
        k_pos = math.floor(n_pos * _exact(frac_b_pos))
        k_neg = math.floor(n_neg * _exact(frac_b_neg))
        has_b = _split_flags(seed0, _STREAM_B, n_pos, n_neg, k_pos, k_neg)
        labels = [POSITIVE] * n_pos + [NEGATIVE] * n_neg
        return _assemble(fpair, labels, has_a, has_b, seed0, provenance, {"base_seed": base_seed})

    train = make(ADVERSARIAL_N_TRAIN, 0.1, 0.9, base_seed, "adversarial_train")
    test = make(ADVERSARIAL_N_TEST, 0.8, 0.2, base_seed + test_seed_offset, "adversarial_test")
    return train, test


def bootstrap_indices(n: int, seed: int) -> np.ndarray:
    return PCG32(seed).choices(n, n)


def bootstrap_resample(data: LabeledDataset, seed: int) -> LabeledDataset:
    """Same-size resample with replacement."""
    idx = bootstrap_indices(len(data), seed)
    out = data.subset(idx.tolist())
    out.meta["bootstrap_seed"] = seed
    return out


# -- manifests --------------------------------------------------------------


def write_dataset(data: LabeledDataset, directory: str | os.PathLike, prefix: str, comment: str | None = None) -> Path:
    """Write ``<prefix>_<index>.ppm`` files and ``<prefix>_manifest.csv``.

    ``comment`` lines are written above the header, each prefixed with ``# ``.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = directory / f"{prefix}_manifest.csv"
    with open(manifest, "w", newline="") as fh:
        for line in (comment or "").splitlines():
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_COLUMNS)
        for i, (img, lab) in enumerate(data.items):
            name = f"{prefix}_{i:05d}.ppm"
            write_ppm(img, directory / name)
            w.writerow([i, name, lab, int(img.has_a), int(img.has_b), img.seed])
    return manifest


def read_manifest(path: str | os.PathLike, pair: str | FeaturePairSpec, provenance: str = "grid_test") -> LabeledDataset:
    """Load a manifest; image paths are resolved relative to the manifest.

    Leading ``#`` comment lines are skipped.
    """
    path = Path(path)
    items = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(ln for ln in fh if not ln.startswith("#"))
        if tuple(reader.fieldnames or ()) != MANIFEST_COLUMNS:
            raise ValueError(f"manifest columns {reader.fieldnames} != {list(MANIFEST_COLUMNS)}")
        for row in reader:
            if row["label"] not in LABELS:
                raise ValueError(f"bad label {row['label']!r} in {path}")
            img = read_ppm(path.parent / row["path"])
            items.append((img, row["label"]))
    return LabeledDataset(items, get_pair(pair), provenance)


