"""Synthetic feature-pair benchmark generation."""

from vcrank.synthgen.datasets import (
    GRID_RHOS,
    NEGATIVE,
    POSITIVE,
    DatasetConfig,
    LabeledDataset,
    bootstrap_indices,
    bootstrap_resample,
    build_adversarial_sets,
    build_balanced_test_set,
    build_training_set,
    read_manifest,
    write_dataset,
)
from vcrank.synthgen.images import (
    NON_POSITIONAL_IDS,
    PAIR_IDS,
    PAIRS,
    FeaturePairSpec,
    Image,
    get_pair,
    render_feature_image,
)
from vcrank.synthgen.ppm import (
    PPMDimensionError,
    PPMError,
    PPMFormatError,
    PPMTruncatedError,
    read_ppm,
    write_ppm,
)
from vcrank.synthgen.transforms import affine_resample, apply_dot_intervention, augment

__all__ = [
    "GRID_RHOS",
    "NEGATIVE",
    "NON_POSITIONAL_IDS",
    "PAIRS",
    "PAIR_IDS",
    "POSITIVE",
    "DatasetConfig",
    "FeaturePairSpec",
    "Image",
    "LabeledDataset",
    "PPMDimensionError",
    "PPMError",
    "PPMFormatError",
    "PPMTruncatedError",
    "affine_resample",
    "apply_dot_intervention",
    "augment",
    "bootstrap_indices",
    "bootstrap_resample",
    "build_adversarial_sets",
    "build_balanced_test_set",
    "build_training_set",
    "get_pair",
    "read_manifest",
    "read_ppm",
    "render_feature_image",
    "write_dataset",
    "write_ppm",
]
