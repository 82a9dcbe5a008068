"""Interventional oracles, baselines and benchmark orchestration."""

from vcrank.evaluation.benchmark import (
    ADVERSARIAL_COLUMNS,
    GRID_COLUMNS,
    AdversarialRow,
    BenchmarkConfig,
    BenchmarkError,
    ExperimentRow,
    adversarial_summary,
    grid_summary,
    run_adversarial_benchmark,
    run_correlation_grid,
    write_rows_csv,
)
from vcrank.evaluation.metrics import (
    BaselineScores,
    InterventionalEffect,
    correlational_baseline,
    effect_from_probabilities,
    interventional_effect,
    sign_concordance,
)
from vcrank.vcr_core.stats import UndefinedCorrelationError, pearson

__all__ = [
    "ADVERSARIAL_COLUMNS",
    "GRID_COLUMNS",
    "AdversarialRow",
    "BaselineScores",
    "BenchmarkConfig",
    "BenchmarkError",
    "ExperimentRow",
    "InterventionalEffect",
    "UndefinedCorrelationError",
    "adversarial_summary",
    "correlational_baseline",
    "effect_from_probabilities",
    "grid_summary",
    "interventional_effect",
    "pearson",
    "run_adversarial_benchmark",
    "run_correlation_grid",
    "sign_concordance",
    "write_rows_csv",
]
