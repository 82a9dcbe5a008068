"""Concept vectors, sensitivities and significance testing."""

from vcrank.vcr_core.cav import (
    ConceptVector,
    DegenerateConceptError,
    SingularSystemError,
    factorized_directions,
    fit_cav,
    ridge_dual,
    ridge_primal,
    ridge_solve,
)
from vcrank.vcr_core.stats import (
    P_FLOOR,
    UndefinedCorrelationError,
    bonferroni_threshold,
    pearson,
    regularized_incomplete_beta,
    student_t_sf,
    t_statistics,
    t_test_one_sample,
)
from vcrank.vcr_core.vcr import (
    RECORD_COLUMNS,
    SensitivityRecord,
    VcrConfig,
    bonferroni_rank,
    psi_samples,
    records_payload,
    replicate_indices,
    run_vcr,
    sensitivity,
    sort_records,
    write_records_csv,
    write_records_json,
)

__all__ = [
    "P_FLOOR",
    "RECORD_COLUMNS",
    "ConceptVector",
    "DegenerateConceptError",
    "SensitivityRecord",
    "SingularSystemError",
    "UndefinedCorrelationError",
    "VcrConfig",
    "bonferroni_rank",
    "bonferroni_threshold",
    "factorized_directions",
    "fit_cav",
    "pearson",
    "psi_samples",
    "records_payload",
    "regularized_incomplete_beta",
    "replicate_indices",
    "ridge_dual",
    "ridge_primal",
    "ridge_solve",
    "run_vcr",
    "sensitivity",
    "sort_records",
    "student_t_sf",
    "t_statistics",
    "t_test_one_sample",
    "write_records_csv",
    "write_records_json",
]
