from .harness import (
    ALL_METHODS,
    EMBEDDING_METHODS,
    SCORE_METHODS,
    ExperimentReport,
    render_table,
    reports_from_outcomes,
    run_experiment,
    run_outcomes,
    run_seed,
    split_dataset,
    subset,
    write_reports,
)
from .metrics import GapResult, MetricError, auroc, distance_gap, map_labels, weighted_f1

__all__ = [
    "ALL_METHODS",
    "EMBEDDING_METHODS",
    "ExperimentReport",
    "GapResult",
    "MetricError",
    "SCORE_METHODS",
    "auroc",
    "distance_gap",
    "map_labels",
    "render_table",
    "reports_from_outcomes",
    "run_experiment",
    "run_outcomes",
    "run_seed",
    "split_dataset",
    "subset",
    "weighted_f1",
    "write_reports",
]
