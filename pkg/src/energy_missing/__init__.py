"""Energy-distance two-sample tests for incomplete multivariate data."""
from .data import IncompleteSample, build_sample, read_csv, write_csv
from .distance import pairwise_matrix, truncated_distance, weighted_distance
from .estimator import EnergyTwoSampleTest
from .imputation import KNNMedianImputer, MeanImputer, MedianImputer, impute
from .resampling import (
    BootstrapOutcome,
    Procedure,
    bootstrap_test,
    procedure_from_label,
    resample_pooled,
    resample_split_preserving,
    study_procedures,
    warp_speed_study,
)
from .statistics import cc_statistic, energy_statistic, weighted_statistic

__version__ = "0.1.0"

__all__ = [
    "BootstrapOutcome", "EnergyTwoSampleTest", "IncompleteSample", "KNNMedianImputer",
    "MeanImputer", "MedianImputer", "Procedure", "bootstrap_test", "build_sample",
    "cc_statistic", "energy_statistic", "impute", "pairwise_matrix", "procedure_from_label",
    "read_csv", "resample_pooled", "resample_split_preserving", "study_procedures",
    "truncated_distance", "warp_speed_study", "weighted_distance", "weighted_statistic",
    "write_csv",
]
