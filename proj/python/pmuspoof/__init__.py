"""Synthetic synchrophasor spoof detection pipeline."""

from ._core import (
    DataError,
    Dataset,
    FeatureTable,
    Model,
    SpoofedDataset,
    apply_spoof,
    apply_spoofs,
    default_genspec_json,
    empirical_rho,
    extract,
    extract_labeled,
    generate,
    load_csv,
    load_features_csv,
    load_model,
    pearson,
    run_experiment,
    sliding_pearson,
    train,
    write_experiment_report,
)

__all__ = [
    "DataError",
    "Dataset",
    "FeatureTable",
    "Model",
    "SpoofedDataset",
    "apply_spoof",
    "apply_spoofs",
    "default_genspec_json",
    "empirical_rho",
    "extract",
    "extract_labeled",
    "generate",
    "load_csv",
    "load_features_csv",
    "load_model",
    "pearson",
    "run_experiment",
    "sliding_pearson",
    "train",
    "write_experiment_report",
]
