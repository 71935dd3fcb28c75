"""Acceptance-region auditing for biometric classifiers."""

from ._araudit import (
    InvalidInput,
    IoError,
    Model,
    TrainingDiverged,
    acceptance_region,
    beta_noise,
    curves,
    experiment_names,
    generate_population,
    load_model,
    region_volume,
    run_experiment,
    threshold_grid,
    train,
)

__all__ = [
    "InvalidInput",
    "IoError",
    "Model",
    "TrainingDiverged",
    "acceptance_region",
    "beta_noise",
    "curves",
    "experiment_names",
    "generate_population",
    "load_model",
    "region_volume",
    "run_experiment",
    "threshold_grid",
    "train",
]
