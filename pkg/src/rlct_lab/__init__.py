"""Learning coefficients (RLCTs) of Poisson mixtures and their simulation checks."""

from .config import ExperimentConfig, PriorSpec, SamplerSettings, Settings
from .models import (
    ExperimentRecord,
    MixtureParams,
    ModelSignature,
    PartitionSpec,
    RlctSource,
    RlctValue,
    TrueModel,
)
from .pipeline import ExperimentPipeline, run_experiment

__all__ = [
    "ExperimentConfig",
    "ExperimentPipeline",
    "ExperimentRecord",
    "MixtureParams",
    "ModelSignature",
    "PartitionSpec",
    "PriorSpec",
    "RlctSource",
    "RlctValue",
    "SamplerSettings",
    "Settings",
    "TrueModel",
    "run_experiment",
]
