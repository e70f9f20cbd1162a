"""Core components - error hierarchy and the step-driven experiment runner."""

from .exceptions import (
    ConfigInvalid,
    ExperimentExecutionError,
    ModelNotFound,
    SimulationError,
)
from .experiment import Experiment, ExperimentStep

__all__ = [
    "SimulationError",
    "ConfigInvalid",
    "ModelNotFound",
    "ExperimentExecutionError",
    "Experiment",
    "ExperimentStep",
]
