"""Custom exceptions for the simulator.

Every error raised by the library carries a module-qualified ``code`` such as
``linalg.not_hermitian`` so the CLI can emit one machine-readable line per failure.
"""

import json
from typing import Any, Dict, Optional


class SimulationError(Exception):
    """Base class for all simulator errors."""

    module: str = "simulation"
    kind: str = "error"

    def __init__(
        self,
        message: str,
        *,
        module: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        if module is not None:
            self.module = module
        self.message = message
        self.details = details or {}
        super().__init__(message)

    @property
    def code(self) -> str:
        return f"{self.module}.{self.kind}"

    def to_line(self) -> str:
        """Render the error as a single machine-readable line."""
        return f"error code={self.code} message={json.dumps(self.message)}"


# linalg


class NotHermitian(SimulationError):
    """Raised when a matrix fails the entrywise Hermiticity check."""

    module = "linalg"
    kind = "not_hermitian"


class NotPSD(SimulationError):
    """Raised when a matrix has an eigenvalue (or pivot) below ``-tol``."""

    module = "linalg"
    kind = "not_psd"


# channels


class StepTooLarge(SimulationError):
    """Raised when ``rate * dt * |L|^2 >= 1`` so the completion operator is undefined."""

    module = "channels"
    kind = "step_too_large"


class InvalidProbability(SimulationError):
    module = "channels"
    kind = "invalid_probability"


class InvalidModel(SimulationError):
    """Raised when a Lindblad model, Kraus set or state violates its invariants."""

    module = "channels"
    kind = "invalid_model"


class DimensionMismatch(SimulationError):
    """Raised when operands have incompatible dimensions.

    Shared by several modules, so the raising module is passed explicitly.
    """

    kind = "dimension_mismatch"

    def __init__(self, module: str, message: str, **kwargs: Any):
        super().__init__(message, module=module, **kwargs)


# evolution


class BadStep(SimulationError):
    module = "evolution"
    kind = "bad_step"


# dilation


class NotContraction(SimulationError):
    module = "dilation"
    kind = "not_contraction"


# measurement


class NotNormalized(SimulationError):
    kind = "not_normalized"

    def __init__(self, module: str, message: str, **kwargs: Any):
        super().__init__(message, module=module, **kwargs)


class ZeroObservable(SimulationError):
    module = "measurement"
    kind = "zero_observable"


# cli


class ConfigInvalid(SimulationError):
    module = "cli"
    kind = "config_invalid"


class ModelNotFound(SimulationError):
    module = "cli"
    kind = "model_not_found"


class ExperimentExecutionError(SimulationError):
    """Raised when an experiment step fails with a non-simulation exception."""

    module = "experiment"
    kind = "failed"

    def __init__(
        self,
        experiment_name: str,
        step_name: str,
        original_error: Optional[Exception] = None,
    ):
        self.experiment_name = experiment_name
        self.step_name = step_name
        self.original_error = original_error
        reason = str(original_error) if original_error is not None else "unknown error"
        super().__init__(
            f"Experiment '{experiment_name}' failed in step '{step_name}': {reason}"
        )
