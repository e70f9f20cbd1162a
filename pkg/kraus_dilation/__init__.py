"""Kraus dilation - open quantum dynamics through Kraus products and unitary 1-dilations."""

from .channels import (
    DensityMatrix,
    InitialEnsemble,
    Jump,
    KrausSet,
    LindbladModel,
    apply_channel,
    damping_channel,
    kraus_from_lindblad,
)
from .core import (
    ConfigInvalid,
    Experiment,
    ExperimentExecutionError,
    ExperimentStep,
    ModelNotFound,
    SimulationError,
)
from .dilation import DilatedUnitary, defect_operator, dilate, embed_state
from .evolution import (
    PruningPolicy,
    TermProduct,
    enumerate_products,
    evolve_lindblad_euler,
    evolve_operator_sum,
    extend_products,
)
from .measurement import (
    MeasurementRecord,
    ObservableSpec,
    estimate_diagonal,
    estimate_expectation,
    shift_observable,
)
from .results import ExperimentResult, ReportResult, TrajectoryResult
from .utils.common import EstimationMode, NormKind

from .cli import main as experiment


__version__ = "0.1.0"

__all__ = [
    # Channels
    "Jump",
    "LindbladModel",
    "KrausSet",
    "DensityMatrix",
    "InitialEnsemble",
    "kraus_from_lindblad",
    "apply_channel",
    "damping_channel",
    # Evolution
    "TermProduct",
    "PruningPolicy",
    "extend_products",
    "enumerate_products",
    "evolve_operator_sum",
    "evolve_lindblad_euler",
    # Dilation
    "DilatedUnitary",
    "defect_operator",
    "dilate",
    "embed_state",
    # Measurement
    "MeasurementRecord",
    "ObservableSpec",
    "estimate_diagonal",
    "estimate_expectation",
    "shift_observable",
    "EstimationMode",
    "NormKind",
    # Framework
    "SimulationError",
    "ConfigInvalid",
    "ModelNotFound",
    "ExperimentExecutionError",
    "Experiment",
    "ExperimentStep",
    "ExperimentResult",
    "TrajectoryResult",
    "ReportResult",
    "experiment",
    # Version
    "__version__",
]
