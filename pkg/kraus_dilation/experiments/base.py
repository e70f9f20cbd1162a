"""Shared plumbing for experiments that evolve a Lindblad model."""

from typing import Any, Dict, List, Optional, Type

from ..channels import InitialEnsemble, LindbladModel
from ..config import RunConfig, load_model
from ..core.experiment import Experiment
from ..results import ExperimentResult, TrajectoryResult
from ..utils.logging import get_logger

logger = get_logger(__name__)


class ModelExperiment(Experiment):
    """An experiment driven by a ``RunConfig`` whose first step resolves the model."""

    default_model: str = "amplitude-damping"
    title: str = "Trajectory"

    config: RunConfig
    model: LindbladModel
    ensemble: InitialEnsemble

    def __init__(
        self,
        config: RunConfig,
        name: Optional[str] = None,
        result_class: Type[ExperimentResult] = TrajectoryResult,
    ):
        super().__init__(name=name, result_class=result_class)
        self.config = config
        self.add_context("output", config.output)
        self.add_context("title", self.title)

    @property
    def model_source(self):
        return self.config.model if self.config.model is not None else self.default_model

    def _load_model(self) -> str:
        self.model = load_model(self.model_source)
        self.ensemble = InitialEnsemble.basis_state(self.model.dim, self.config.initial_site)
        label = self.model.label or "model"
        return f"{label}: {self.model.dim} levels, {len(self.model.jumps)} jumps"

    def metadata(self, **extra: Any) -> Dict[str, Any]:
        source = self.model_source
        return {
            "command": self.name,
            "model": source if isinstance(source, str) else (source.label or "inline"),
            "initial_site": self.config.initial_site,
            **extra,
        }

    def publish(self, fields: List[str], rows: List[Dict[str, Any]], **extra: Any) -> str:
        self.add_context("fields", fields)
        self.add_context("rows", rows)
        self.add_context("metadata", self.metadata(**extra))
        return f"{len(rows)} rows"
