"""Model and run configuration: pydantic schemas, presets and file loading."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from .channels import Jump, LindbladModel
from .core.exceptions import ConfigInvalid, ModelNotFound
from .fmo import FmoParams, build_fmo_model
from .linalg import FS_PER_AU, ComplexMatrix
from .measurement import DEFAULT_SHOTS
from .utils.common import EstimationMode, NormKind
from .utils.logging import get_logger

logger = get_logger(__name__)

MatrixEntry = Union[float, Tuple[float, float]]
MatrixRows = List[List[MatrixEntry]]

_matrix_adapter: TypeAdapter[MatrixRows] = TypeAdapter(MatrixRows)


def to_complex_matrix(rows: MatrixRows) -> ComplexMatrix:
    """Build a complex matrix from rows of numbers or ``[re, im]`` pairs."""
    return np.array(
        [[complex(*entry) if isinstance(entry, tuple) else complex(entry) for entry in row] for row in rows],
        dtype=np.complex128,
    )


def _square_rows(rows: MatrixRows, dim: int, what: str) -> None:
    if len(rows) != dim or any(len(row) != dim for row in rows):
        raise ValueError(f"{what} must be {dim}x{dim}")


class JumpSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    op: MatrixRows
    rate_per_fs: float = Field(ge=0)
    label: str = ""


class LindbladModelSpec(BaseModel):
    """JSON/YAML schema of a Lindblad model (H in eV, rates in fs^-1)."""

    model_config = ConfigDict(extra="forbid")

    dim: int = Field(ge=1)
    hamiltonian_ev: MatrixRows
    jumps: List[JumpSpec] = Field(default_factory=list)
    label: str = ""

    @model_validator(mode="after")
    def _check_shapes(self) -> "LindbladModelSpec":
        _square_rows(self.hamiltonian_ev, self.dim, "hamiltonian_ev")
        for k, jump in enumerate(self.jumps):
            _square_rows(jump.op, self.dim, f"jumps[{k}].op")
        return self

    def to_model(self) -> LindbladModel:
        jumps = tuple(
            Jump(to_complex_matrix(jump.op), jump.rate_per_fs, jump.label or f"L{k}")
            for k, jump in enumerate(self.jumps, 1)
        )
        return LindbladModel(to_complex_matrix(self.hamiltonian_ev), jumps, self.label)


CommandName = Literal["evolve", "reference", "fmo", "terms", "expectation", "damping"]


class RunConfig(BaseModel):
    """Options of one CLI invocation; a config file supplies defaults for flags."""

    model_config = ConfigDict(extra="forbid")

    model: Optional[Union[str, LindbladModelSpec]] = None
    command: Optional[CommandName] = None
    dt_fs: Optional[float] = Field(default=None, gt=0)
    dt_au: Optional[float] = Field(default=None, gt=0)
    total_t_fs: Optional[float] = Field(default=None, gt=0)
    steps: Optional[int] = Field(default=None, ge=0)
    shots: int = Field(default=DEFAULT_SHOTS, gt=0)
    threshold: float = Field(default=0.01, ge=0)
    norm_kind: NormKind = NormKind.FROBENIUS
    seed: int = Field(default=0, ge=0)
    mode: EstimationMode = EstimationMode.EXACT
    initial_site: int = Field(default=1, ge=0)
    observable: str = "energy"
    output: Optional[Path] = None

    @model_validator(mode="after")
    def _single_step_unit(self) -> "RunConfig":
        if self.dt_fs is not None and self.dt_au is not None:
            raise ValueError("give at most one of dt_fs and dt_au")
        return self

    def resolved_dt_fs(self) -> Optional[float]:
        if self.dt_au is not None:
            return self.dt_au * FS_PER_AU
        return self.dt_fs


@dataclass(frozen=True)
class Preset:
    factory: Callable[[], LindbladModel]
    dt_fs: float
    description: str


def _amplitude_damping() -> LindbladModel:
    decay = np.array([[0, 1], [0, 0]], dtype=np.complex128)
    return LindbladModel(np.zeros((2, 2)), (Jump(decay, 1.52e-2, "decay"),), "amplitude-damping")


def _finite_temperature_damping() -> LindbladModel:
    decay = np.array([[0, 1], [0, 0]], dtype=np.complex128)
    excite = np.array([[0, 0], [1, 0]], dtype=np.complex128)
    return LindbladModel(
        np.zeros((2, 2)),
        (Jump(decay, 1.52e-2, "decay"), Jump(excite, 0.5e-2, "excitation")),
        "finite-temperature-damping",
    )


PRESETS: Dict[str, Preset] = {
    "fmo-default": Preset(
        lambda: build_fmo_model(FmoParams()),
        FmoParams().dt_fs,
        "5-level FMO subsystem: 3 chromophores, ground and sink",
    ),
    "amplitude-damping": Preset(
        _amplitude_damping, 10.0, "two levels, decay |1> -> |0> at 1.52e-2 fs^-1"
    ),
    "finite-temperature-damping": Preset(
        _finite_temperature_damping, 10.0, "two levels, decay and thermal excitation"
    ),
}


def config_invalid_from(error: ValidationError, source: str) -> ConfigInvalid:
    problems = "; ".join(
        f"{'.'.join(str(p) for p in item['loc']) or '<root>'}: {item['msg']}"
        for item in error.errors()
    )
    return ConfigInvalid(
        f"invalid configuration in {source}: {problems}",
        details={"errors": [item["msg"] for item in error.errors()]},
    )


def load_mapping(path: Union[str, Path], missing: type = ConfigInvalid) -> Any:
    """Read a YAML or JSON file.

    Raises:
        ConfigInvalid: For unsupported suffixes or unparsable content.
        ``missing``: If the file does not exist.
    """
    path = Path(path)
    if not path.is_file():
        raise missing(f"file not found: {path}")
    try:
        with open(path) as f:
            if path.suffix in [".yaml", ".yml"]:
                return yaml.safe_load(f)
            if path.suffix == ".json":
                return json.load(f)
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise ConfigInvalid(f"cannot parse {path}: {e}")
    raise ConfigInvalid(f"unsupported config file format: {path.suffix or '<none>'}")


def load_matrix(path: Union[str, Path]) -> ComplexMatrix:
    """A square matrix stored as rows of numbers or ``[re, im]`` pairs."""
    raw = load_mapping(path, missing=ModelNotFound)
    try:
        rows = _matrix_adapter.validate_python(raw)
    except ValidationError as e:
        raise config_invalid_from(e, str(path))
    return to_complex_matrix(rows)


def load_model_spec(path: Union[str, Path]) -> LindbladModelSpec:
    raw = load_mapping(path, missing=ModelNotFound)
    try:
        return LindbladModelSpec.model_validate(raw)
    except ValidationError as e:
        raise config_invalid_from(e, str(path))


def load_model(source: Union[str, Path, LindbladModelSpec]) -> LindbladModel:
    """Resolve a preset name, model file or inline spec into a ``LindbladModel``.

    Raises:
        ModelNotFound: For an unknown preset or a missing file.
    """
    if isinstance(source, LindbladModelSpec):
        return source.to_model()
    name = str(source)
    if name in PRESETS:
        logger.debug(f"Using preset model '{name}'")
        return PRESETS[name].factory()
    path = Path(name)
    if not path.suffix:
        raise ModelNotFound(
            f"unknown preset '{name}' (available: {', '.join(sorted(PRESETS))})"
        )
    return load_model_spec(path).to_model()


def default_dt_fs(source: Union[str, Path, LindbladModelSpec, None]) -> Optional[float]:
    """The step a preset is tuned for, ``None`` for files and inline specs."""
    if isinstance(source, str) and source in PRESETS:
        return PRESETS[source].dt_fs
    return None


def load_run_config(path: Union[str, Path]) -> RunConfig:
    raw = load_mapping(path)
    if raw is None:
        raw = {}
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise config_invalid_from(e, str(path))
