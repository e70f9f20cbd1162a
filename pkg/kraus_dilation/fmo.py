"""Five-level functional subsystem of the FMO light-harvesting complex.

Levels: 0 ground, 1..3 chromophores, 4 sink. The model carries seven jump
processes in a fixed order (three dephasing, three dissipation, one sink) and
is evolved on a staggered schedule of five measurement groups so that thirty
evenly spaced time points are covered with six steps each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .channels import (
    DensityMatrix,
    InitialEnsemble,
    Jump,
    KrausSet,
    LindbladModel,
    kraus_from_lindblad,
)
from .core.exceptions import InvalidModel
from .evolution import (
    PruningPolicy,
    evolve_lindblad_euler,
    extend_products,
    identity_term,
    term_report,
)
from .linalg import FS_PER_AU, ComplexMatrix, HermitianCheck, as_matrix
from .measurement import (
    DEFAULT_SHOTS,
    estimate_diagonal,
    estimate_expectation,
    shift_observable,
)
from .utils.common import EstimationMode, NormKind, derive_seed
from .utils.logging import get_logger

logger = get_logger(__name__)

FMO_DIM = 5
FMO_REFERENCE_TERM_COUNT = 679
SCHEDULE_BASE_AU = 400.0
SCHEDULE_STEP_AU = 2000.0
SCHEDULE_GROUPS = 5
SCHEDULE_STEPS = 6
DEFAULT_REFERENCE_DT = 0.25


def default_hamiltonian() -> ComplexMatrix:
    """Site energies and couplings in eV."""
    h = np.zeros((FMO_DIM, FMO_DIM), dtype=np.complex128)
    h[1, 1] = 0.0267
    h[2, 2] = 0.0273
    h[1, 2] = h[2, 1] = -0.0129
    h[1, 3] = h[3, 1] = 0.000632
    h[2, 3] = h[3, 2] = 0.00404
    return h


@dataclass(frozen=True)
class FmoParams:
    hamiltonian: ComplexMatrix = field(default_factory=default_hamiltonian)
    alpha: float = 3.00e-3
    beta: float = 5.00e-7
    gamma: float = 6.28e-3
    dt_fs: float = 48.4

    def __post_init__(self) -> None:
        h = as_matrix(self.hamiltonian, module="fmo")
        if h.shape != (FMO_DIM, FMO_DIM):
            raise InvalidModel(f"FMO Hamiltonian must be 5x5, got {h.shape}", module="fmo")
        HermitianCheck(h).require("FMO Hamiltonian")
        if np.any(np.abs(h.imag) > 0):
            raise InvalidModel("FMO Hamiltonian must be real", module="fmo")
        if np.any(h[[0, 4], :] != 0) or np.any(h[:, [0, 4]] != 0):
            raise InvalidModel("ground and sink must be uncoupled in H", module="fmo")
        for name in ("alpha", "beta", "gamma", "dt_fs"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidModel(f"{name} must be non-negative, got {value}", module="fmo")
        object.__setattr__(self, "hamiltonian", h)


@dataclass(frozen=True)
class ScheduleGroup:
    """Six evaluation times of one measurement group, in fs."""

    index: int
    offsets: Tuple[float, ...]
    first_dt: float
    later_dt: float

    def __post_init__(self) -> None:
        if not math.isclose(self.offsets[0], self.first_dt, rel_tol=1e-12):
            raise ValueError("first offset must equal first_dt")
        for earlier, later in zip(self.offsets, self.offsets[1:]):
            if not math.isclose(later - earlier, self.later_dt, rel_tol=1e-9):
                raise ValueError("offsets must be spaced by later_dt")

    def step_dt(self, step: int) -> float:
        return self.first_dt if step == 0 else self.later_dt


def _projector(i: int, j: int) -> ComplexMatrix:
    op = np.zeros((FMO_DIM, FMO_DIM), dtype=np.complex128)
    op[i, j] = 1.0
    return op


def build_fmo_model(params: Optional[FmoParams] = None) -> LindbladModel:
    params = params or FmoParams()
    jumps = [Jump(_projector(i, i), params.alpha, f"dephasing{i}") for i in (1, 2, 3)]
    jumps += [Jump(_projector(0, i), params.beta, f"dissipation{i}") for i in (1, 2, 3)]
    jumps.append(Jump(_projector(4, 3), params.gamma, "sink"))
    return LindbladModel(params.hamiltonian, tuple(jumps), label="fmo")


def fmo_params_from_model(model: LindbladModel, dt_fs: Optional[float] = None) -> FmoParams:
    """Recover ``FmoParams`` from a model with the FMO jump layout.

    Raises:
        InvalidModel: If the model is not 5-level or its jumps differ from
            the dephasing, dissipation and sink layout of ``build_fmo_model``.
    """
    if model.dim != FMO_DIM or len(model.jumps) != 7:
        raise InvalidModel(
            f"FMO run needs a 5-level model with 7 jumps, got {model.dim} levels "
            f"and {len(model.jumps)} jumps",
            module="fmo",
        )
    rates = model.rates
    params = FmoParams(
        hamiltonian=model.hamiltonian,
        alpha=rates[0],
        beta=rates[3],
        gamma=rates[6],
        **({} if dt_fs is None else {"dt_fs": dt_fs}),
    )
    expected = build_fmo_model(params)
    for jump, reference in zip(model.jumps, expected.jumps):
        if jump.rate != reference.rate or not np.allclose(jump.operator, reference.operator):
            raise InvalidModel(
                f"jump '{jump.label}' does not match the FMO layout (expected {reference.label})",
                module="fmo",
            )
    return params


def fmo_schedule() -> List[ScheduleGroup]:
    later_dt = SCHEDULE_STEP_AU * FS_PER_AU
    groups = []
    for g in range(1, SCHEDULE_GROUPS + 1):
        first_au = g * SCHEDULE_BASE_AU
        offsets = tuple(
            (first_au + k * SCHEDULE_STEP_AU) * FS_PER_AU for k in range(SCHEDULE_STEPS)
        )
        groups.append(ScheduleGroup(g, offsets, first_au * FS_PER_AU, later_dt))
    return groups


def reference_step(base_fs: float, reference_dt: float) -> Tuple[float, int]:
    """Largest step ``<= reference_dt`` that divides ``base_fs`` evenly."""
    if not reference_dt > 0:
        raise ValueError(f"reference_dt must be positive, got {reference_dt}")
    substeps = math.ceil(base_fs / reference_dt - 1e-9)
    return base_fs / substeps, substeps


def _fmo_fields() -> List[str]:
    return [
        "t_fs",
        *(f"pop{i}" for i in range(FMO_DIM)),
        *(f"pop_ref{i}" for i in range(FMO_DIM)),
        "energy_ev",
        "energy_ref_ev",
        "n_terms",
        "mode",
        "seed",
    ]


FMO_FIELDS = _fmo_fields()


def run_fmo_experiment(
    params: Optional[FmoParams] = None,
    initial_site: int = 1,
    shots: int = DEFAULT_SHOTS,
    threshold: float = 0.01,
    seed: int = 0,
    mode: EstimationMode | str = EstimationMode.EXACT,
    include_initial: bool = False,
    reference_dt: float = DEFAULT_REFERENCE_DT,
    norm_kind: NormKind | str = NormKind.FROBENIUS,
) -> List[Dict[str, Any]]:
    """Run the scheduled dilation pipeline next to a fine Euler reference.

    Returns one row per scheduled time (plus ``t = 0`` with
    ``include_initial``), sorted by time, keyed by ``FMO_FIELDS``.
    """
    if initial_site not in (1, 2, 3):
        raise InvalidModel(f"initial_site must be 1, 2 or 3, got {initial_site}", module="fmo")
    params = params or FmoParams()
    mode = EstimationMode(mode)
    model = build_fmo_model(params)
    ensemble = InitialEnsemble.basis_state(FMO_DIM, initial_site)
    rho0 = DensityMatrix.basis_state(FMO_DIM, initial_site)
    energy = shift_observable(params.hamiltonian)
    policy = PruningPolicy(threshold, norm_kind=norm_kind)

    base_fs = SCHEDULE_BASE_AU * FS_PER_AU
    total_points = SCHEDULE_GROUPS * SCHEDULE_STEPS
    dt_ref, substeps = reference_step(base_fs, reference_dt)
    logger.info(f"Euler reference: {total_points * substeps} steps of {dt_ref:.6f} fs")
    trajectory = evolve_lindblad_euler(model, rho0, total_points * base_fs, dt_ref)

    def reference_at(point: int) -> Dict[str, Any]:
        rho = trajectory[point * substeps]
        populations = rho.populations()
        return {
            **{f"pop_ref{i}": float(populations[i]) for i in range(FMO_DIM)},
            "energy_ref_ev": float(np.trace(params.hamiltonian @ rho.matrix).real),
        }

    def row(point: int, terms, estimate_seed: int) -> Dict[str, Any]:
        populations = estimate_diagonal(terms, ensemble, shots, estimate_seed, mode)
        expectation = estimate_expectation(energy, terms, ensemble, shots, estimate_seed, mode)
        return {
            "t_fs": point * base_fs,
            **{f"pop{i}": float(populations[i]) for i in range(FMO_DIM)},
            **reference_at(point),
            "energy_ev": float(expectation),
            "n_terms": len(terms),
            "mode": str(mode),
            "seed": seed,
        }

    rows = []
    if include_initial:
        rows.append(row(0, [identity_term(FMO_DIM)], derive_seed(seed, 0, 0)))

    for group in fmo_schedule():
        kraus_sets: Dict[float, KrausSet] = {}
        terms = [identity_term(FMO_DIM)]
        for step, offset in enumerate(group.offsets):
            dt = group.step_dt(step)
            if dt not in kraus_sets:
                kraus_sets[dt] = kraus_from_lindblad(model, dt)
            terms = extend_products(terms, kraus_sets[dt], policy)
            point = group.index + SCHEDULE_GROUPS * step
            logger.info(
                f"Group {group.index} step {step + 1}: t = {offset:.2f} fs, {len(terms)} terms"
            )
            rows.append(row(point, terms, derive_seed(seed, group.index, step + 1)))

    rows.sort(key=lambda r: r["t_fs"])
    return rows


def fmo_term_report(
    params: Optional[FmoParams] = None,
    steps: int = SCHEDULE_STEPS,
    threshold: float = 0.01,
    norm_kind: NormKind | str = NormKind.FROBENIUS,
) -> Dict[str, Any]:
    """Term counts of the ``steps``-fold FMO channel at ``params.dt_fs``."""
    params = params or FmoParams()
    ks = kraus_from_lindblad(build_fmo_model(params), params.dt_fs)
    policy = PruningPolicy(threshold, norm_kind=norm_kind)
    return term_report(ks, steps, policy, reference_count=FMO_REFERENCE_TERM_COUNT)
