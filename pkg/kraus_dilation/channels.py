"""Kraus operator sets, Lindblad models and the dense channel semantics.

Units: Hamiltonians in eV, times in fs, rates in fs^-1. Jump operators are
dimensionless; rates are stored next to them rather than folded in, because the
Kraus construction needs ``rate * dt`` for every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .core.exceptions import (
    DimensionMismatch,
    InvalidModel,
    InvalidProbability,
    StepTooLarge,
)
from .linalg import (
    DEFAULT_TOL,
    HBAR_EV_FS,
    ComplexMatrix,
    ComplexVector,
    HermitianCheck,
    as_matrix,
    dagger,
    frobenius_norm,
    hermitian_propagator,
    identity,
    psd_sqrt,
    spectral_norm,
)
from .utils.logging import get_logger

logger = get_logger(__name__)

COMPLETENESS_TOL = 1e-9
CONTRACTION_TOL = 1e-9
ENSEMBLE_TOL = 1e-12


@dataclass(frozen=True)
class Jump:
    """One elementary process: a dimensionless operator and its rate in fs^-1."""

    operator: ComplexMatrix
    rate: float
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "operator", as_matrix(self.operator, module="channels"))
        if not math.isfinite(self.rate) or self.rate < 0:
            raise InvalidModel(f"jump '{self.label}' has invalid rate {self.rate}")


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus an ordered list of jump processes."""

    hamiltonian: ComplexMatrix
    jumps: Tuple[Jump, ...] = ()
    label: str = ""

    def __post_init__(self) -> None:
        hamiltonian = as_matrix(self.hamiltonian, module="channels")
        HermitianCheck(hamiltonian, DEFAULT_TOL).require("Hamiltonian")
        object.__setattr__(self, "hamiltonian", hamiltonian)
        object.__setattr__(self, "jumps", tuple(self.jumps))
        for jump in self.jumps:
            if jump.operator.shape != hamiltonian.shape:
                raise DimensionMismatch(
                    "channels",
                    f"jump '{jump.label}' has shape {jump.operator.shape}, "
                    f"Hamiltonian has {hamiltonian.shape}",
                )

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def rates(self) -> List[float]:
        return [jump.rate for jump in self.jumps]


@dataclass(frozen=True)
class KrausSet:
    """Ordered Kraus operators; index 0 is the completion operator ``M0``.

    ``dt`` is the step in fs the set encodes, or ``None`` for textbook channels
    that are not tied to a time step.
    """

    ops: Tuple[ComplexMatrix, ...]
    dt: Optional[float] = None
    labels: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.ops:
            raise InvalidModel("a Kraus set needs at least one operator")
        ops = tuple(as_matrix(op, module="channels") for op in self.ops)
        shape = ops[0].shape
        if any(op.shape != shape for op in ops):
            raise DimensionMismatch("channels", "Kraus operators differ in shape")
        object.__setattr__(self, "ops", ops)
        error = self.completeness_error()
        if error > COMPLETENESS_TOL:
            raise InvalidModel(
                f"Kraus set is not complete: |sum M^dagger M - I|_F = {error:.3e}",
                details={"completeness_error": error},
            )
        for k, op in enumerate(ops):
            norm = spectral_norm(op)
            if norm > 1 + CONTRACTION_TOL:
                raise InvalidModel(f"Kraus operator {k} has spectral norm {norm:.12f} > 1")

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def __len__(self) -> int:
        return len(self.ops)

    def completeness_error(self) -> float:
        total = sum(dagger(op) @ op for op in self.ops)
        return frobenius_norm(total - identity(self.dim))


@dataclass(frozen=True)
class DensityMatrix:
    """A density matrix with its validation tolerance.

    Positivity is checked unless ``check_positive`` is off: explicit Euler steps
    of a Lindblad equation are trace preserving but only approximately positive.
    """

    matrix: ComplexMatrix
    trace_tol: float = COMPLETENESS_TOL
    check_positive: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        matrix = as_matrix(self.matrix, module="channels")
        object.__setattr__(self, "matrix", matrix)
        HermitianCheck(matrix, self.trace_tol).require("density matrix")
        trace = complex(np.trace(matrix))
        if abs(trace - 1.0) > self.trace_tol:
            raise InvalidModel(f"density matrix has trace {trace:.12g}")
        if self.check_positive:
            smallest = float(scipy.linalg.eigvalsh(0.5 * (matrix + dagger(matrix)))[0])
            if smallest < -self.trace_tol:
                raise InvalidModel(f"density matrix has eigenvalue {smallest:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def populations(self) -> npt.NDArray[np.float64]:
        return np.real(np.diag(self.matrix)).copy()

    @classmethod
    def basis_state(cls, dim: int, index: int) -> "DensityMatrix":
        return pure_state_density(InitialEnsemble.basis_state(dim, index))


@dataclass(frozen=True)
class InitialEnsemble:
    """Pure-state decomposition ``rho = sum_i p_i |phi_i><phi_i|``."""

    components: Tuple[Tuple[float, ComplexVector], ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise InvalidModel("an ensemble needs at least one component")
        normalized = []
        dim = None
        for weight, vector in self.components:
            vec = np.asarray(vector, dtype=np.complex128).reshape(-1)
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise DimensionMismatch("channels", "ensemble vectors differ in length")
            if not 0.0 <= weight <= 1.0:
                raise InvalidProbability(f"ensemble weight {weight} outside [0, 1]")
            if abs(float(np.linalg.norm(vec)) - 1.0) > ENSEMBLE_TOL:
                raise InvalidModel("ensemble vectors must be normalized")
            normalized.append((float(weight), vec))
        total = sum(weight for weight, _ in normalized)
        if abs(total - 1.0) > ENSEMBLE_TOL:
            raise InvalidProbability(f"ensemble weights sum to {total!r}, not 1")
        object.__setattr__(self, "components", tuple(normalized))

    @property
    def dim(self) -> int:
        return self.components[0][1].shape[0]

    @classmethod
    def pure(cls, vector: npt.ArrayLike) -> "InitialEnsemble":
        return cls(((1.0, np.asarray(vector, dtype=np.complex128)),))

    @classmethod
    def basis_state(cls, dim: int, index: int) -> "InitialEnsemble":
        if not 0 <= index < dim:
            raise DimensionMismatch("channels", f"basis index {index} outside 0..{dim - 1}")
        vector = np.zeros(dim, dtype=np.complex128)
        vector[index] = 1.0
        return cls.pure(vector)


def _kraus_step_check(jump: Jump, dt: float) -> float:
    probability = jump.rate * dt * spectral_norm(jump.operator) ** 2
    if probability >= 1.0:
        raise StepTooLarge(
            f"jump '{jump.label}': rate*dt*|L|^2 = {probability:.6g} >= 1 at dt = {dt} fs",
            details={"jump": jump.label, "probability": probability, "dt": dt},
        )
    return probability


def kraus_from_lindblad(
    model: LindbladModel,
    dt: float,
    apply_coherent: bool = True,
    hbar: float = HBAR_EV_FS,
) -> KrausSet:
    """Kraus operators for one Euler step of length ``dt`` (fs).

    ``M_k = sqrt(rate_k * dt) * L_k`` for every jump, ``M0`` completes the set
    through ``psd_sqrt(I - sum M_k^dagger M_k)``, and with ``apply_coherent``
    every operator is left-multiplied by ``exp(-i H dt / hbar)``.

    Raises:
        StepTooLarge: If ``dt <= 0`` or a single jump already exhausts the step.
        NotPSD: If the jumps together exhaust the step.
    """
    if not dt > 0:
        raise StepTooLarge(f"time step must be positive, got {dt}")
    jump_ops = []
    for jump in model.jumps:
        _kraus_step_check(jump, dt)
        jump_ops.append(np.sqrt(jump.rate * dt) * jump.operator)

    defect = identity(model.dim) - sum(
        (dagger(op) @ op for op in jump_ops), np.zeros_like(model.hamiltonian)
    )
    completion = psd_sqrt(defect, tol=COMPLETENESS_TOL)
    ops = [completion, *jump_ops]

    if apply_coherent:
        coherent = hermitian_propagator(model.hamiltonian, dt, hbar)
        ops = [coherent @ op for op in ops]

    labels = ("M0", *(jump.label or f"M{k}" for k, jump in enumerate(model.jumps, 1)))
    logger.debug(f"Built {len(ops)} Kraus operators for '{model.label}' at dt = {dt} fs")
    return KrausSet(tuple(ops), dt=dt, labels=labels)


def coherent_channel(hamiltonian: ComplexMatrix, dt: float, hbar: float = HBAR_EV_FS) -> KrausSet:
    """Single-operator channel ``{exp(-i H dt / hbar)}``."""
    return KrausSet((hermitian_propagator(hamiltonian, dt, hbar),), dt=dt, labels=("U",))


def apply_channel(ks: KrausSet, rho: DensityMatrix) -> DensityMatrix:
    """``sum_k M_k rho M_k^dagger``."""
    if rho.dim != ks.dim:
        raise DimensionMismatch(
            "channels", f"Kraus set has dim {ks.dim}, density matrix has dim {rho.dim}"
        )
    out = np.zeros_like(rho.matrix)
    for op in ks.ops:
        out += op @ rho.matrix @ dagger(op)
    out = 0.5 * (out + dagger(out))
    return DensityMatrix(out, rho.trace_tol, check_positive=False)


def _check_probability(name: str, value: float) -> None:
    if not (math.isfinite(value) and 0.0 <= value < 1.0):
        raise InvalidProbability(f"{name} = {value} outside [0, 1)")


def damping_channel(p1: float, p2: float = 0.0, dt: Optional[float] = None) -> KrausSet:
    """Finite-temperature amplitude damping for one step.

    ``p1`` is the decay probability |1> -> |0>, ``p2`` the excitation
    probability |0> -> |1>; ``p2 = 0`` is zero-temperature amplitude damping.
    """
    _check_probability("p1", p1)
    _check_probability("p2", p2)
    if p1 + p2 >= 1.0:
        raise InvalidProbability(f"p1 + p2 = {p1 + p2} must be below 1")
    m0 = np.diag([np.sqrt(1.0 - p2), np.sqrt(1.0 - p1)]).astype(np.complex128)
    m1 = np.array([[0.0, np.sqrt(p1)], [0.0, 0.0]], dtype=np.complex128)
    m2 = np.array([[0.0, 0.0], [np.sqrt(p2), 0.0]], dtype=np.complex128)
    return KrausSet((m0, m1, m2), dt=dt, labels=("M0", "decay", "excitation"))


def amplitude_damping_channel(gamma: float, t: float) -> KrausSet:
    """Time-explicit amplitude damping over a total time ``t``."""
    if gamma < 0 or t < 0:
        raise InvalidProbability("gamma and t must be non-negative")
    survival = math.exp(-gamma * t)
    m0 = np.diag([1.0, np.sqrt(survival)]).astype(np.complex128)
    m1 = np.array([[0.0, np.sqrt(1.0 - survival)], [0.0, 0.0]], dtype=np.complex128)
    return KrausSet((m0, m1), dt=t, labels=("M0", "decay"))


def naive_finite_temperature_channel(gamma1: float, gamma2: float, t: float) -> KrausSet:
    """Finite-temperature damping written with the same naive time dependence.

    The set is complete, but its long-time ground population tends to
    ``rho11(0)`` instead of ``gamma1 / (gamma1 + gamma2)``.
    """
    if gamma1 < 0 or gamma2 < 0 or t < 0:
        raise InvalidProbability("rates and t must be non-negative")
    decay = math.exp(-gamma1 * t)
    excite = math.exp(-gamma2 * t)
    m0 = np.diag([np.sqrt(excite), np.sqrt(decay)]).astype(np.complex128)
    m1 = np.array([[0.0, np.sqrt(1.0 - decay)], [0.0, 0.0]], dtype=np.complex128)
    m2 = np.array([[0.0, 0.0], [np.sqrt(1.0 - excite), 0.0]], dtype=np.complex128)
    return KrausSet((m0, m1, m2), dt=t, labels=("M0", "decay", "excitation"))


def finite_temperature_ground_population(
    gamma1: float, gamma2: float, t: float, rho00: float
) -> float:
    """Closed-form ground population of the finite-temperature damping model."""
    total = gamma1 + gamma2
    if total == 0:
        return rho00
    decay = math.exp(-total * t)
    return decay * rho00 + gamma1 / total * (1.0 - decay)


def iterated_ground_population(p1: float, p2: float, steps: int, rho00: float) -> float:
    """Ground population after ``steps`` applications of ``damping_channel(p1, p2)``."""
    total = p1 + p2
    if total == 0:
        return rho00
    survival = (1.0 - total) ** steps
    return survival * rho00 + p1 / total * (1.0 - survival)


def pure_state_density(ensemble: InitialEnsemble) -> DensityMatrix:
    """``sum_i p_i |phi_i><phi_i|``."""
    matrix = np.zeros((ensemble.dim, ensemble.dim), dtype=np.complex128)
    for weight, vector in ensemble.components:
        matrix += weight * np.outer(vector, vector.conj())
    return DensityMatrix(matrix)


def ensemble_from_density(rho: DensityMatrix, cutoff: float = ENSEMBLE_TOL) -> InitialEnsemble:
    """Decompose ``rho`` into its eigen-ensemble, dropping weights below ``cutoff``."""
    eigvals, eigvecs = scipy.linalg.eigh(0.5 * (rho.matrix + dagger(rho.matrix)))
    kept = [(float(w), eigvecs[:, i]) for i, w in enumerate(eigvals) if w > cutoff]
    total = sum(w for w, _ in kept)
    components = [(w / total, v / np.linalg.norm(v)) for w, v in reversed(kept)]
    return InitialEnsemble(tuple(components))
