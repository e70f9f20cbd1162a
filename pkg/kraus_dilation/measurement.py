"""Statevector application of dilated unitaries and projective readout.

Every estimator here works term by term: a ``TermProduct`` is dilated, applied
to each embedded ensemble member and read out either exactly (squared
amplitudes) or through simulated shots. Per-term contributions are computed in
parallel and then summed in term order, so results never depend on the worker
count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Sequence, Union

import numpy as np
import numpy.typing as npt

from .channels import InitialEnsemble
from .core.exceptions import DimensionMismatch, NotNormalized, ZeroObservable
from .dilation import DilatedUnitary, dilate, embed_state
from .evolution import TermProduct
from .linalg import (
    DEFAULT_TOL,
    ComplexMatrix,
    ComplexVector,
    HermitianCheck,
    as_matrix,
    cholesky_psd,
    dagger,
    identity,
    spectral_norm,
)
from .utils.common import EstimationMode, derive_seed, parallel_map
from .utils.logging import get_logger

logger = get_logger(__name__)

DEFAULT_SHOTS = 9216
STATE_NORM_TOL = 1e-12
SAMPLING_NORM_TOL = 1e-8

# seed streams, so populations and expectations never share draws
_DIAGONAL_STREAM = 0
_EXPECTATION_STREAM = 1


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome counts of ``shots`` projective measurements in the computational basis."""

    counts: Mapping[int, int]
    shots: int
    seed: int
    dim: int

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not add up to the number of shots")
        if any(not 0 <= outcome < self.dim for outcome in self.counts):
            raise ValueError(f"outcome index outside 0..{self.dim - 1}")

    def frequencies(self) -> npt.NDArray[np.float64]:
        out = np.zeros(self.dim)
        for outcome, count in self.counts.items():
            out[outcome] = count / self.shots
        return out

    def subspace_probability(self, n: int) -> float:
        """Fraction of shots that landed on outcomes ``0..n-1``."""
        hits = sum(count for outcome, count in self.counts.items() if outcome < n)
        return hits / self.shots

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "shots": self.shots,
            "counts": {str(k): self.counts[k] for k in sorted(self.counts)},
        }


@dataclass(frozen=True)
class ObservableSpec:
    """A Hermitian observable shifted into ``[0, 1]`` and factored.

    ``shifted = (A + |A| I) / (2 |A|)`` and ``factor @ factor^dagger == shifted``;
    ``|A|`` is the spectral norm.
    """

    matrix: ComplexMatrix
    norm: float
    shifted: ComplexMatrix = field(repr=False)
    factor: ComplexMatrix = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def recover(self, shifted_mean: float) -> float:
        """Map ``<A~>`` back to ``<A>``."""
        return 2.0 * self.norm * shifted_mean - self.norm


EstimationModeLike = Union[EstimationMode, str]


def simulate_exact(unitary: DilatedUnitary, state: npt.ArrayLike) -> ComplexVector:
    """``U @ v`` for an embedded, normalized state."""
    vector = np.asarray(state, dtype=np.complex128).reshape(-1)
    if vector.shape[0] != unitary.dim:
        raise DimensionMismatch(
            "measurement",
            f"unitary has dim {unitary.dim}, state has dim {vector.shape[0]}",
        )
    norm = float(np.linalg.norm(vector))
    if abs(norm - 1.0) > STATE_NORM_TOL:
        raise NotNormalized("measurement", f"state norm is {norm!r}, expected 1")
    return unitary.matrix @ vector


def sample_counts(state: npt.ArrayLike, shots: int, seed: int) -> MeasurementRecord:
    """Draw ``shots`` outcomes from ``|state_i|^2`` with a Philox generator.

    Raises:
        NotNormalized: If the probabilities do not sum to 1 within ``1e-8``.
    """
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    probabilities = np.abs(np.asarray(state, dtype=np.complex128).reshape(-1)) ** 2
    total = float(probabilities.sum())
    if abs(total - 1.0) > SAMPLING_NORM_TOL:
        raise NotNormalized(
            "measurement", f"outcome probabilities sum to {total!r}, expected 1"
        )
    generator = np.random.Generator(np.random.Philox(seed))
    drawn = generator.multinomial(shots, probabilities / total)
    counts = {int(k): int(c) for k, c in enumerate(drawn) if c}
    return MeasurementRecord(counts, shots, seed, probabilities.shape[0])


def _check_terms(terms: Sequence[TermProduct], ensemble: InitialEnsemble) -> int:
    n = ensemble.dim
    for term in terms:
        if term.dim != n:
            raise DimensionMismatch(
                "measurement", f"term has dim {term.dim}, ensemble has dim {n}"
            )
    return n


def _sum_in_order(parts: List[npt.NDArray[np.float64]], n: int) -> npt.NDArray[np.float64]:
    total = np.zeros(n)
    for part in parts:
        total = total + part
    return total


def estimate_diagonal(
    terms: Sequence[TermProduct],
    ensemble: InitialEnsemble,
    shots_per_term: int = DEFAULT_SHOTS,
    seed: int = 0,
    mode: EstimationModeLike = EstimationMode.EXACT,
) -> npt.NDArray[np.float64]:
    """Populations of ``sum weight * T rho T^dagger`` read out through dilations."""
    mode = EstimationMode(mode)
    n = _check_terms(terms, ensemble)

    def contribution(item) -> npt.NDArray[np.float64]:
        index, term = item
        unitary = dilate(term.representative)
        weight = term.weight * unitary.scale**2
        out = np.zeros(n)
        for member, (probability, vector) in enumerate(ensemble.components):
            state = simulate_exact(unitary, embed_state(vector))
            if mode is EstimationMode.EXACT:
                readout = np.abs(state[:n]) ** 2
            else:
                member_seed = derive_seed(seed, _DIAGONAL_STREAM, index, member)
                readout = sample_counts(state, shots_per_term, member_seed).frequencies()[:n]
            out = out + probability * weight * readout
        return out

    parts = parallel_map(contribution, list(enumerate(terms)))
    logger.debug(f"Estimated diagonal from {len(terms)} terms ({mode} mode)")
    return _sum_in_order(parts, n)


def shift_observable(a: npt.ArrayLike) -> ObservableSpec:
    """Shift and factor a Hermitian observable for projective estimation.

    Raises:
        NotHermitian: If ``A`` is not Hermitian within ``1e-10``.
        ZeroObservable: If ``A`` is the zero matrix.
    """
    matrix = as_matrix(a, module="measurement")
    HermitianCheck(matrix, DEFAULT_TOL).require("observable")
    matrix = 0.5 * (matrix + dagger(matrix))
    norm = spectral_norm(matrix)
    if norm == 0.0:
        raise ZeroObservable("observable has zero norm; nothing to estimate")
    shifted = (matrix + norm * identity(matrix.shape[0])) / (2.0 * norm)
    shifted = 0.5 * (shifted + dagger(shifted))
    factor = cholesky_psd(shifted)
    return ObservableSpec(matrix, norm, shifted, factor)


def estimate_expectation(
    spec: ObservableSpec,
    terms: Sequence[TermProduct],
    ensemble: InitialEnsemble,
    shots_per_term: int = DEFAULT_SHOTS,
    seed: int = 0,
    mode: EstimationModeLike = EstimationMode.EXACT,
) -> float:
    """``<A>`` from first-half projection probabilities of dilated ``L^dagger T``."""
    mode = EstimationMode(mode)
    n = _check_terms(terms, ensemble)
    if spec.dim != n:
        raise DimensionMismatch(
            "measurement", f"observable has dim {spec.dim}, ensemble has dim {n}"
        )
    factor_h = dagger(spec.factor)

    def contribution(item) -> float:
        index, term = item
        unitary = dilate(factor_h @ term.representative)
        weight = term.weight * unitary.scale**2
        out = 0.0
        for member, (probability, vector) in enumerate(ensemble.components):
            state = simulate_exact(unitary, embed_state(vector))
            if mode is EstimationMode.EXACT:
                hit = float(np.sum(np.abs(state[:n]) ** 2))
            else:
                member_seed = derive_seed(seed, _EXPECTATION_STREAM, index, member)
                hit = sample_counts(state, shots_per_term, member_seed).subspace_probability(n)
            out += probability * weight * hit
        return out

    parts = parallel_map(contribution, list(enumerate(terms)))
    shifted_mean = 0.0
    for part in parts:
        shifted_mean += part
    return spec.recover(shifted_mean)


def shots_for_error(sigma: float, sigma_mean: float) -> int:
    """Shots needed for a standard error of the mean of ``sigma_mean``."""
    if sigma < 0 or sigma_mean <= 0:
        raise ValueError("sigma must be non-negative and sigma_mean positive")
    return max(1, math.ceil((sigma / sigma_mean) ** 2))


def standard_error(probability: float, shots: int) -> float:
    if not 0.0 <= probability <= 1.0 or shots < 1:
        raise ValueError("probability must be in [0, 1] and shots positive")
    return math.sqrt(probability * (1.0 - probability) / shots)
