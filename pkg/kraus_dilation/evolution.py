"""Evolution engines.

Two discretizations of the same Lindblad dynamics live here:

* the operator-sum engine, which iterates a Kraus map and can expand the
  s-step map into explicit products ``M_{i1} ... M_{is}`` (pruned by norm and
  grouped when products differ only by a scalar), the form the dilation
  pipeline consumes;
* a direct explicit-Euler integrator of the Lindblad equation, used as the
  classical reference.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .channels import DensityMatrix, KrausSet, LindbladModel, apply_channel
from .core.exceptions import BadStep, DimensionMismatch
from .linalg import (
    HBAR_EV_FS,
    ComplexMatrix,
    dagger,
    frobenius_norm,
    identity,
    matrix_norm,
)
from .utils.common import NormKind
from .utils.logging import get_logger

logger = get_logger(__name__)

DEFAULT_NORM_THRESHOLD = 0.01
DEFAULT_GROUPING_TOL = 1e-9
# entries below this fraction of the largest magnitude count as zero in fingerprints
_PATTERN_RTOL = 1e-8


@dataclass(frozen=True)
class TermProduct:
    """A product of Kraus operators standing for a group of scalar multiples.

    The group contributes ``weight * T rho T^dagger`` with ``T`` the
    representative; ``word`` is one witness index sequence (leftmost factor
    applied last) and ``multiplicity`` the number of raw sequences merged in.
    """

    representative: ComplexMatrix
    weight: float
    word: Tuple[int, ...]
    multiplicity: int = 1

    def __post_init__(self) -> None:
        if not self.weight > 0:
            raise ValueError(f"term weight must be positive, got {self.weight}")

    @property
    def depth(self) -> int:
        return len(self.word)

    @property
    def dim(self) -> int:
        return self.representative.shape[0]

    @property
    def effective_norm(self) -> float:
        """Frobenius norm of ``sqrt(weight) * T``, the group's aggregate operator."""
        return math.sqrt(self.weight) * frobenius_norm(self.representative)


@dataclass(frozen=True)
class PruningPolicy:
    norm_threshold: float = DEFAULT_NORM_THRESHOLD
    grouping_tol: float = DEFAULT_GROUPING_TOL
    norm_kind: NormKind = NormKind.FROBENIUS

    def __post_init__(self) -> None:
        if self.norm_threshold < 0 or self.grouping_tol < 0:
            raise ValueError("pruning thresholds must be non-negative")
        object.__setattr__(self, "norm_kind", NormKind(self.norm_kind))


@dataclass(frozen=True)
class EnumerationSummary:
    grouped_terms: int
    raw_terms: int
    raw_terms_total: int
    total_weight: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grouped_terms": self.grouped_terms,
            "raw_terms": self.raw_terms,
            "raw_terms_total": self.raw_terms_total,
            "total_weight": self.total_weight,
        }


@dataclass
class _Group:
    representative: ComplexMatrix
    pivot: Tuple[int, int]
    weight: float
    word: Tuple[int, ...]
    multiplicity: int

    def freeze(self) -> TermProduct:
        return TermProduct(self.representative, self.weight, self.word, self.multiplicity)


@dataclass
class _GroupTable:
    """Groups candidates by zero pattern, then by scalar proportionality."""

    tolerance: float
    buckets: Dict[bytes, List[_Group]] = field(default_factory=lambda: defaultdict(list))
    order: List[_Group] = field(default_factory=list)

    @staticmethod
    def fingerprint(matrix: ComplexMatrix) -> bytes:
        magnitudes = np.abs(matrix)
        pattern = magnitudes > _PATTERN_RTOL * magnitudes.max()
        return np.packbits(pattern).tobytes()

    def add(self, matrix: ComplexMatrix, weight: float, word: Tuple[int, ...], multiplicity: int) -> None:
        key = self.fingerprint(matrix)
        for group in self.buckets[key]:
            scale = matrix[group.pivot] / group.representative[group.pivot]
            if frobenius_norm(matrix - scale * group.representative) <= self.tolerance:
                group.weight += weight * abs(scale) ** 2
                group.multiplicity += multiplicity
                return
        pivot = np.unravel_index(int(np.argmax(np.abs(matrix))), matrix.shape)
        group = _Group(matrix, (int(pivot[0]), int(pivot[1])), weight, word, multiplicity)
        self.buckets[key].append(group)
        self.order.append(group)


def identity_term(dim: int) -> TermProduct:
    """The depth-0 term ``I`` every expansion starts from."""
    return TermProduct(identity(dim), 1.0, ())


def extend_products(
    terms: Sequence[TermProduct], ks: KrausSet, policy: PruningPolicy
) -> List[TermProduct]:
    """Expand every term by one more Kraus factor on the left.

    A candidate ``M_j T`` is dropped when the norm of its aggregate operator
    ``sqrt(weight) * M_j T`` is at most the threshold; survivors proportional to
    an earlier survivor are merged into it with weight ``|c|^2``.
    """
    if terms and terms[0].dim != ks.dim:
        raise DimensionMismatch(
            "evolution", f"terms have dim {terms[0].dim}, Kraus set has dim {ks.dim}"
        )
    table = _GroupTable(policy.grouping_tol)
    dropped = 0
    for term in terms:
        root = math.sqrt(term.weight)
        for j, op in enumerate(ks.ops):
            product = op @ term.representative
            if root * matrix_norm(product, policy.norm_kind) <= policy.norm_threshold:
                dropped += 1
                continue
            table.add(product, term.weight, (j, *term.word), term.multiplicity)
    logger.debug(
        f"Level expanded to {len(table.order)} groups ({dropped} candidates pruned)"
    )
    return [group.freeze() for group in table.order]


def enumerate_products(
    ks: KrausSet, steps: int, policy: PruningPolicy | None = None
) -> List[TermProduct]:
    """Grouped, pruned terms of the ``steps``-fold operator sum."""
    if steps < 1:
        raise BadStep(f"steps must be at least 1, got {steps}")
    policy = policy or PruningPolicy()
    terms = [identity_term(ks.dim)]
    for level in range(1, steps + 1):
        terms = extend_products(terms, ks, policy)
        logger.debug(f"Depth {level}: {len(terms)} grouped terms")
    return terms


def enumeration_summary(terms: Sequence[TermProduct], kraus_count: int, steps: int) -> EnumerationSummary:
    return EnumerationSummary(
        grouped_terms=len(terms),
        raw_terms=sum(term.multiplicity for term in terms),
        raw_terms_total=kraus_count**steps,
        total_weight=float(sum(term.weight for term in terms)),
    )


def combine_terms(terms: Iterable[TermProduct], rho: DensityMatrix) -> ComplexMatrix:
    """``sum weight * T rho T^dagger`` over a term list."""
    out = np.zeros_like(rho.matrix)
    for term in terms:
        t = term.representative
        out += term.weight * (t @ rho.matrix @ dagger(t))
    return out


def terms_to_json(terms: Iterable[TermProduct]) -> List[Dict[str, Any]]:
    return [
        {
            "word": list(term.word),
            "weight": float(term.weight),
            "frobenius_norm": frobenius_norm(term.representative),
            "multiplicity": term.multiplicity,
        }
        for term in terms
    ]


def evolve_operator_sum(ks: KrausSet, rho0: DensityMatrix, steps: int) -> DensityMatrix:
    """Apply the channel ``steps`` times without any pruning."""
    if rho0.dim != ks.dim:
        raise DimensionMismatch(
            "evolution", f"Kraus set has dim {ks.dim}, density matrix has dim {rho0.dim}"
        )
    if steps < 0:
        raise BadStep(f"steps must be non-negative, got {steps}")
    rho = rho0
    for _ in range(steps):
        rho = apply_channel(ks, rho)
    return rho


def lindblad_generator(
    model: LindbladModel, rho: ComplexMatrix, hbar: float = HBAR_EV_FS
) -> ComplexMatrix:
    """Right-hand side of the Lindblad equation in fs^-1."""
    h = model.hamiltonian
    out = (-1j / hbar) * (h @ rho - rho @ h)
    for jump in model.jumps:
        if jump.rate == 0:
            continue
        op = jump.operator
        op_dag = dagger(op)
        squared = op_dag @ op
        out += jump.rate * (op @ rho @ op_dag - 0.5 * (squared @ rho + rho @ squared))
    return out


def euler_step_count(total_t: float, dt: float) -> int:
    """Number of steps of size ``dt`` covering ``total_t`` exactly.

    Raises:
        BadStep: If ``dt`` is not positive, ``total_t < dt`` or the ratio is
            not an integer up to rounding.
    """
    if not (math.isfinite(dt) and dt > 0):
        raise BadStep(f"dt must be positive, got {dt}")
    if not (math.isfinite(total_t) and total_t >= dt):
        raise BadStep(f"total_t = {total_t} must be at least dt = {dt}")
    ratio = total_t / dt
    steps = round(ratio)
    if abs(ratio - steps) > 1e-9 * max(1.0, ratio):
        raise BadStep(f"total_t / dt = {ratio!r} is not an integer")
    return steps


def evolve_lindblad_euler(
    model: LindbladModel,
    rho0: DensityMatrix,
    total_t: float,
    dt: float,
    hbar: float = HBAR_EV_FS,
) -> List[DensityMatrix]:
    """Explicit Euler trajectory of the Lindblad equation, ``rho0`` included."""
    if rho0.dim != model.dim:
        raise DimensionMismatch(
            "evolution", f"model has dim {model.dim}, density matrix has dim {rho0.dim}"
        )
    steps = euler_step_count(total_t, dt)
    trajectory = [rho0]
    rho = rho0.matrix
    for _ in range(steps):
        rho = rho + dt * lindblad_generator(model, rho, hbar)
        rho = 0.5 * (rho + dagger(rho))
        trajectory.append(DensityMatrix(rho, rho0.trace_tol, check_positive=False))
    logger.debug(f"Euler trajectory: {steps} steps of {dt} fs for '{model.label}'")
    return trajectory


def term_report(
    ks: KrausSet,
    steps: int,
    policy: PruningPolicy | None = None,
    reference_count: int | None = None,
) -> Dict[str, Any]:
    """Enumerate ``steps`` levels and describe the surviving terms as a JSON-ready dict."""
    policy = policy or PruningPolicy()
    terms = enumerate_products(ks, steps, policy)
    summary = enumeration_summary(terms, len(ks), steps)
    logger.info(
        f"{summary.grouped_terms} grouped terms ({summary.raw_terms} raw of "
        f"{summary.raw_terms_total}) at depth {steps}"
    )
    return {
        "steps": steps,
        "threshold": policy.norm_threshold,
        "norm_kind": str(policy.norm_kind),
        "kraus_count": len(ks),
        **summary.to_dict(),
        "reference_count": reference_count,
        "terms": terms_to_json(terms),
    }
