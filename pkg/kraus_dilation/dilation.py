"""Unitary 1-dilations of contraction matrices.

A contraction ``M`` on ``n`` levels becomes the ``2n``-level unitary

    U = [[M,   D_{M^dagger}],
         [D_M, -M^dagger   ]]

with defect operators ``D_M = sqrt(I - M^dagger M)``. Applying ``U`` to
``(v, 0)`` leaves ``M v`` in the first half of the output, which is what the
measurement layer reads out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .core.exceptions import NotContraction, NotNormalized
from .linalg import ComplexMatrix, ComplexVector, as_matrix, dagger, identity, psd_sqrt
from .utils.logging import get_logger

logger = get_logger(__name__)

CONTRACTION_TOL = 1e-9
UNITARITY_TOL = 1e-9
EMBED_NORM_TOL = 1e-12


@dataclass(frozen=True)
class DilatedUnitary:
    """A ``2n x 2n`` unitary whose top-left block is the (possibly rescaled) source.

    ``scale`` is the factor the source was divided by before dilation; a
    probability read from this unitary stands for ``scale**2`` times that
    probability for the source itself.
    """

    matrix: ComplexMatrix
    base_dim: int
    source_norm_check: float
    scale: float = 1.0

    @property
    def dim(self) -> int:
        return 2 * self.base_dim

    @property
    def block(self) -> ComplexMatrix:
        return self.matrix[: self.base_dim, : self.base_dim]

    def unitarity_error(self) -> float:
        return float(
            np.linalg.norm(dagger(self.matrix) @ self.matrix - identity(self.dim), "fro")
        )


def _checked_norm(m: ComplexMatrix) -> float:
    norm = float(scipy.linalg.svdvals(m)[0])
    if norm > 1.0 + CONTRACTION_TOL:
        raise NotContraction(
            f"spectral norm {norm:.12f} exceeds 1 + {CONTRACTION_TOL:g}",
            details={"spectral_norm": norm},
        )
    return norm


def defect_operator(m: npt.ArrayLike) -> ComplexMatrix:
    """``sqrt(I - M^dagger M)`` for a contraction ``M``.

    Raises:
        NotContraction: If the spectral norm of ``M`` exceeds ``1 + 1e-9``.
    """
    matrix = as_matrix(m, module="dilation")
    _checked_norm(matrix)
    gram = identity(matrix.shape[0]) - dagger(matrix) @ matrix
    return psd_sqrt(0.5 * (gram + dagger(gram)), tol=CONTRACTION_TOL)


def dilate(m: npt.ArrayLike) -> DilatedUnitary:
    """Build the 1-dilation of a contraction.

    Both defect operators come from a single SVD ``M = W S V^dagger``:
    ``D_M = V sqrt(I - S^2) V^dagger`` and ``D_{M^dagger} = W sqrt(I - S^2) W^dagger``,
    which keeps the intertwining ``M D_M = D_{M^dagger} M`` exact up to rounding.
    Sources with norm in ``(1, 1 + 1e-9]`` are divided by their norm first.
    """
    matrix = as_matrix(m, module="dilation")
    norm = _checked_norm(matrix)
    scale = 1.0
    if norm > 1.0:
        scale = norm
        matrix = matrix / norm
        logger.warning(f"Rescaled contraction with norm {norm!r} before dilation")

    n = matrix.shape[0]
    left, singular, right_h = scipy.linalg.svd(matrix)
    right = dagger(right_h)
    defect_values = np.sqrt(np.clip(1.0 - singular**2, 0.0, None))
    defect = (right * defect_values) @ right_h
    defect_adjoint = (left * defect_values) @ dagger(left)

    unitary = np.empty((2 * n, 2 * n), dtype=np.complex128)
    unitary[:n, :n] = matrix
    unitary[:n, n:] = defect_adjoint
    unitary[n:, :n] = defect
    unitary[n:, n:] = -dagger(matrix)
    return DilatedUnitary(unitary, n, norm, scale)


def embed_state(v: npt.ArrayLike) -> ComplexVector:
    """Pad a normalized ``n``-vector with ``n`` zeros.

    Raises:
        NotNormalized: If ``|v|`` differs from 1 by more than ``1e-12``.
    """
    vector = np.asarray(v, dtype=np.complex128).reshape(-1)
    norm = float(np.linalg.norm(vector))
    if abs(norm - 1.0) > EMBED_NORM_TOL:
        raise NotNormalized("dilation", f"state norm is {norm!r}, expected 1")
    return np.concatenate([vector, np.zeros_like(vector)])
