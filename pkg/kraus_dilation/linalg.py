"""Dense complex matrix helpers and the factorizations the simulator relies on.

All functions take and return ``numpy`` arrays of dtype ``complex128`` and never
mutate their inputs, so they are safe to call from many threads at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .core.exceptions import DimensionMismatch, NotHermitian, NotPSD

ComplexMatrix = npt.NDArray[np.complex128]
ComplexVector = npt.NDArray[np.complex128]

DEFAULT_TOL = 1e-10
# eV * fs
HBAR_EV_FS = 0.6582119569
FS_PER_AU = 0.02418884


def as_matrix(a: npt.ArrayLike, *, module: str = "linalg") -> ComplexMatrix:
    """Convert ``a`` to a square, finite complex128 matrix."""
    matrix = np.asarray(a, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
        raise DimensionMismatch(
            module, f"expected a non-empty square matrix, got shape {matrix.shape}"
        )
    if not np.all(np.isfinite(matrix)):
        raise DimensionMismatch(module, "matrix has non-finite entries")
    return matrix


def dagger(a: ComplexMatrix) -> ComplexMatrix:
    return a.conj().T


def identity(dim: int) -> ComplexMatrix:
    return np.eye(dim, dtype=np.complex128)


def frobenius_norm(a: ComplexMatrix) -> float:
    return float(np.linalg.norm(a, "fro"))


@dataclass(frozen=True)
class HermitianCheck:
    """Entrywise Hermiticity test: passes iff ``max |A - A^dagger| <= tolerance``."""

    matrix: ComplexMatrix
    tolerance: float = DEFAULT_TOL

    def __post_init__(self) -> None:
        if self.tolerance < 0:
            raise ValueError("tolerance must be non-negative")

    @property
    def deviation(self) -> float:
        return float(np.max(np.abs(self.matrix - dagger(self.matrix))))

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance

    def require(self, what: str = "matrix") -> None:
        if not self.passed:
            raise NotHermitian(
                f"{what} is not Hermitian: max |A - A^dagger| = {self.deviation:.3e} "
                f"> {self.tolerance:.1e}",
                details={"deviation": self.deviation, "tolerance": self.tolerance},
            )


def is_hermitian(a: ComplexMatrix, tol: float = DEFAULT_TOL) -> bool:
    return HermitianCheck(as_matrix(a), tol).passed


def _hermitian_eigh(a: ComplexMatrix, tol: float, what: str):
    matrix = as_matrix(a)
    HermitianCheck(matrix, tol).require(what)
    symmetric = 0.5 * (matrix + dagger(matrix))
    return scipy.linalg.eigh(symmetric)


def psd_sqrt(a: ComplexMatrix, tol: float = DEFAULT_TOL) -> ComplexMatrix:
    """Hermitian square root of a positive semidefinite matrix.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero.

    Raises:
        NotHermitian: If the symmetry check fails.
        NotPSD: If any eigenvalue is below ``-tol``.
    """
    eigvals, eigvecs = _hermitian_eigh(a, tol, "psd_sqrt input")
    smallest = float(eigvals[0])
    if smallest < -tol:
        raise NotPSD(
            f"matrix has eigenvalue {smallest:.3e} < {-tol:.1e}",
            details={"min_eigenvalue": smallest, "tolerance": tol},
        )
    roots = np.sqrt(np.clip(eigvals, 0.0, None))
    root = (eigvecs * roots) @ dagger(eigvecs)
    return 0.5 * (root + dagger(root))


def cholesky_psd(a: ComplexMatrix, tol: float = DEFAULT_TOL) -> ComplexMatrix:
    """Lower-triangular ``L`` with ``L @ L^dagger = A`` for PSD ``A``.

    Rank-deficient input is handled by zero-pivot continuation: a pivot in
    ``[-tol, tol]`` becomes an exact zero column, with no diagonal jitter.

    Raises:
        NotHermitian: If the symmetry check fails.
        NotPSD: If a pivot drops below ``-tol``.
    """
    matrix = as_matrix(a)
    HermitianCheck(matrix, tol).require("cholesky_psd input")
    matrix = 0.5 * (matrix + dagger(matrix))
    dim = matrix.shape[0]
    factor = np.zeros_like(matrix)
    for j in range(dim):
        row = factor[j, :j]
        pivot = float((matrix[j, j] - np.vdot(row, row)).real)
        if pivot < -tol:
            raise NotPSD(
                f"Cholesky pivot {j} is {pivot:.3e} < {-tol:.1e}",
                details={"pivot_index": j, "pivot": pivot, "tolerance": tol},
            )
        if pivot <= tol:
            continue
        diag = np.sqrt(pivot)
        factor[j, j] = diag
        if j + 1 < dim:
            below = matrix[j + 1 :, j] - factor[j + 1 :, :j] @ row.conj()
            factor[j + 1 :, j] = below / diag
    return factor


def hermitian_propagator(
    hamiltonian: ComplexMatrix,
    dt: float,
    hbar: float = HBAR_EV_FS,
    tol: float = DEFAULT_TOL,
) -> ComplexMatrix:
    """``exp(-i H dt / hbar)`` through the eigendecomposition of ``H``.

    ``H`` is in eV, ``dt`` in fs and ``hbar`` in eV*fs by default.
    """
    eigvals, eigvecs = _hermitian_eigh(hamiltonian, tol, "Hamiltonian")
    phases = np.exp(-1j * eigvals * (dt / hbar))
    return (eigvecs * phases) @ dagger(eigvecs)


def spectral_norm(a: ComplexMatrix) -> float:
    """Largest singular value."""
    matrix = np.asarray(a, dtype=np.complex128)
    if not np.all(np.isfinite(matrix)):
        raise DimensionMismatch("linalg", "matrix has non-finite entries")
    if matrix.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(matrix)[0])


def matrix_norm(a: ComplexMatrix, kind: str) -> float:
    if kind == "spectral":
        return spectral_norm(a)
    return frobenius_norm(a)
