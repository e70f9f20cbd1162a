"""Shared fixtures: seeded generators and random operator factories."""

from typing import Callable

import numpy as np
import pytest
import scipy.linalg

from kraus_dilation.channels import InitialEnsemble, Jump, LindbladModel


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (a + a.conj().T)


def random_psd(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    b = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    return b @ b.conj().T


def random_contraction(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random matrix scaled to unit spectral norm, then by a factor in (0, 1]."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    a = a / scipy.linalg.svdvals(a)[0]
    return a * rng.uniform(0.05, 1.0)


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_model(
    rng: np.random.Generator,
    dim: int,
    n_jumps: int = 2,
    dt: float = 0.1,
    h_scale: float = 0.3,
) -> LindbladModel:
    """A model whose jumps keep ``sum rate * dt * |L|^2`` below 0.9 at ``dt``."""
    jumps = []
    for k in range(n_jumps):
        op = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        op = op / scipy.linalg.svdvals(op)[0]
        rate = rng.uniform(0.0, 0.9 / (n_jumps * dt))
        jumps.append(Jump(op, rate, f"L{k + 1}"))
    return LindbladModel(random_hermitian(rng, dim, h_scale), tuple(jumps), "random")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def make_model(rng) -> Callable[..., LindbladModel]:
    def factory(dim: int, n_jumps: int = 2, dt: float = 0.1, h_scale: float = 0.3):
        return random_model(rng, dim, n_jumps, dt, h_scale)

    return factory


@pytest.fixture
def excited_qubit() -> InitialEnsemble:
    return InitialEnsemble.basis_state(2, 1)


@pytest.fixture(autouse=True)
def _single_thread_default(monkeypatch):
    monkeypatch.delenv("SIM_THREADS", raising=False)
