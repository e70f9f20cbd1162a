"""Tests for 1-dilations of contractions."""

import numpy as np
import pytest
import scipy.stats
from numpy.testing import assert_allclose

from kraus_dilation.core.exceptions import NotContraction, NotNormalized
from kraus_dilation.dilation import defect_operator, dilate, embed_state

from .conftest import random_contraction, random_state


class TestDefectOperator:
    def test_zero(self):
        assert_allclose(defect_operator(np.zeros((3, 3))), np.eye(3), atol=1e-15)

    def test_unitary(self):
        u = scipy.stats.unitary_group.rvs(4, random_state=3)
        assert_allclose(defect_operator(u), np.zeros((4, 4)), atol=1e-7)

    def test_diagonal_case(self):
        m = np.sqrt(0.36) * np.array([[0.0, 1.0], [0.0, 0.0]])
        assert_allclose(defect_operator(m), np.diag([1.0, 0.8]), atol=1e-15)

    def test_squares_to_gram_complement(self, rng):
        m = random_contraction(rng, 5)
        d = defect_operator(m)
        assert_allclose(d @ d, np.eye(5) - m.conj().T @ m, atol=1e-9)
        gram = m.conj().T @ m
        assert_allclose(d @ gram, gram @ d, atol=1e-9)

    def test_rejects_expansion(self):
        with pytest.raises(NotContraction) as err:
            defect_operator(1.1 * np.eye(2))
        assert err.value.code == "dilation.not_contraction"


class TestDilate:
    def test_zero(self):
        u = dilate(np.zeros((2, 2)))
        expected = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
        assert_allclose(u.matrix, expected, atol=1e-15)
        assert u.base_dim == 2
        assert u.dim == 4

    def test_unitary_source(self):
        v = scipy.stats.unitary_group.rvs(3, random_state=11)
        u = dilate(v)
        assert_allclose(u.matrix[:3, :3], v)
        assert_allclose(u.matrix[3:, 3:], -v.conj().T)
        assert_allclose(u.matrix[:3, 3:], 0.0, atol=1e-7)
        assert_allclose(u.matrix[3:, :3], 0.0, atol=1e-7)

    def test_random_contractions(self, rng):
        for _ in range(1000):
            dim = int(rng.integers(1, 11))
            m = random_contraction(rng, dim)
            u = dilate(m)
            assert u.unitarity_error() <= 1e-9
            assert u.scale == 1.0
            v = random_state(rng, dim)
            out = u.matrix @ embed_state(v)
            assert_allclose(out[:dim], m @ v, atol=1e-12)

    def test_adjoint_block(self, rng):
        m = random_contraction(rng, 4)
        u = dilate(m)
        assert_allclose(u.matrix.conj().T[:4, :4], m.conj().T)
        assert_allclose(u.block, m)

    def test_boundary_norm_is_rescaled(self):
        m = np.diag([1.0 + 5e-10, 0.5])
        u = dilate(m)
        assert u.scale == pytest.approx(1.0 + 5e-10, abs=1e-15)
        assert u.unitarity_error() <= 1e-9
        assert_allclose(u.block, m / u.scale)

    def test_rejects_expansion(self):
        with pytest.raises(NotContraction):
            dilate(np.diag([1.0 + 1e-6, 0.0]))


class TestEmbedState:
    def test_basis_vector(self):
        assert_allclose(embed_state([1.0, 0.0]), [1.0, 0.0, 0.0, 0.0])

    def test_norm_is_preserved(self, rng):
        v = random_state(rng, 6)
        out = embed_state(v)
        assert out.shape == (12,)
        assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-15)

    def test_zero_vector(self):
        with pytest.raises(NotNormalized) as err:
            embed_state(np.zeros(3))
        assert err.value.code == "dilation.not_normalized"
