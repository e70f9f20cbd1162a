"""Tests for Kraus sets, Lindblad models and the dense channel semantics."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from kraus_dilation.channels import (
    DensityMatrix,
    InitialEnsemble,
    Jump,
    KrausSet,
    LindbladModel,
    amplitude_damping_channel,
    apply_channel,
    coherent_channel,
    damping_channel,
    ensemble_from_density,
    finite_temperature_ground_population,
    iterated_ground_population,
    kraus_from_lindblad,
    naive_finite_temperature_channel,
    pure_state_density,
)
from kraus_dilation.core.exceptions import (
    DimensionMismatch,
    InvalidModel,
    InvalidProbability,
    NotHermitian,
    StepTooLarge,
)
from kraus_dilation.evolution import evolve_operator_sum
from kraus_dilation.fmo import FmoParams, build_fmo_model
from kraus_dilation.linalg import hermitian_propagator

from .conftest import random_model, random_psd

LOWER = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)


def decay_model(gamma: float) -> LindbladModel:
    return LindbladModel(np.zeros((2, 2)), (Jump(LOWER, gamma, "decay"),))


class TestModelTypes:
    def test_negative_rate_rejected(self):
        with pytest.raises(InvalidModel, match="invalid rate"):
            Jump(LOWER, -1.0, "bad")

    def test_non_hermitian_hamiltonian(self):
        with pytest.raises(NotHermitian):
            LindbladModel(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_jump_shape_mismatch(self):
        with pytest.raises(DimensionMismatch, match="jump 'decay'"):
            LindbladModel(np.zeros((3, 3)), (Jump(LOWER, 0.1, "decay"),))

    def test_incomplete_kraus_set(self):
        with pytest.raises(InvalidModel, match="not complete"):
            KrausSet((np.diag([1.0, 0.5]),))

    def test_density_matrix_trace(self):
        with pytest.raises(InvalidModel, match="trace"):
            DensityMatrix(np.diag([1.0, 1.0]))

    def test_density_matrix_positivity(self):
        with pytest.raises(InvalidModel, match="eigenvalue"):
            DensityMatrix(np.diag([1.5, -0.5]))
        assert DensityMatrix(np.diag([1.5, -0.5]), check_positive=False).dim == 2

    def test_ensemble_weights_must_sum_to_one(self):
        with pytest.raises(InvalidProbability):
            InitialEnsemble(((0.5, np.array([1.0, 0.0])), (0.2, np.array([0.0, 1.0]))))

    def test_ensemble_vectors_must_be_normalized(self):
        with pytest.raises(InvalidModel, match="normalized"):
            InitialEnsemble.pure([1.0, 1.0])

    def test_basis_state_index_checked(self):
        with pytest.raises(DimensionMismatch):
            InitialEnsemble.basis_state(3, 3)


class TestKrausFromLindblad:
    def test_decay_without_coherent_part(self):
        ks = kraus_from_lindblad(decay_model(0.25), 1.0, apply_coherent=False)
        assert len(ks) == 2
        assert_allclose(ks.ops[1], [[0.0, 0.5], [0.0, 0.0]], atol=1e-15)
        assert_allclose(ks.ops[0], np.diag([1.0, np.sqrt(0.75)]), atol=1e-15)
        assert ks.labels == ("M0", "decay")

    def test_zero_rate_jump(self):
        model = LindbladModel(np.zeros((2, 2)), (Jump(LOWER, 0.0, "off"),))
        ks = kraus_from_lindblad(model, 5.0)
        assert_allclose(ks.ops[0], np.eye(2), atol=1e-15)
        assert_allclose(ks.ops[1], np.zeros((2, 2)))

    def test_fmo_sink_operator(self):
        ks = kraus_from_lindblad(build_fmo_model(), 48.4, apply_coherent=False)
        assert len(ks) == 8
        assert ks.ops[7][4, 3].real == pytest.approx(np.sqrt(6.28e-3 * 48.4), rel=1e-12)
        assert ks.ops[1][1, 1].real == pytest.approx(np.sqrt(3.0e-3 * 48.4), rel=1e-12)

    def test_coherent_factor_is_left_multiplied(self):
        params = FmoParams()
        bare = kraus_from_lindblad(build_fmo_model(params), 48.4, apply_coherent=False)
        dressed = kraus_from_lindblad(build_fmo_model(params), 48.4)
        u = hermitian_propagator(params.hamiltonian, 48.4)
        for m, dressed_m in zip(bare.ops, dressed.ops):
            assert_allclose(dressed_m, u @ m, atol=1e-12)
        # a dephasing operator dressed from the left only fills column 1
        assert_allclose(np.delete(dressed.ops[1], 1, axis=1), 0.0, atol=1e-15)

    def test_completeness_over_random_models(self, rng):
        for _ in range(200):
            dim = int(rng.integers(1, 7))
            dt = float(rng.uniform(0.01, 1.0))
            model = random_model(rng, dim, int(rng.integers(0, 4)), dt)
            ks = kraus_from_lindblad(model, dt)
            assert ks.completeness_error() <= 1e-9

    @pytest.mark.parametrize("dt", [0.0, -1.0])
    def test_non_positive_step(self, dt):
        with pytest.raises(StepTooLarge):
            kraus_from_lindblad(decay_model(0.1), dt)

    def test_step_too_large(self):
        with pytest.raises(StepTooLarge) as err:
            kraus_from_lindblad(decay_model(0.5), 2.0)
        assert err.value.code == "channels.step_too_large"


class TestApplyChannel:
    def test_identity_channel(self, rng):
        a = random_psd(rng, 3)
        rho = DensityMatrix(a / np.trace(a).real)
        out = apply_channel(KrausSet((np.eye(3),)), rho)
        assert_allclose(out.matrix, rho.matrix, atol=1e-15)

    def test_amplitude_damping(self):
        out = apply_channel(damping_channel(0.36), DensityMatrix.basis_state(2, 1))
        assert_allclose(out.matrix, np.diag([0.36, 0.64]), atol=1e-15)

    def test_coherence_decays_by_sqrt(self):
        c = 0.3 + 0.1j
        rho = DensityMatrix(np.array([[0.5, c], [np.conj(c), 0.5]]))
        out = apply_channel(damping_channel(0.36), rho)
        assert out.matrix[0, 1] == pytest.approx(np.sqrt(0.64) * c, abs=1e-15)

    def test_coherent_only_channel(self, rng):
        h = np.diag([0.0, 0.01, 0.02])
        a = random_psd(rng, 3)
        rho = DensityMatrix(a / np.trace(a).real)
        u = hermitian_propagator(h, 10.0)
        out = apply_channel(coherent_channel(h, 10.0), rho)
        assert_allclose(out.matrix, u @ rho.matrix @ u.conj().T, atol=1e-12)

    def test_preserves_trace_and_positivity(self, rng):
        for dim in range(1, 9):
            model = random_model(rng, dim, 2, 0.2)
            a = random_psd(rng, dim)
            rho = DensityMatrix(a / np.trace(a).real)
            out = apply_channel(kraus_from_lindblad(model, 0.2), rho)
            assert abs(np.trace(out.matrix) - 1.0) <= 1e-9
            assert np.linalg.eigvalsh(out.matrix)[0] >= -1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            apply_channel(damping_channel(0.1), DensityMatrix.basis_state(3, 0))


class TestDampingChannels:
    def test_identity_at_zero(self):
        ks = damping_channel(0.0, 0.0)
        assert_allclose(ks.ops[0], np.eye(2))

    def test_zero_temperature(self):
        assert_allclose(damping_channel(0.36).ops[0], np.diag([1.0, 0.8]))

    @pytest.mark.parametrize("p1, p2", [(-0.1, 0.0), (1.0, 0.0), (0.6, 0.5), (np.nan, 0.0)])
    def test_invalid_probabilities(self, p1, p2):
        with pytest.raises(InvalidProbability):
            damping_channel(p1, p2)

    def test_exponential_decay_is_exact(self):
        gamma, dt, steps = 1.52, 0.1, 25
        p = gamma * dt
        rho = evolve_operator_sum(damping_channel(p), DensityMatrix.basis_state(2, 1), steps)
        assert rho.matrix[1, 1].real == pytest.approx((1 - p) ** steps, abs=1e-12)

    def test_first_order_convergence(self):
        gamma, t = 1.52, 1.0

        def error(dt):
            steps = round(t / dt)
            rho = evolve_operator_sum(
                damping_channel(gamma * dt), DensityMatrix.basis_state(2, 1), steps
            )
            return abs(rho.matrix[1, 1].real - np.exp(-gamma * t))

        assert 1.7 <= error(0.01) / error(0.005) <= 2.3

    def test_finite_temperature_steady_state(self):
        gamma1, gamma2 = 1.52e-2, 0.5e-2
        dt = 0.01 / (gamma1 + gamma2)
        ks = damping_channel(gamma1 * dt, gamma2 * dt)
        rho = evolve_operator_sum(ks, DensityMatrix.basis_state(2, 1), 2000)
        assert rho.matrix[0, 0].real == pytest.approx(gamma1 / (gamma1 + gamma2), abs=1e-3)

    def test_iterated_closed_form(self):
        p1, p2, steps = 0.05, 0.02, 40
        rho = evolve_operator_sum(damping_channel(p1, p2), DensityMatrix.basis_state(2, 1), steps)
        assert rho.matrix[0, 0].real == pytest.approx(
            iterated_ground_population(p1, p2, steps, 0.0), abs=1e-12
        )

    def test_naive_form_has_wrong_limit(self):
        gamma1, gamma2, t = 1.52e-2, 0.5e-2, 5000.0
        for site in (0, 1):
            rho0 = DensityMatrix.basis_state(2, site)
            out = apply_channel(naive_finite_temperature_channel(gamma1, gamma2, t), rho0)
            assert out.matrix[0, 0].real == pytest.approx(rho0.matrix[1, 1].real, abs=1e-6)
        exact = finite_temperature_ground_population(gamma1, gamma2, t, 0.0)
        assert exact == pytest.approx(gamma1 / (gamma1 + gamma2), abs=1e-6)

    def test_amplitude_damping_channel(self):
        ks = amplitude_damping_channel(0.2, 3.0)
        out = apply_channel(ks, DensityMatrix.basis_state(2, 1))
        assert out.matrix[1, 1].real == pytest.approx(np.exp(-0.6))


class TestStates:
    def test_pure_state(self):
        rho = pure_state_density(InitialEnsemble.basis_state(2, 1))
        assert_allclose(rho.matrix, np.diag([0.0, 1.0]))

    def test_even_mixture(self):
        ensemble = InitialEnsemble(((0.5, np.array([1.0, 0.0])), (0.5, np.array([0.0, 1.0]))))
        assert_allclose(pure_state_density(ensemble).matrix, np.diag([0.5, 0.5]))

    def test_mixture_of_non_orthogonal_states(self):
        plus = np.array([1.0, 1.0]) / np.sqrt(2)
        ensemble = InitialEnsemble(((0.25, plus), (0.75, np.array([0.0, 1.0]))))
        rho = pure_state_density(ensemble)
        assert np.trace(rho.matrix).real == pytest.approx(1.0)
        assert np.all(np.linalg.eigvalsh(rho.matrix) >= 0)

    def test_ensemble_from_density_round_trip(self, rng):
        a = random_psd(rng, 4, rank=2)
        rho = DensityMatrix(a / np.trace(a).real)
        ensemble = ensemble_from_density(rho)
        assert len(ensemble.components) == 2
        assert_allclose(pure_state_density(ensemble).matrix, rho.matrix, atol=1e-10)
