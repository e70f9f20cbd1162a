"""Tests for statevector readout, shot sampling and observable estimation."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from kraus_dilation.channels import (
    InitialEnsemble,
    damping_channel,
    ensemble_from_density,
    kraus_from_lindblad,
    pure_state_density,
)
from kraus_dilation.core.exceptions import (
    DimensionMismatch,
    NotHermitian,
    NotNormalized,
    ZeroObservable,
)
from kraus_dilation.dilation import dilate, embed_state
from kraus_dilation.evolution import (
    PruningPolicy,
    enumerate_products,
    evolve_operator_sum,
    identity_term,
)
from kraus_dilation.fmo import build_fmo_model, default_hamiltonian
from kraus_dilation.measurement import (
    MeasurementRecord,
    estimate_diagonal,
    estimate_expectation,
    sample_counts,
    shift_observable,
    shots_for_error,
    simulate_exact,
    standard_error,
)

from .conftest import random_contraction, random_hermitian, random_model, random_state

UNPRUNED = PruningPolicy(norm_threshold=0.0)
SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)


def sigma_z_on_first_qubit(dim: int) -> np.ndarray:
    return np.diag(np.where(np.arange(dim) < dim // 2, 1.0, -1.0)).astype(np.complex128)


class TestSimulateExact:
    def test_identity_source(self, rng):
        w = random_state(rng, 2)
        out = simulate_exact(dilate(np.eye(2)), embed_state(w))
        assert_allclose(out, [w[0], w[1], 0.0, 0.0], atol=1e-15)

    def test_first_half_is_source_action(self, rng):
        m = random_contraction(rng, 3)
        w = random_state(rng, 3)
        out = simulate_exact(dilate(m), embed_state(w))
        assert_allclose(out[:3], m @ w, atol=1e-12)
        assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            simulate_exact(dilate(np.eye(2)), np.ones(6) / np.sqrt(6))

    def test_unnormalized_state(self):
        with pytest.raises(NotNormalized):
            simulate_exact(dilate(np.eye(2)), np.ones(4))


class TestSampleCounts:
    def test_basis_state(self):
        record = sample_counts([1.0, 0.0, 0.0, 0.0], 100, seed=5)
        assert dict(record.counts) == {0: 100}
        assert record.subspace_probability(2) == 1.0

    def test_deterministic_for_fixed_seed(self, rng):
        state = random_state(rng, 8)
        assert sample_counts(state, 9216, 42) == sample_counts(state, 9216, 42)

    def test_binomial_band(self):
        state = np.array([1.0, 1.0]) / np.sqrt(2)
        inside = sum(
            abs(sample_counts(state, 9216, seed).counts.get(0, 0) - 4608) <= 144
            for seed in range(200)
        )
        assert inside >= 196

    def test_rejects_unnormalized(self):
        with pytest.raises(NotNormalized):
            sample_counts([1.0, 1.0], 10, 0)

    def test_record_serialization(self):
        record = sample_counts([0.6, 0.8], 50, 3)
        data = record.to_dict()
        assert data["shots"] == 50
        assert sum(data["counts"].values()) == 50
        assert list(data["counts"]) == sorted(data["counts"])
        assert record.frequencies().sum() == pytest.approx(1.0)

    def test_record_validates_counts(self):
        with pytest.raises(ValueError):
            MeasurementRecord({0: 3}, 4, 0, 2)


class TestEstimateDiagonal:
    def test_identity_term(self, rng):
        phi = random_state(rng, 4)
        out = estimate_diagonal([identity_term(4)], InitialEnsemble.pure(phi))
        assert_allclose(out, np.abs(phi) ** 2, atol=1e-12)

    def test_damping_decay(self, excited_qubit):
        p, steps = 0.2, 4
        terms = enumerate_products(damping_channel(p), steps, UNPRUNED)
        out = estimate_diagonal(terms, excited_qubit)
        assert out[1] == pytest.approx((1 - p) ** steps, abs=1e-12)

    @pytest.mark.parametrize("dim, steps", [(2, 1), (3, 2), (4, 3), (5, 2)])
    def test_matches_operator_sum(self, rng, dim, steps):
        ks = kraus_from_lindblad(random_model(rng, dim, 2, 0.2), 0.2)
        ensemble = InitialEnsemble(((0.3, random_state(rng, dim)), (0.7, random_state(rng, dim))))
        terms = enumerate_products(ks, steps, UNPRUNED)
        rho = evolve_operator_sum(ks, pure_state_density(ensemble), steps)
        assert_allclose(estimate_diagonal(terms, ensemble), rho.populations(), atol=1e-9)

    def test_mixed_initial_state(self, rng):
        ks = kraus_from_lindblad(random_model(rng, 3, 2, 0.2), 0.2)
        rho0 = pure_state_density(
            InitialEnsemble(((0.5, random_state(rng, 3)), (0.5, random_state(rng, 3))))
        )
        ensemble = ensemble_from_density(rho0)
        terms = enumerate_products(ks, 2, UNPRUNED)
        expected = evolve_operator_sum(ks, rho0, 2).populations()
        assert_allclose(estimate_diagonal(terms, ensemble), expected, atol=1e-9)

    def test_sampled_close_to_exact_on_fmo_terms(self):
        ks = kraus_from_lindblad(build_fmo_model(), 48.4)
        terms = enumerate_products(ks, 1, PruningPolicy(0.01))
        ensemble = InitialEnsemble.basis_state(5, 1)
        exact = estimate_diagonal(terms, ensemble)
        for seed in range(20):
            sampled = estimate_diagonal(terms, ensemble, 9216, seed, "sampled")
            assert np.max(np.abs(sampled - exact)) <= 0.03

    def test_independent_of_worker_count(self, rng, monkeypatch):
        ks = kraus_from_lindblad(random_model(rng, 3, 3, 0.2), 0.2)
        terms = enumerate_products(ks, 3, PruningPolicy(0.01))
        ensemble = InitialEnsemble.basis_state(3, 0)
        monkeypatch.setenv("SIM_THREADS", "1")
        serial = estimate_diagonal(terms, ensemble, 1024, 9, "sampled")
        monkeypatch.setenv("SIM_THREADS", "4")
        threaded = estimate_diagonal(terms, ensemble, 1024, 9, "sampled")
        assert_array_equal(serial, threaded)

    @pytest.mark.slow
    def test_shot_noise_scaling(self, rng):
        ks = kraus_from_lindblad(random_model(rng, 3, 2, 0.2), 0.2)
        terms = enumerate_products(ks, 2, PruningPolicy(0.01))
        ensemble = InitialEnsemble.basis_state(3, 0)
        exact = estimate_diagonal(terms, ensemble)
        shots = [2**k for k in range(8, 17)]
        rmse = []
        for n in shots:
            errors = [estimate_diagonal(terms, ensemble, n, seed, "sampled") - exact for seed in range(20)]
            rmse.append(np.sqrt(np.mean(np.square(errors))))
        slope = np.polyfit(np.log(shots), np.log(rmse), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.1)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            estimate_diagonal([identity_term(3)], InitialEnsemble.basis_state(2, 0))


class TestShiftObservable:
    def test_sigma_z(self):
        spec = shift_observable(SIGMA_Z)
        assert spec.norm == pytest.approx(1.0)
        assert_allclose(spec.shifted, np.diag([1.0, 0.0]))
        assert_allclose(spec.factor, np.diag([1.0, 0.0]))

    def test_identity(self):
        spec = shift_observable(np.eye(3))
        assert_allclose(spec.shifted, np.eye(3))
        assert_allclose(spec.factor, np.eye(3))

    def test_fmo_hamiltonian_is_shifted_into_unit_interval(self):
        spec = shift_observable(default_hamiltonian())
        eigvals = np.linalg.eigvalsh(spec.shifted)
        assert eigvals.min() >= -1e-12
        assert eigvals.max() <= 1 + 1e-12
        assert_allclose(spec.factor @ spec.factor.conj().T, spec.shifted, atol=1e-10)

    def test_rejects_zero(self):
        with pytest.raises(ZeroObservable) as err:
            shift_observable(np.zeros((2, 2)))
        assert err.value.code == "measurement.zero_observable"

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            shift_observable([[0.0, 1.0], [0.0, 0.0]])


class TestEstimateExpectation:
    def test_first_half_probability(self, rng):
        for _ in range(10):
            phi = random_state(rng, 16)
            spec = shift_observable(sigma_z_on_first_qubit(16))
            value = estimate_expectation(spec, [identity_term(16)], InitialEnsemble.pure(phi))
            expected = 2 * np.sum(np.abs(phi[:8]) ** 2) - 1
            assert value == pytest.approx(expected, abs=1e-12)

    def test_identity_observable(self, rng):
        ensemble = InitialEnsemble.pure(random_state(rng, 3))
        value = estimate_expectation(shift_observable(np.eye(3)), [identity_term(3)], ensemble)
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_fmo_initial_energy(self):
        spec = shift_observable(default_hamiltonian())
        value = estimate_expectation(spec, [identity_term(5)], InitialEnsemble.basis_state(5, 1))
        assert value == pytest.approx(0.0267, abs=1e-12)

    @pytest.mark.parametrize("dim, steps", [(2, 3), (3, 2), (5, 1), (6, 2)])
    def test_matches_trace(self, rng, dim, steps):
        ks = kraus_from_lindblad(random_model(rng, dim, 2, 0.2), 0.2)
        a = random_hermitian(rng, dim)
        ensemble = InitialEnsemble.pure(random_state(rng, dim))
        terms = enumerate_products(ks, steps, UNPRUNED)
        rho = evolve_operator_sum(ks, pure_state_density(ensemble), steps)
        value = estimate_expectation(shift_observable(a), terms, ensemble)
        assert value == pytest.approx(np.trace(a @ rho.matrix).real, abs=1e-9)

    def test_sampled_mode_is_seeded(self, rng):
        spec = shift_observable(SIGMA_Z)
        ensemble = InitialEnsemble.pure(random_state(rng, 2))
        terms = enumerate_products(damping_channel(0.3), 2, UNPRUNED)
        first = estimate_expectation(spec, terms, ensemble, 512, 4, "sampled")
        assert first == estimate_expectation(spec, terms, ensemble, 512, 4, "sampled")
        assert abs(first - estimate_expectation(spec, terms, ensemble)) < 0.2

    def test_observable_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            estimate_expectation(
                shift_observable(SIGMA_Z), [identity_term(3)], InitialEnsemble.basis_state(3, 0)
            )


class TestShotBudget:
    def test_shots_for_error(self):
        assert shots_for_error(0.5, 0.0625) == 64
        assert shots_for_error(0.0, 0.1) == 1

    def test_standard_error(self):
        assert standard_error(0.5, 9216) == pytest.approx(0.5 / 96)

    @pytest.mark.parametrize("p, shots", [(-0.1, 10), (0.5, 0)])
    def test_standard_error_rejects(self, p, shots):
        with pytest.raises(ValueError):
            standard_error(p, shots)
