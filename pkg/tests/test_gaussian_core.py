"""Tests for Gaussian-state construction and symplectic decompositions."""

import json

import numpy as np
import pytest
from scipy import integrate

from gaussmet import gaussian_core as gc
from gaussmet.errors import (
    DimensionMismatch,
    InfeasibleTarget,
    NotPositiveDefinite,
    NotSymplectic,
    NotSymplecticOrthogonal,
    SingularMixture,
    UncertaintyViolated,
)

from conftest import haar_unitary


def random_symplectic(rng, modes):
    """lift(U1) Q lift(U2) with random unitaries and squeezings."""
    r = rng.uniform(0.1, 0.9, size=modes)
    q = np.diag(np.concatenate([np.exp(r), np.exp(-r)]))
    return gc.lift_unitary(haar_unitary(rng, modes)) @ q @ gc.lift_unitary(haar_unitary(rng, modes))


class TestNewState:
    def test_vacuum(self):
        state = gc.new_state(np.eye(2) / 2, np.zeros(2))
        assert state.modes == 1
        assert np.allclose(state.sigma, [0.5], atol=1e-12)
        assert gc.purity(state) == pytest.approx(1.0, abs=1e-12)

    def test_squeezed_vacuum_is_pure(self):
        r = 0.5
        state = gc.new_state(np.diag([np.exp(2 * r), np.exp(-2 * r)]) / 2)
        assert state.sigma == pytest.approx(0.5, abs=1e-12)
        assert gc.purity(state) == pytest.approx(1.0, abs=1e-12)

    def test_uncertainty_violation(self):
        with pytest.raises(UncertaintyViolated):
            gc.new_state(0.4 * np.eye(2))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            gc.new_state(np.eye(2) / 2, np.zeros(4))
        with pytest.raises(DimensionMismatch):
            gc.new_state(np.eye(3) / 2, np.zeros(3))

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            gc.new_state(np.diag([1.0, -1.0]))
        asym = np.array([[1.0, 0.5], [0.1, 1.0]])
        with pytest.raises(NotPositiveDefinite):
            gc.new_state(asym)


class TestMeanPhotonNumber:
    def test_vacuum(self):
        assert gc.mean_photon_number(gc.vacuum(1)) == pytest.approx(0.0, abs=1e-14)

    def test_squeezed_vacuum_unit_photon(self):
        r0 = np.log(1 + np.sqrt(2))  # sinh^2 r0 = 1
        state = gc.new_state(np.diag([np.exp(2 * r0), np.exp(-2 * r0)]) / 2)
        assert gc.mean_photon_number(state) == pytest.approx(1.0, abs=1e-12)

    def test_coherent(self):
        state = gc.new_state(np.eye(2) / 2, [np.sqrt(2), 0.0])
        assert gc.mean_photon_number(state) == pytest.approx(1.0, abs=1e-14)


class TestWilliamson:
    def test_thermal(self):
        symp, sigma = gc.williamson(1.3 * np.eye(4))
        assert np.allclose(sigma, [1.3, 1.3], atol=1e-12)
        assert np.allclose(symp.T @ symp, np.eye(4), atol=1e-10)
        form = gc.symplectic_form(2)
        assert np.allclose(symp.T @ form @ symp, form, atol=1e-10)

    def test_pure_squeezed(self):
        _, sigma = gc.williamson(np.diag([np.exp(1.0), np.exp(-1.0)]) / 2)
        assert sigma == pytest.approx(0.5, abs=1e-12)

    def test_random_reconstruction(self):
        state = gc.random_state(3, 2.0, "mixed", seed=123)
        symp, sigma = gc.williamson(state.gamma)
        recon = symp @ np.diag(np.concatenate([sigma, sigma])) @ symp.T
        assert np.max(np.abs(recon - state.gamma)) < 1e-10

    @pytest.mark.parametrize("modes", [1, 2, 3])
    def test_roundtrip_battery(self, modes):
        # 100 seeded states split over the mode counts
        for seed in range(34):
            state = gc.random_state(modes, 0.3 + 0.1 * seed, "mixed", seed=seed)
            symp, sigma = gc.williamson(state.gamma)
            form = gc.symplectic_form(modes)
            recon = symp @ np.diag(np.concatenate([sigma, sigma])) @ symp.T
            assert np.max(np.abs(recon - state.gamma)) < 1e-10
            assert np.max(np.abs(symp.T @ form @ symp - form)) < 1e-10
            assert np.all(np.diff(sigma) <= 1e-12)

    def test_rejects_asymmetric(self):
        with pytest.raises(NotPositiveDefinite):
            gc.williamson(np.array([[1.0, 0.3], [0.0, 1.0]]))


class TestBlochMessiah:
    def test_orthogonal_input_passthrough(self):
        rng = np.random.default_rng(7)
        rot_in = gc.lift_unitary(haar_unitary(rng, 2))
        rot, qmat, rot_prime = gc.bloch_messiah(rot_in)
        assert np.allclose(rot, rot_in, atol=1e-12)
        assert np.allclose(qmat, np.eye(4), atol=1e-12)
        assert np.allclose(rot_prime, np.eye(4), atol=1e-12)

    def test_diagonal_squeezer(self):
        r = np.array([0.8, 0.3])
        symp = np.diag(np.concatenate([np.exp(r), np.exp(-r)]))
        rot, qmat, rot_prime = gc.bloch_messiah(symp)
        assert np.allclose(rot, np.eye(4), atol=1e-10)
        assert np.allclose(rot_prime, np.eye(4), atol=1e-10)
        assert np.allclose(qmat, symp, atol=1e-10)

    def test_random_reconstruction(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            symp = random_symplectic(rng, 2)
            rot, qmat, rot_prime = gc.bloch_messiah(symp)
            assert np.max(np.abs(rot @ qmat @ rot_prime - symp)) < 1e-10
            squeezings = np.log(np.diag(qmat)[:2])
            assert np.all(np.diff(squeezings) <= 1e-12)
            assert np.all(squeezings >= -1e-12)
            form = gc.symplectic_form(2)
            for factor in (rot, rot_prime):
                assert np.max(np.abs(factor.T @ form @ factor - form)) < 1e-10
                assert np.max(np.abs(factor.T @ factor - np.eye(4))) < 1e-10

    def test_degenerate_squeezings(self):
        rng = np.random.default_rng(5)
        r = np.array([0.6, 0.6, 0.0])
        q = np.diag(np.concatenate([np.exp(r), np.exp(-r)]))
        symp = gc.lift_unitary(haar_unitary(rng, 3)) @ q @ gc.lift_unitary(haar_unitary(rng, 3))
        rot, qmat, rot_prime = gc.bloch_messiah(symp)
        assert np.max(np.abs(rot @ qmat @ rot_prime - symp)) < 1e-9

    def test_rejects_non_symplectic(self):
        with pytest.raises(NotSymplectic):
            gc.bloch_messiah(np.diag([2.0, 2.0, 2.0, 2.0]))


class TestPurity:
    def test_thermal_half(self):
        assert gc.purity(gc.new_state(np.eye(2))) == pytest.approx(0.5, abs=1e-12)

    def test_product_formula_matches_determinant(self):
        for seed in range(10):
            state = gc.random_state(2, 1.0 + 0.3 * seed, "mixed", seed=seed)
            via_sigma = float(np.prod(1.0 / (2.0 * state.sigma)))
            assert abs(via_sigma - gc.purity(state)) < 1e-12

    def test_purity_one_iff_sigma_half(self):
        pure = gc.random_state(2, 1.4, "pure", seed=9)
        mixed = gc.random_state(2, 1.4, "mixed", seed=9)
        assert np.max(np.abs(pure.sigma - 0.5)) < 1e-9
        assert gc.purity(pure) == pytest.approx(1.0, abs=1e-9)
        assert gc.purity(mixed) < 1.0 - 1e-6
        assert np.max(np.abs(mixed.sigma - 0.5)) > 1e-6


class TestCharacteristicFunction:
    def test_normalization(self):
        state = gc.random_state(2, 1.2, "mixed", seed=3)
        assert gc.characteristic_function(state, np.zeros(4)) == pytest.approx(1.0)

    def test_vacuum_value(self):
        val = gc.characteristic_function(gc.vacuum(1), [1.0, 0.0])
        assert val == pytest.approx(np.exp(-0.25), abs=1e-14)

    def test_convex_decomposition_exponent_identity(self):
        # closed-form Gaussian integral of the mixing density against the
        # pure-core characteristic function reproduces the full one
        rng = np.random.default_rng(17)
        state = gc.random_state(2, 1.8, "mixed", seed=31)
        core = gc.pure_core(state.gamma)
        for _ in range(100):
            eta = rng.normal(size=4)
            lhs_exp = (-0.5 * eta @ core @ eta
                       - 0.5 * eta @ (state.gamma - core) @ eta
                       + 1j * eta @ state.disp)
            rhs = np.log(gc.characteristic_function(state, eta))
            assert abs(lhs_exp - rhs) < 1e-10 * max(1.0, abs(rhs))


class TestPureCore:
    def test_pure_state_fixed_point(self):
        state = gc.random_state(2, 1.1, "pure", seed=2)
        assert np.max(np.abs(gc.pure_core(state.gamma) - state.gamma)) < 1e-9

    def test_thermal_core_is_vacuum(self):
        assert np.allclose(gc.pure_core(np.eye(2)), np.eye(2) / 2, atol=1e-10)

    def test_residual_psd(self):
        for seed in range(25):
            state = gc.random_state(2, 0.5 + 0.2 * seed, "mixed", seed=seed)
            diff = state.gamma - gc.pure_core(state.gamma)
            assert np.linalg.eigvalsh(diff).min() >= -1e-10


class TestConvexWeight:
    def test_peak_value(self):
        state = gc.random_state(1, 1.0, "mixed", seed=4)
        core = gc.pure_core(state.gamma)
        diff = state.gamma - core
        expected = 1.0 / np.sqrt((2 * np.pi) ** 2 * np.linalg.det(diff))
        assert gc.convex_weight(state.gamma, core, np.zeros(2)) == pytest.approx(expected, rel=1e-12)

    def test_second_moment_matches_trace(self):
        state = gc.random_state(1, 1.0, "mixed", seed=4)
        core = gc.pure_core(state.gamma)
        trace = np.trace(state.gamma - core)
        span = 8 * np.sqrt(np.linalg.eigvalsh(state.gamma - core).max())

        moment, _ = integrate.dblquad(
            lambda y, x: gc.convex_weight(state.gamma, core, np.array([x, y])) * (x**2 + y**2),
            -span, span, -span, span, epsabs=1e-10, epsrel=1e-10,
        )
        assert moment == pytest.approx(trace, abs=1e-8)

    def test_pure_state_singular(self):
        state = gc.random_state(1, 1.0, "pure", seed=6)
        core = gc.pure_core(state.gamma)
        with pytest.raises(SingularMixture):
            gc.convex_weight(state.gamma, core, np.zeros(2))


class TestApplyRotation:
    def test_identity(self):
        state = gc.random_state(2, 1.5, "mixed", seed=8)
        rotated = gc.apply_rotation(state, np.eye(4))
        assert np.allclose(rotated.gamma, state.gamma)
        assert np.allclose(rotated.disp, state.disp)

    def test_vacuum_invariant(self):
        rng = np.random.default_rng(12)
        rot = gc.lift_unitary(haar_unitary(rng, 2))
        out = gc.apply_rotation(gc.vacuum(2), rot)
        assert np.max(np.abs(out.gamma - np.eye(4) / 2)) < 1e-12

    def test_photon_number_and_spectrum_preserved(self):
        rng = np.random.default_rng(13)
        for seed in range(10):
            state = gc.random_state(2, 1.0 + 0.5 * seed, "mixed", seed=seed)
            rot = gc.lift_unitary(haar_unitary(rng, 2))
            out = gc.apply_rotation(state, rot)
            assert abs(gc.mean_photon_number(out) - gc.mean_photon_number(state)) < 1e-12
            assert np.max(np.abs(out.sigma - state.sigma)) < 1e-12

    def test_rejects_non_symplectic_orthogonal(self):
        state = gc.vacuum(1)
        with pytest.raises(NotSymplecticOrthogonal):
            gc.apply_rotation(state, np.diag([2.0, 0.5]))


class TestRandomState:
    def test_zero_photons_pure_is_vacuum(self):
        state = gc.random_state(1, 0.0, "pure", seed=99)
        assert np.max(np.abs(state.gamma - np.eye(2) / 2)) < 1e-12
        assert np.max(np.abs(state.disp)) == 0

    def test_exact_photon_number(self):
        state = gc.random_state(2, 1.5, "mixed", seed=7)
        assert gc.mean_photon_number(state) == pytest.approx(1.5, abs=1e-10)

    def test_deterministic(self):
        a = gc.random_state(2, 1.5, "mixed", seed=7)
        b = gc.random_state(2, 1.5, "mixed", seed=7)
        assert np.array_equal(a.gamma, b.gamma)
        assert np.array_equal(a.disp, b.disp)

    def test_mixed_zero_photons_infeasible(self):
        with pytest.raises(InfeasibleTarget):
            gc.random_state(2, 0.0, "mixed", seed=0)

    def test_uncertainty_floor_battery(self):
        for seed in range(30):
            modes = 1 + seed % 3
            state = gc.random_state(modes, 0.2 + 0.15 * seed,
                                    "pure" if seed % 2 else "mixed", seed=seed)
            assert state.sigma.min() >= 0.5 - 1e-9


class TestSerialization:
    def test_roundtrip_bit_exact(self):
        state = gc.random_state(2, 1.7, "mixed", seed=5)
        text = gc.state_to_json(state)
        back = gc.state_from_json(text)
        assert np.array_equal(back.gamma, state.gamma)
        assert np.array_equal(back.disp, state.disp)

    def test_layout(self):
        payload = json.loads(gc.state_to_json(gc.vacuum(1)))
        assert payload["modes"] == 1
        assert payload["gamma"] == [0.5, 0.0, 0.0, 0.5]
        assert payload["disp"] == [0.0, 0.0]
