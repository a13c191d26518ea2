"""Tests for the circuit grammar, unitaries, generators and phase-space lifts."""

import numpy as np
import pytest

from gaussmet import circuit_model as cm
from gaussmet.errors import (
    CircuitSyntaxError,
    ModeOutOfRange,
    NoParameter,
    NotHermitian,
    NotUnitary,
)
from gaussmet.gaussian_core import symplectic_form

from conftest import CORPUS_SPECNORMS, haar_unitary, random_circuit

MZ1_TEXT = "modes 2\nbs 1 2 pi/4\nps 1 -phi\nbs 2 1 pi/4"


def beam_splitter_matrix(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


class TestParser:
    def test_mz1_structure(self):
        circuit = cm.parse_circuit(MZ1_TEXT)
        assert circuit.modes == 2
        assert len(circuit.elements) == 3
        bs1, ps, bs2 = circuit.elements
        assert isinstance(bs1, cm.BeamSplitter) and (bs1.m, bs1.n) == (1, 2)
        assert bs1.angle.coef == 0 and bs1.angle.const == pytest.approx(np.pi / 4)
        assert isinstance(ps, cm.PhaseShifter) and ps.phase.coef == -1 and ps.phase.const == 0
        assert (bs2.m, bs2.n) == (2, 1)

    def test_mz1_matches_conjugated_phase(self):
        circuit = cm.parse_circuit(MZ1_TEXT)
        phi = 0.7321
        bs = beam_splitter_matrix(np.pi / 4)
        expected = bs.conj().T @ np.diag([np.exp(-1j * phi), 1.0]) @ bs
        assert np.max(np.abs(cm.unitary_at(circuit, phi) - expected)) < 1e-14

    def test_no_parameter(self):
        with pytest.raises(NoParameter):
            cm.parse_circuit("modes 1\nps 1 0")

    def test_mode_out_of_range(self):
        with pytest.raises(ModeOutOfRange):
            cm.parse_circuit("modes 2\nbs 1 3 pi/4")
        with pytest.raises(ModeOutOfRange):
            cm.parse_circuit("modes 2\nbs 2 2 phi")
        with pytest.raises(ModeOutOfRange):
            cm.parse_circuit("modes 1\nps 2 phi")

    def test_syntax_errors_carry_position(self):
        with pytest.raises(CircuitSyntaxError) as err:
            cm.parse_circuit("modes 2\nbs 1 2 pi/4\nfoo 1 2")
        assert err.value.line == 3
        with pytest.raises(CircuitSyntaxError):
            cm.parse_circuit("bs 1 2 phi")  # missing modes header
        with pytest.raises(CircuitSyntaxError):
            cm.parse_circuit("modes 2\nbs 1 2")
        with pytest.raises(CircuitSyntaxError):
            cm.parse_circuit("modes 2\nps 1 2*")
        with pytest.raises(CircuitSyntaxError):
            cm.parse_circuit("modes two\nps 1 phi")

    def test_comments_and_blank_lines(self):
        text = "# header\n\nmodes 2  # inline\n bs 1 2 phi # trailing\n"
        circuit = cm.parse_circuit(text)
        assert circuit.modes == 2 and len(circuit.elements) == 1

    @pytest.mark.parametrize("token,value", [
        ("pi", np.pi),
        ("pi/4", np.pi / 4),
        ("3pi/2", 3 * np.pi / 2),
        ("-pi/3", -np.pi / 3),
        ("0.25", 0.25),
        ("-1.5", -1.5),
    ])
    def test_constants(self, token, value):
        circuit = cm.parse_circuit(f"modes 1\nps 1 phi+{token}" if value >= 0
                                   else f"modes 1\nps 1 phi{token}")
        assert circuit.elements[0].phase.const == pytest.approx(value)

    @pytest.mark.parametrize("token,coef,const", [
        ("phi", 1.0, 0.0),
        ("-phi", -1.0, 0.0),
        ("0.5*phi", 0.5, 0.0),
        ("-2*phi+pi", -2.0, np.pi),
        ("phi-pi/2", 1.0, -np.pi / 2),
        ("pi/4*phi", np.pi / 4, 0.0),
    ])
    def test_expressions(self, token, coef, const):
        circuit = cm.parse_circuit(f"modes 1\nps 1 {token}")
        expr = circuit.elements[0].phase
        assert expr.coef == pytest.approx(coef)
        assert expr.const == pytest.approx(const)


class TestUnitaryAt:
    def test_mz1_identity_at_zero(self, corpus):
        u = cm.unitary_at(corpus["mz1"], 0.0)
        assert np.max(np.abs(u - np.eye(2))) < 1e-14

    def test_two_mode_mixing_rotation(self, corpus):
        u = cm.unitary_at(corpus["two_mode_mixing"], np.pi / 4)
        assert np.max(np.abs(u - beam_splitter_matrix(np.pi / 4))) < 1e-14

    def test_random_circuit_unitarity(self):
        rng = np.random.default_rng(3)
        for seed in range(10):
            circuit = random_circuit(np.random.default_rng(seed), modes=3)
            u = cm.unitary_at(circuit, float(rng.uniform(-2, 2)))
            assert np.max(np.abs(u.conj().T @ u - np.eye(3))) < 1e-12


class TestGenerator:
    @pytest.mark.parametrize("name", list(CORPUS_SPECNORMS))
    def test_corpus_specnorms(self, corpus, name):
        assert cm.generator(corpus[name], 0.37).specnorm == pytest.approx(
            CORPUS_SPECNORMS[name], abs=1e-12)

    def test_hermiticity_and_eigendecomposition(self, corpus):
        for circuit in corpus.values():
            spec = cm.generator(circuit, 0.91)
            assert np.max(np.abs(spec.g - spec.g.conj().T)) < 1e-12
            recon = spec.V @ np.diag(spec.eps) @ spec.V.conj().T
            assert np.max(np.abs(recon - spec.g)) < 1e-12
            assert np.all(np.diff(np.abs(spec.eps)) <= 1e-12)

    def test_finite_difference_slope(self):
        # central-difference error scales as h^2: log-log slope 2.0 +/- 0.2
        circuit = random_circuit(np.random.default_rng(42), modes=3)
        phi = 0.453
        g = cm.generator(circuit, phi).g
        errs = []
        steps = (1e-3, 1e-4)
        for h in steps:
            u0 = cm.unitary_at(circuit, phi)
            du = (cm.unitary_at(circuit, phi + h) - cm.unitary_at(circuit, phi - h)) / (2 * h)
            fd = 1j * u0.conj().T @ du
            errs.append(np.linalg.norm(fd - g))
        slope = np.log(errs[0] / errs[1]) / np.log(steps[0] / steps[1])
        assert abs(slope - 2.0) <= 0.2

    def test_specnorm_invariant_under_constant_padding(self, corpus):
        base = corpus["mz1"]
        padded = cm.parse_circuit(
            "modes 2\nbs 2 1 0.3\nps 2 1.1\nbs 1 2 pi/4\nps 1 -phi\nbs 2 1 pi/4\nbs 1 2 0.9")
        assert cm.generator(padded, 0.2).specnorm == pytest.approx(
            cm.generator(base, 0.2).specnorm, abs=1e-12)


class TestPhaseSpaceLift:
    def test_identity(self):
        assert np.max(np.abs(cm.phase_space_lift(np.eye(2, dtype=complex)) - np.eye(4))) < 1e-15

    def test_single_mode_phase(self):
        rot = cm.phase_space_lift(np.array([[np.exp(-1j * np.pi / 2)]]))
        expected = np.array([[0.0, 1.0], [-1.0, 0.0]])  # rotation by -pi/2
        assert np.max(np.abs(rot - expected)) < 1e-14

    def test_random_symplectic_orthogonal(self):
        rng = np.random.default_rng(31)
        form = symplectic_form(3)
        for _ in range(10):
            rot = cm.phase_space_lift(haar_unitary(rng, 3))
            assert np.max(np.abs(rot.T @ form @ rot - form)) < 1e-11
            assert np.max(np.abs(rot.T @ rot - np.eye(6))) < 1e-11

    def test_homomorphism(self):
        rng = np.random.default_rng(8)
        u1, u2 = haar_unitary(rng, 3), haar_unitary(rng, 3)
        lhs = cm.phase_space_lift(u1 @ u2)
        rhs = cm.phase_space_lift(u1) @ cm.phase_space_lift(u2)
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_rejects_non_unitary(self):
        with pytest.raises(NotUnitary):
            cm.phase_space_lift(np.diag([2.0, 1.0]))


class TestLiftGenerator:
    def test_zero(self):
        assert np.max(np.abs(cm.lift_generator(np.zeros((2, 2))))) == 0

    def test_single_mode_unit_generator(self):
        gmat = cm.lift_generator(np.array([[1.0]]))
        assert np.max(np.abs(gmat - 1j * symplectic_form(1))) < 1e-14

    def test_matches_finite_difference_of_rotation(self, corpus):
        circuit = corpus["mz1"]
        phi, h = 0.3, 1e-4
        gmat = cm.lift_generator(cm.generator(circuit, phi).g)
        rot = cm.phase_space_lift(cm.unitary_at(circuit, phi))
        drot = (cm.phase_space_lift(cm.unitary_at(circuit, phi + h))
                - cm.phase_space_lift(cm.unitary_at(circuit, phi - h))) / (2 * h)
        assert np.max(np.abs(gmat - 1j * rot.T @ drot)) < 1e-6

    def test_eigenstructure_matches_diagonalizer(self, corpus):
        spec = cm.generator(corpus["three_mode_mixing"], 0.4)
        gmat = cm.lift_generator(spec.g)
        lift = cm.diagonalizer_lift(spec.V)
        eps2 = np.concatenate([spec.eps, spec.eps])
        expected = lift @ (np.diag(eps2) @ (1j * symplectic_form(3))) @ lift.T
        assert np.max(np.abs(gmat - expected)) < 1e-11

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            cm.lift_generator(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestDiagonalizerLift:
    def test_identity(self):
        assert np.max(np.abs(cm.diagonalizer_lift(np.eye(3, dtype=complex)) - np.eye(6))) < 1e-15

    def test_mz1_lift_symplectic(self, corpus):
        spec = cm.generator(corpus["mz1"], 0.3)
        lift = cm.diagonalizer_lift(spec.V)
        form = symplectic_form(2)
        assert np.max(np.abs(lift.T @ form @ lift - form)) < 1e-11

    def test_vacuum_invariance(self, corpus):
        spec = cm.generator(corpus["mz1"], 0.3)
        lift = cm.diagonalizer_lift(spec.V)
        assert np.max(np.abs(lift @ (np.eye(4) / 2) @ lift.T - np.eye(4) / 2)) < 1e-12
