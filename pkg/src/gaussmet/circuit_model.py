"""Parameterized passive linear circuits: text grammar, unitaries, generators.

Circuit files hold one statement per line (``#`` starts a comment):

    modes <M>            first statement
    bs <m> <n> <expr>    beam splitter on modes m, n (1-based)
    ps <m> <expr>        phase shifter on mode m
    expr := [coef*]phi[+const] | const
    const := decimal | [k]pi[/d]

Element order is application order: the first line acts on the state first.
A beam splitter ``bs m n t`` mixes the mode operators as
(a_m, a_n) -> (a_m cos t - a_n sin t, a_m sin t + a_n cos t); a phase shifter
``ps m t`` advances mode m as a_m -> e^{it} a_m.  All angles are in radians
and every element parameter is an affine function of the single estimation
parameter phi, so the generator i U^dag dU/dphi is evaluated exactly by the
product rule.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import (
    CircuitSyntaxError,
    ModeOutOfRange,
    NoParameter,
    NotHermitian,
    NotUnitary,
)
from .gaussian_core import basis_change, lift_unitary

UNITARY_TOL = 1e-9
HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class AffineExpr:
    """Angle expression coef * phi + const."""

    coef: float
    const: float

    def __call__(self, phi: float) -> float:
        return self.coef * phi + self.const


@dataclass(frozen=True)
class BeamSplitter:
    m: int
    n: int
    angle: AffineExpr


@dataclass(frozen=True)
class PhaseShifter:
    m: int
    phase: AffineExpr


@dataclass(frozen=True)
class ParamCircuit:
    """Parsed circuit: mode count plus elements in application order."""

    modes: int
    elements: tuple


@dataclass(frozen=True)
class GeneratorSpectrum:
    """Hermitian generator g, unitary diagonalizer V, eigenvalues by |.| desc."""

    g: np.ndarray
    V: np.ndarray
    eps: np.ndarray
    specnorm: float


@dataclass(frozen=True)
class PhaseSpaceLift:
    """Orthogonal symplectic rotation R and generator G = i R^T dR/dphi."""

    R: np.ndarray
    G: np.ndarray


_PI_FORM = re.compile(r"^([0-9]+(?:\.[0-9]+)?)?pi(?:/([0-9]+(?:\.[0-9]+)?))?$")
_DECIMAL = re.compile(r"^[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?$")


def _parse_const(token: str) -> float:
    """Parse ``decimal | [k]pi[/d]`` with an optional leading sign."""
    sign = 1.0
    if token.startswith(("+", "-")):
        if token[0] == "-":
            sign = -1.0
        token = token[1:]
    match = _PI_FORM.match(token)
    if match:
        value = np.pi
        if match.group(1):
            value *= float(match.group(1))
        if match.group(2):
            value /= float(match.group(2))
        return sign * value
    if _DECIMAL.match(token):
        return sign * float(token)
    raise ValueError(f"bad constant {token!r}")


def _parse_expr(token: str) -> AffineExpr:
    """Parse ``[coef*]phi[+const] | const``."""
    text = token.replace(" ", "")
    if "phi" not in text:
        return AffineExpr(0.0, _parse_const(text))
    head, _, tail = text.partition("phi")
    if head in ("", "+"):
        coef = 1.0
    elif head == "-":
        coef = -1.0
    elif head.endswith("*"):
        coef = _parse_const(head[:-1])
    else:
        raise ValueError(f"bad coefficient {head!r} (use coef*phi)")
    if tail == "":
        const = 0.0
    elif tail.startswith(("+", "-")):
        const = _parse_const(tail)
    else:
        raise ValueError(f"bad offset {tail!r} (use phi+const)")
    return AffineExpr(coef, const)


def parse_circuit(text: str) -> ParamCircuit:
    """Parse circuit source text.

    Raises:
        CircuitSyntaxError: malformed statement (carries line and column).
        ModeOutOfRange: element mode index outside 1..M, or m == n.
        NoParameter: no element depends on phi.
    """
    modes = None
    elements = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        keyword = fields[0]

        if modes is None:
            if keyword != "modes" or len(fields) != 2:
                raise CircuitSyntaxError("expected 'modes <M>' first", lineno)
            try:
                modes = int(fields[1])
            except ValueError:
                raise CircuitSyntaxError(f"bad mode count {fields[1]!r}", lineno,
                                         raw.index(fields[1]) + 1) from None
            if modes < 1:
                raise CircuitSyntaxError("mode count must be positive", lineno)
            continue

        if keyword == "bs":
            if len(fields) != 4:
                raise CircuitSyntaxError("expected 'bs <m> <n> <expr>'", lineno)
            m, n = _parse_mode(fields[1], raw, lineno), _parse_mode(fields[2], raw, lineno)
            if not (1 <= m <= modes and 1 <= n <= modes):
                raise ModeOutOfRange(f"line {lineno}: beam splitter modes ({m}, {n}) "
                                     f"outside 1..{modes}")
            if m == n:
                raise ModeOutOfRange(f"line {lineno}: beam splitter needs two distinct modes")
            elements.append(BeamSplitter(m, n, _parse_expr_at(fields[3], raw, lineno)))
        elif keyword == "ps":
            if len(fields) != 3:
                raise CircuitSyntaxError("expected 'ps <m> <expr>'", lineno)
            m = _parse_mode(fields[1], raw, lineno)
            if not 1 <= m <= modes:
                raise ModeOutOfRange(f"line {lineno}: phase shifter mode {m} outside 1..{modes}")
            elements.append(PhaseShifter(m, _parse_expr_at(fields[2], raw, lineno)))
        else:
            raise CircuitSyntaxError(f"unknown statement {keyword!r}", lineno)

    if modes is None:
        raise CircuitSyntaxError("empty circuit: expected 'modes <M>'", 1)
    if not any(_element_expr(el).coef != 0 for el in elements):
        raise NoParameter("no circuit element depends on phi")
    return ParamCircuit(modes=modes, elements=tuple(elements))


def _parse_mode(token: str, raw: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise CircuitSyntaxError(f"bad mode index {token!r}", lineno,
                                 raw.index(token) + 1) from None


def _parse_expr_at(token: str, raw: str, lineno: int) -> AffineExpr:
    try:
        return _parse_expr(token)
    except ValueError as exc:
        raise CircuitSyntaxError(str(exc), lineno, raw.index(token) + 1) from None


def _element_expr(element) -> AffineExpr:
    return element.angle if isinstance(element, BeamSplitter) else element.phase


def _element_unitary(element, modes: int, phi: float) -> np.ndarray:
    mat = np.eye(modes, dtype=complex)
    if isinstance(element, BeamSplitter):
        theta = element.angle(phi)
        i, j = element.m - 1, element.n - 1
        mat[i, i] = mat[j, j] = np.cos(theta)
        mat[i, j] = -np.sin(theta)
        mat[j, i] = np.sin(theta)
    else:
        mat[element.m - 1, element.m - 1] = np.exp(1j * element.phase(phi))
    return mat


def _element_derivative_factor(element, modes: int) -> np.ndarray:
    """Hermitian h with dE/dphi = -i h E (constant for affine parameters)."""
    herm = np.zeros((modes, modes), dtype=complex)
    if isinstance(element, BeamSplitter):
        i, j = element.m - 1, element.n - 1
        herm[i, j] = -1j * element.angle.coef
        herm[j, i] = 1j * element.angle.coef
    else:
        herm[element.m - 1, element.m - 1] = -element.phase.coef
    return herm


def unitary_at(circuit: ParamCircuit, phi: float) -> np.ndarray:
    """Evaluate the M x M circuit unitary at phi (first element rightmost)."""
    mat = np.eye(circuit.modes, dtype=complex)
    for element in circuit.elements:
        mat = _element_unitary(element, circuit.modes, phi) @ mat
    return mat


def generator(circuit: ParamCircuit, phi: float) -> GeneratorSpectrum:
    """Hermitian generator i U^dag dU/dphi with its spectral data.

    Assembled exactly by the product rule: each element contributes its
    constant Hermitian derivative factor conjugated by the partial product
    of everything applied before and including it.

    Eigenvalues are sorted by descending magnitude (descending value breaks
    magnitude ties); eigenvector phases are fixed deterministically.
    """
    modes = circuit.modes
    gen = np.zeros((modes, modes), dtype=complex)
    prefix = np.eye(modes, dtype=complex)
    for element in circuit.elements:
        prefix = _element_unitary(element, modes, phi) @ prefix
        expr = _element_expr(element)
        if expr.coef != 0:
            gen += prefix.conj().T @ _element_derivative_factor(element, modes) @ prefix
    gen = (gen + gen.conj().T) / 2
    eps, vecs = np.linalg.eigh(gen)
    order = np.lexsort((-eps, -np.abs(eps)))
    eps = eps[order]
    vecs = vecs[:, order]
    for j in range(modes):
        col = vecs[:, j]
        lead = np.flatnonzero(np.abs(col) > 0.5 * np.abs(col).max())[0]
        vecs[:, j] = col * (np.conj(col[lead]) / abs(col[lead]))
    return GeneratorSpectrum(g=gen, V=vecs, eps=eps, specnorm=float(np.abs(eps[0])))


def phase_space_lift(u: np.ndarray) -> np.ndarray:
    """Real orthogonal symplectic rotation W^dag diag(U, U*) W of a unitary U.

    Raises:
        NotUnitary: U^dag U deviates from the identity beyond tolerance.
    """
    u = np.asarray(u, dtype=complex)
    modes = u.shape[0]
    if np.max(np.abs(u.conj().T @ u - np.eye(modes))) > UNITARY_TOL:
        raise NotUnitary("matrix is not unitary within tolerance")
    wmat = basis_change(modes)
    lifted = wmat.conj().T @ np.block(
        [[u, np.zeros_like(u)], [np.zeros_like(u), u.conj()]]
    ) @ wmat
    if np.max(np.abs(lifted.imag)) > 1e-12:
        raise NotUnitary("phase-space lift has an imaginary residue")
    return lifted.real


def diagonalizer_lift(v: np.ndarray) -> np.ndarray:
    """Symplectic orthogonal lift of a generator diagonalizer (same map as
    :func:`phase_space_lift`); used to rotate probe states into place."""
    return phase_space_lift(v)


def lift_generator(g: np.ndarray) -> np.ndarray:
    """Phase-space generator G = W^dag diag(g, -g*) W of a Hermitian g.

    G is purely imaginary and Hermitian, and satisfies G = i R^T dR/dphi for
    the lifted rotation R.

    Raises:
        NotHermitian: g deviates from Hermiticity beyond tolerance.
    """
    g = np.asarray(g, dtype=complex)
    modes = g.shape[0]
    if np.max(np.abs(g - g.conj().T)) > UNITARY_TOL:
        raise NotHermitian("generator matrix is not Hermitian")
    wmat = basis_change(modes)
    return wmat.conj().T @ np.block(
        [[g, np.zeros_like(g)], [np.zeros_like(g), -g.conj()]]
    ) @ wmat


def circuit_phase_space(circuit: ParamCircuit, phi: float) -> PhaseSpaceLift:
    """Bundle R = lift(U(phi)) and G = lift of the generator at phi."""
    rot = phase_space_lift(unitary_at(circuit, phi))
    gmat = lift_generator(generator(circuit, phi).g)
    return PhaseSpaceLift(R=rot, G=gmat)


_CORPUS = ("mz1", "mz2", "two_mode_mixing", "three_mode_mixing")


def corpus_names() -> tuple:
    """Names of the circuit files shipped with the package."""
    return _CORPUS


def corpus_text(name: str) -> str:
    """Source text of a shipped corpus circuit."""
    if name not in _CORPUS:
        raise KeyError(f"unknown corpus circuit {name!r}; choose from {_CORPUS}")
    return resources.files("gaussmet").joinpath(f"circuits/{name}.pc").read_text()


def load_corpus(name: str) -> ParamCircuit:
    """Parse a shipped corpus circuit by name."""
    return parse_circuit(corpus_text(name))


__all__ = [
    "AffineExpr",
    "BeamSplitter",
    "PhaseShifter",
    "ParamCircuit",
    "GeneratorSpectrum",
    "PhaseSpaceLift",
    "parse_circuit",
    "unitary_at",
    "generator",
    "phase_space_lift",
    "diagonalizer_lift",
    "lift_generator",
    "circuit_phase_space",
    "corpus_names",
    "corpus_text",
    "load_corpus",
]
