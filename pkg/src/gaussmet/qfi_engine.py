"""Quantum Fisher information of Gaussian probes through passive circuits.

Output-state derivatives come from the exact circuit generator; the QFI is
F = Tr(Lambda dGamma) + dd^T Gamma^-1 dd with Lambda the symmetric solution of
the quadrature SLD equation.  Pure states take the closed form
F = Tr[(Gamma^-1 dGamma)^2] / 4 + dd^T Gamma^-1 dd instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import circuit_model as cm
from .errors import NotHermitian, NotPure, PrecondViolated, SingularBeyondPureTol
from .gaussian_core import GaussianState, mean_photon_number, symplectic_eigenvalues, symplectic_form

# A symplectic eigenvalue this close to 1/2 makes the vectorized SLD system
# numerically singular; switch to the minimum-norm least-squares branch.
STEIN_SINGULAR_TOL = 1e-6
LSTSQ_RCOND = 1e-10
PURE_TOL = 1e-9


@dataclass(frozen=True)
class QfiReport:
    """QFI value with its split, the universal bound and solver residuals."""

    qfi: float
    f1: float
    f2: float
    bound: float
    saturation_residual: float
    lambda_residual: float
    route: str

    def to_dict(self) -> dict:
        return {
            "qfi": self.qfi,
            "f1": self.f1,
            "f2": self.f2,
            "bound": self.bound,
            "saturation_residual": self.saturation_residual,
            "lambda_residual": self.lambda_residual,
            "route": self.route,
        }


@dataclass(frozen=True)
class SldCoefficients:
    """Quadratic/linear/scalar coefficients of the symmetric logarithmic derivative.

    L = (z - d)^T quad (z - d) + lin . (z - d) + scalar, with scalar fixed to
    -Tr(quad Gamma) so that the SLD has zero mean on the state.
    """

    quad: np.ndarray
    lin: np.ndarray
    scalar: float


@dataclass(frozen=True)
class LemmaReport:
    """Slack and equality data for the four Hermitian trace inequalities."""

    slack_commutator: float
    slack_transpose: float
    slack_specnorm: float
    slack_rank_one: float
    equality_commutator: bool
    equality_transpose: bool
    equality_specnorm: bool
    equality_rank_one: bool
    psd_inputs: bool

    def all_hold(self, tol: float = 1e-10) -> bool:
        return min(self.slack_commutator, self.slack_transpose,
                   self.slack_specnorm, self.slack_rank_one) >= -tol


def circuit_frechet(circuit, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Phase-space rotation R(phi) and its exact derivative dR/dphi.

    dR/dphi = R K with the real antisymmetric K = -i G reconstructed from the
    circuit generator.
    """
    lift = cm.circuit_phase_space(circuit, phi)
    kmat = (-1j * lift.G)
    if np.max(np.abs(kmat.imag)) > 1e-11:
        raise NotHermitian("phase-space generator is not purely imaginary")
    return lift.R, lift.R @ kmat.real


def solve_lambda(gamma_phi, dgamma_phi) -> tuple[np.ndarray, float]:
    """Solve the quadrature SLD equation for the symmetric matrix Lambda.

    With A = 2 Gamma iJ and X = iJ Lambda the equation is the Stein form
    X - A^-1 X A^-1 = -d(A^-1)/dphi; in real arithmetic it becomes
    Y + B Y B = -2 dGamma J with B = 2 Gamma J, Y = J Lambda, solved by
    vectorization.  States with a symplectic eigenvalue within 1e-6 of 1/2
    make the system singular; there the solution is no longer unique and the
    pure-boundary representative Lambda = -d(Gamma^-1)/4 (the limit of the
    mixed-state solution, to which it converges quadratically) is returned
    when it solves the system, with minimum-norm least squares as fallback.
    The QFI is insensitive to the choice within the solution set.

    Returns:
        (Lambda, residual): the symmetrized solution and the Frobenius norm
        of the backsubstitution residual of the Stein equation above.

    Raises:
        SingularBeyondPureTol: the least-squares residual is too large, which
            signals an inconsistent (Gamma, dGamma) pair.
    """
    gamma_phi = np.asarray(gamma_phi, dtype=float)
    dgamma_phi = np.asarray(dgamma_phi, dtype=float)
    dim = gamma_phi.shape[0]
    form = symplectic_form(dim // 2)
    bmat = 2 * gamma_phi @ form
    cmat = -2 * dgamma_phi @ form

    def residual_of(lam):
        ylam = form @ lam
        return float(np.linalg.norm(ylam + bmat @ ylam @ bmat - cmat))

    scale = max(1.0, float(np.linalg.norm(cmat)))
    sigma_min = symplectic_eigenvalues(gamma_phi).min()
    if sigma_min < 0.5 + STEIN_SINGULAR_TOL:
        lam = lambda_pure(gamma_phi, dgamma_phi)
        if residual_of(lam) > 1e-10 * scale:
            op = np.eye(dim * dim) + np.kron(bmat.T, bmat)
            sol = np.linalg.lstsq(op, cmat.reshape(-1, order="F"), rcond=LSTSQ_RCOND)[0]
            lam = -form @ sol.reshape(dim, dim, order="F")
            lam = (lam + lam.T) / 2
    else:
        op = np.eye(dim * dim) + np.kron(bmat.T, bmat)
        sol = np.linalg.solve(op, cmat.reshape(-1, order="F"))
        lam = -form @ sol.reshape(dim, dim, order="F")
        lam = (lam + lam.T) / 2

    residual = residual_of(lam)
    if residual > 1e-6 * scale:
        raise SingularBeyondPureTol(
            f"SLD equation residual {residual:.3g} exceeds tolerance"
        )
    return lam, residual


def _lambda_residual(gamma_phi, dgamma_phi, lam) -> float:
    """Backsubstitution residual of the Stein form of the SLD equation."""
    form = symplectic_form(gamma_phi.shape[0] // 2)
    bmat = 2 * gamma_phi @ form
    ylam = form @ lam
    return float(np.linalg.norm(ylam + bmat @ ylam @ bmat + 2 * dgamma_phi @ form))


def lambda_pure(gamma_phi, dgamma_phi) -> np.ndarray:
    """Closed-form Lambda = -d(Gamma^-1)/dphi / 4 valid on pure states."""
    inv = np.linalg.inv(gamma_phi)
    lam = 0.25 * inv @ dgamma_phi @ inv
    return (lam + lam.T) / 2


def qfi_bound(g_specnorm: float, nbar: float) -> float:
    """Universal ceiling 8 |g|^2 nbar (nbar + 1) on the QFI."""
    return 8.0 * g_specnorm**2 * nbar * (nbar + 1.0)


def output_derivatives(state: GaussianState, circuit, phi: float):
    """Rotated covariance/displacement and their exact phi-derivatives."""
    rot, drot = circuit_frechet(circuit, phi)
    gamma_phi = rot @ state.gamma @ rot.T
    dgamma_phi = drot @ state.gamma @ rot.T + rot @ state.gamma @ drot.T
    disp_phi = rot @ state.disp
    ddisp_phi = drot @ state.disp
    return gamma_phi, dgamma_phi, disp_phi, ddisp_phi


def qfi_from_rotation(state: GaussianState, rot, drot, specnorm: float,
                      pure_tol: float = PURE_TOL) -> QfiReport:
    """QFI given a phase-space rotation, its derivative and the generator norm.

    Matrix-level core shared by circuit evaluation and composed sequential
    circuits.
    """
    rot = np.asarray(rot, dtype=float)
    drot = np.asarray(drot, dtype=float)
    gamma_phi = rot @ state.gamma @ rot.T
    dgamma_phi = drot @ state.gamma @ rot.T + rot @ state.gamma @ drot.T
    ddisp_phi = drot @ state.disp
    inv_gamma_phi = np.linalg.inv(gamma_phi)

    disp_term = float(ddisp_phi @ inv_gamma_phi @ ddisp_phi)
    if state.is_pure(pure_tol):
        route = "pure-closed-form"
        prod = inv_gamma_phi @ dgamma_phi
        value = 0.25 * float(np.trace(prod @ prod)) + disp_term
        lam = lambda_pure(gamma_phi, dgamma_phi)
        residual = _lambda_residual(gamma_phi, dgamma_phi, lam)
        # Input-frame split: f1 from the covariance rotation, f2 from the
        # displacement; algebraically f1 + f2 equals the closed form above.
        kmat = rot.T @ drot
        inv_gamma = np.linalg.inv(state.gamma)
        f1 = 0.5 * float(np.trace(kmat @ kmat - kmat @ inv_gamma @ kmat @ state.gamma))
        f2 = float((kmat @ state.disp) @ inv_gamma @ (kmat @ state.disp))
    else:
        route = "mixed-stein"
        lam, residual = solve_lambda(gamma_phi, dgamma_phi)
        f1 = float(np.sum(lam * dgamma_phi))
        f2 = disp_term
        value = f1 + f2

    bound = qfi_bound(specnorm, mean_photon_number(state))
    return QfiReport(
        qfi=value,
        f1=f1,
        f2=f2,
        bound=bound,
        saturation_residual=bound - value,
        lambda_residual=residual,
        route=route,
    )


def qfi(state: GaussianState, circuit, phi: float, pure_tol: float = PURE_TOL) -> QfiReport:
    """QFI of a Gaussian probe through the circuit at parameter value phi.

    The route is selected by purity: states whose symplectic eigenvalues all
    sit within ``pure_tol`` of 1/2 take the pure closed form, everything else
    the Stein solver.  The f1/f2 split is the input-frame rotation term and
    displacement term respectively.

    Args:
        state: input Gaussian probe.
        circuit: parsed circuit.
        phi: true parameter value.
        pure_tol: symplectic-eigenvalue tolerance for the pure route.

    Returns:
        QfiReport; ``saturation_residual`` is bound - qfi and must not be
        more negative than -1e-8 * bound.
    """
    rot, drot = circuit_frechet(circuit, phi)
    specnorm = cm.generator(circuit, phi).specnorm
    return qfi_from_rotation(state, rot, drot, specnorm, pure_tol)


def qfi_pure_linear(gamma, disp, g, unitary, squeezings) -> tuple[float, float]:
    """Canonical-frame QFI split for a pure state Gamma = R Q^2 R^T / 2.

    Args:
        gamma: pure-state covariance (consistency-checked against the
            canonical data).
        disp: displacement vector.
        g: Hermitian circuit generator at the working point.
        unitary: the M x M unitary whose lift is R.
        squeezings: the M squeezing values r (descending).

    Returns:
        (f1, f2) with
        f1 = Tr[(U^dag g U cosh 2r)^2] - Tr(g^2)
             + Tr(U^dag g U sinh 2r U^T g* U* sinh 2r)
        and f2 = dd-free displacement term d^T G Gamma^-1 G d.

    Raises:
        NotPure: gamma does not reproduce R Q^2 R^T / 2.
    """
    gamma = np.asarray(gamma, dtype=float)
    disp = np.asarray(disp, dtype=float)
    g = np.asarray(g, dtype=complex)
    unitary = np.asarray(unitary, dtype=complex)
    squeezings = np.asarray(squeezings, dtype=float)

    rot = cm.phase_space_lift(unitary)
    qsq = np.diag(np.concatenate([np.exp(2 * squeezings), np.exp(-2 * squeezings)]))
    recon = 0.5 * rot @ qsq @ rot.T
    if np.max(np.abs(recon - gamma)) > 1e-8 * max(1.0, np.max(np.abs(gamma))):
        raise NotPure("covariance is not the pure canonical form R Q^2 R^T / 2")

    rotated = unitary.conj().T @ g @ unitary
    cosh2r = np.cosh(2 * squeezings)
    sinh2r = np.sinh(2 * squeezings)
    term_cosh = rotated * cosh2r[np.newaxis, :]
    f1 = float(np.real(
        np.trace(term_cosh @ term_cosh)
        - np.trace(g @ g)
        + np.trace((rotated * sinh2r[np.newaxis, :])
                   @ (rotated.conj() * sinh2r[np.newaxis, :]))
    ))

    gmat = cm.lift_generator(g)
    kmat = (-1j * gmat).real
    vec = kmat @ disp
    f2 = float(vec @ np.linalg.solve(gamma, vec))
    return f1, f2


def sld(state: GaussianState, circuit, phi: float, pure_tol: float = PURE_TOL) -> SldCoefficients:
    """Coefficients of the SLD of the output state.

    L = (z - d)^T Lambda (z - d) + dd^T Gamma^-1 (z - d) - Tr(Lambda Gamma);
    its Gaussian moments satisfy <L> = 0 and <L^2> = QFI.
    """
    gamma_phi, dgamma_phi, _, ddisp_phi = output_derivatives(state, circuit, phi)
    if state.is_pure(pure_tol):
        lam = lambda_pure(gamma_phi, dgamma_phi)
    else:
        lam, _ = solve_lambda(gamma_phi, dgamma_phi)
    lin = np.linalg.solve(gamma_phi, ddisp_phi)
    scalar = -float(np.sum(lam * gamma_phi))
    return SldCoefficients(quad=lam, lin=lin, scalar=scalar)


def sld_moments(coeffs: SldCoefficients, gamma_phi) -> tuple[float, float]:
    """Mean and second moment of the SLD on a Gaussian state by Wick's theorem.

    For L = (z - d)^T Q (z - d) + b . (z - d) + s:
    <L> = Tr(Q Gamma) + s and
    <L^2> = Var + <L>^2 with Var = 2 Tr(Q Gamma Q Gamma) + Tr(Q J Q J) / 2
    + b^T Gamma b (the J term carries the canonical commutators).  The
    displacement drops out because the coefficients are written around d.
    """
    gamma_phi = np.asarray(gamma_phi, dtype=float)
    form = symplectic_form(gamma_phi.shape[0] // 2)
    quad, lin = coeffs.quad, coeffs.lin
    mean = float(np.sum(quad * gamma_phi)) + coeffs.scalar
    qg = quad @ gamma_phi
    qj = quad @ form
    variance = 2 * float(np.trace(qg @ qg)) + 0.5 * float(np.trace(qj @ qj)) \
        + float(lin @ gamma_phi @ lin)
    return mean, variance + mean**2


def quadratic_form_of_generator(g) -> tuple[np.ndarray, float]:
    """Real symmetric H and constant c with sum g_mn a_m^dag a_n = z^T H z / 2 + c.

    H = [[C, -D], [D, C]] for g = C + iD and c = -Tr(g) / 2.
    """
    g = np.asarray(g, dtype=complex)
    if np.max(np.abs(g - g.conj().T)) > 1e-9:
        raise NotHermitian("generator matrix is not Hermitian")
    cmat, dmat = g.real, g.imag
    hmat = np.block([[cmat, -dmat], [dmat, cmat]])
    return hmat, -0.5 * float(np.trace(g).real)


def generator_variance(state: GaussianState, g) -> tuple[float, float]:
    """Mean and variance of the quadratic observable sum g_mn a_m^dag a_n.

    Gaussian moments via Wick's theorem:
    mean = Tr(H Gamma) / 2 + d^T H d / 2 - Tr(g) / 2 and
    var = Tr(H Gamma H Gamma) / 2 + Tr(H J H J) / 8 + (H d)^T Gamma (H d).
    """
    hmat, const = quadratic_form_of_generator(g)
    gamma, disp = state.gamma, state.disp
    form = symplectic_form(state.modes)
    mean = 0.5 * float(np.trace(hmat @ gamma)) + 0.5 * float(disp @ hmat @ disp) + const
    hg = hmat @ gamma
    hj = hmat @ form
    hd = hmat @ disp
    variance = 0.5 * float(np.trace(hg @ hg)) + 0.125 * float(np.trace(hj @ hj)) \
        + float(hd @ gamma @ hd)
    return mean, variance


def pure_state_overlap(gamma1, disp1, gamma2, disp2) -> float:
    """|<psi1|psi2>| for two pure Gaussian states.

    |<psi1|psi2>|^2 = exp(-delta^T (G1 + G2)^-1 delta / 2) / sqrt(det(G1 + G2)).
    """
    total = np.asarray(gamma1) + np.asarray(gamma2)
    delta = np.asarray(disp1) - np.asarray(disp2)
    sign, logdet = np.linalg.slogdet(total)
    if sign <= 0:
        raise PrecondViolated("covariance sum must be positive-definite")
    quad = delta @ np.linalg.solve(total, delta)
    return float(np.exp(-0.25 * quad - 0.25 * logdet))


def qfi_fidelity_fd(state: GaussianState, circuit, phi: float, step: float = 1e-3) -> float:
    """Finite-difference fidelity oracle for the pure-state QFI.

    Uses F ~ 8 (1 - |<psi_phi|psi_phi+h>|) / h^2, Richardson-extrapolated once;
    independent of the closed-form QFI path.

    Raises:
        NotPure: the probe is mixed.
    """
    if not state.is_pure(1e-8):
        raise NotPure("fidelity oracle requires a pure probe")

    def output(at):
        rot = cm.phase_space_lift(cm.unitary_at(circuit, at))
        return rot @ state.gamma @ rot.T, rot @ state.disp

    def estimate(h):
        g1, d1 = output(phi)
        g2, d2 = output(phi + h)
        return 8 * (1 - pure_state_overlap(g1, d1, g2, d2)) / h**2

    return 2 * estimate(step / 2) - estimate(step)


def verify_matrix_lemmas(a, b) -> LemmaReport:
    """Evaluate four Hermitian trace inequalities on the pair (A, B).

    1. Tr[(AB)^2] <= Tr(A^2 B^2) for Hermitian A, B (equality iff [A,B] = 0).
    2. Tr(A^T B^T A B) <= Tr(A^2 B^2) for Hermitian A, B (equality iff
       AB = (AB)^T).
    3. Tr(AB) <= ||A|| Tr(B), which needs A, B positive semi-definite
       (equality iff supp B lies in the top eigenspace of A).
    4. Tr(A^2) <= (Tr A)^2, which needs A positive semi-definite (equality
       iff exactly one nonvanishing, non-degenerate eigenvalue).

    Lemmas 3 and 4 are evaluated on (A, B) directly when both are PSD within
    tolerance (``psd_inputs`` is then True) and on the PSD pair (A^2, B^2)
    otherwise, so every report carries all four slacks.

    Raises:
        PrecondViolated: inputs are not Hermitian or shapes differ.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PrecondViolated("A and B must be square matrices of equal size")
    scale = max(1.0, np.max(np.abs(a)), np.max(np.abs(b)))
    if np.max(np.abs(a - a.conj().T)) > 1e-9 * scale or \
            np.max(np.abs(b - b.conj().T)) > 1e-9 * scale:
        raise PrecondViolated("A and B must be Hermitian")

    ab = a @ b
    rhs = float(np.trace(a @ a @ b @ b).real)
    lhs1 = float(np.trace(ab @ ab).real)
    lhs2 = float(np.trace(a.T @ b.T @ ab).real)
    tol = 1e-9 * scale**2
    eq1 = bool(np.max(np.abs(ab - b @ a)) < tol)
    eq2 = bool(np.max(np.abs(ab - ab.T)) < tol)

    psd_inputs = bool(
        np.linalg.eigvalsh(a).min() >= -1e-9 * scale
        and np.linalg.eigvalsh(b).min() >= -1e-9 * scale
    )
    pa, pb = (a, b) if psd_inputs else (a @ a, b @ b)
    eigs_pa, vecs_pa = np.linalg.eigh(pa)
    norm_pa = float(max(eigs_pa[-1], 0.0))
    lhs3 = float(np.trace(pa @ pb).real)
    rhs3 = norm_pa * float(np.trace(pb).real)
    lhs4 = float(np.trace(pa @ pa).real)
    rhs4 = float(np.trace(pa).real) ** 2

    non_top = vecs_pa[:, (norm_pa - eigs_pa) > tol]
    eq3 = bool(float(np.max(np.abs(non_top.conj().T @ pb @ non_top), initial=0.0)) < tol)
    eq4 = bool(eigs_pa[-1] > tol and np.all(np.abs(eigs_pa[:-1]) < tol)) \
        or len(eigs_pa) == 1

    return LemmaReport(
        slack_commutator=rhs - lhs1,
        slack_transpose=rhs - lhs2,
        slack_specnorm=rhs3 - lhs3,
        slack_rank_one=rhs4 - lhs4,
        equality_commutator=eq1,
        equality_transpose=eq2,
        equality_specnorm=eq3,
        equality_rank_one=eq4,
        psd_inputs=psd_inputs,
    )
