"""Gaussian states in quadrature phase space and their symplectic decompositions.

Conventions (hbar = 1): quadratures are ordered x_1..x_M, y_1..y_M, the vacuum
covariance is I/2, and the symplectic form is J = [[0, I], [-I, 0]].  A state is
a real symmetric positive-definite covariance matrix ``gamma`` (2M x 2M) plus a
real displacement vector ``disp`` (2M).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import optimize

from .errors import (
    DecompositionFailed,
    DimensionMismatch,
    InfeasibleTarget,
    NotPositiveDefinite,
    NotSymplectic,
    NotSymplecticOrthogonal,
    SingularMixture,
    UncertaintyViolated,
)

# Absolute tolerances used throughout (double precision, 2M <= 16).
SYMMETRY_TOL = 1e-9
SYMPLECTIC_TOL = 1e-9
UNCERTAINTY_TOL = 1e-9
RECON_TOL = 1e-10


def symplectic_form(modes: int) -> np.ndarray:
    """Return the 2M x 2M symplectic form J = [[0, I], [-I, 0]]."""
    eye = np.eye(modes)
    zero = np.zeros((modes, modes))
    return np.block([[zero, eye], [-eye, zero]])


def basis_change(modes: int) -> np.ndarray:
    """Unitary W mapping quadratures (x, y) to mode operators (a, a^dag).

    W = [[I, iI], [I, -iI]] / sqrt(2); for any M x M unitary U the matrix
    W^dag diag(U, U*) W is real orthogonal symplectic.
    """
    eye = np.eye(modes)
    return np.block([[eye, 1j * eye], [eye, -1j * eye]]) / np.sqrt(2)


def lift_unitary(u: np.ndarray) -> np.ndarray:
    """Lift an M x M unitary to its real orthogonal symplectic phase-space action.

    Equals W^dag diag(U, U*) W = [[Re U, -Im U], [Im U, Re U]].
    """
    u = np.asarray(u)
    return np.block([[u.real, -u.imag], [u.imag, u.real]])


def _check_cov_shape(gamma: np.ndarray, disp: np.ndarray) -> int:
    if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
        raise DimensionMismatch(f"covariance must be square, got {gamma.shape}")
    dim = gamma.shape[0]
    if dim % 2 != 0 or dim == 0:
        raise DimensionMismatch(f"covariance must be 2M x 2M, got {gamma.shape}")
    if disp.shape != (dim,):
        raise DimensionMismatch(f"displacement must have shape ({dim},), got {disp.shape}")
    return dim // 2


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    """Symmetric square root of a symmetric positive-definite matrix."""
    w, v = np.linalg.eigh(mat)
    if w.min() <= 0:
        raise NotPositiveDefinite(f"matrix has non-positive eigenvalue {w.min():g}")
    return (v * np.sqrt(w)) @ v.T


def symplectic_eigenvalues(gamma: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix, sorted descending.

    Computed as the positive eigenvalues of i * gamma^(1/2) J gamma^(1/2),
    which is Hermitian, so the symmetric eigensolver applies.
    """
    gamma = np.asarray(gamma, dtype=float)
    modes = gamma.shape[0] // 2
    root = _sqrtm_psd(gamma)
    herm = 1j * (root @ symplectic_form(modes) @ root)
    vals = np.linalg.eigvalsh(herm)
    return np.sort(vals[vals > 0])[::-1]


@dataclass(frozen=True)
class GaussianState:
    """Validated Gaussian state: covariance ``gamma``, displacement ``disp``.

    Instances are immutable; build them with :func:`new_state`.
    """

    modes: int
    gamma: np.ndarray
    disp: np.ndarray
    sigma: np.ndarray  # symplectic eigenvalues, descending

    def is_pure(self, tol: float = UNCERTAINTY_TOL) -> bool:
        """Whether every symplectic eigenvalue equals 1/2 within ``tol``."""
        return bool(np.max(np.abs(self.sigma - 0.5)) < tol)


def new_state(gamma, disp=None) -> GaussianState:
    """Validate and freeze a Gaussian state.

    Args:
        gamma: real symmetric positive-definite 2M x 2M covariance matrix.
        disp: real 2M displacement vector (defaults to zero).

    Returns:
        A :class:`GaussianState` with its symplectic spectrum attached.

    Raises:
        DimensionMismatch: inconsistent shapes.
        NotPositiveDefinite: gamma not symmetric positive-definite.
        UncertaintyViolated: some symplectic eigenvalue is below 1/2.
    """
    gamma = np.array(gamma, dtype=float)
    if disp is None:
        disp = np.zeros(gamma.shape[0])
    disp = np.array(disp, dtype=float)
    modes = _check_cov_shape(gamma, disp)
    if np.max(np.abs(gamma - gamma.T)) > SYMMETRY_TOL:
        raise NotPositiveDefinite("covariance is not symmetric within tolerance")
    gamma = (gamma + gamma.T) / 2
    if np.linalg.eigvalsh(gamma).min() <= 0:
        raise NotPositiveDefinite("covariance is not positive-definite")
    sigma = symplectic_eigenvalues(gamma)
    if sigma.min() < 0.5 - UNCERTAINTY_TOL:
        raise UncertaintyViolated(
            f"symplectic eigenvalue {sigma.min():.12g} violates the vacuum limit 1/2"
        )
    gamma.flags.writeable = False
    disp.flags.writeable = False
    sigma.flags.writeable = False
    return GaussianState(modes=modes, gamma=gamma, disp=disp, sigma=sigma)


def vacuum(modes: int) -> GaussianState:
    """The M-mode vacuum state."""
    return new_state(np.eye(2 * modes) / 2, np.zeros(2 * modes))


def mean_photon_number(state: GaussianState) -> float:
    """Mean photon number: (1/2) Tr(gamma - I/2) + disp^2 / 2."""
    dim = 2 * state.modes
    return 0.5 * (np.trace(state.gamma) - dim / 2) + 0.5 * float(state.disp @ state.disp)


def purity(state: GaussianState) -> float:
    """State purity 1 / sqrt(det(2 gamma)), in (0, 1]."""
    sign, logdet = np.linalg.slogdet(2 * state.gamma)
    if sign <= 0:
        raise NotPositiveDefinite("covariance has non-positive determinant")
    return float(np.exp(-0.5 * logdet))


def characteristic_function(state: GaussianState, eta) -> complex:
    """Characteristic function exp(-eta^T gamma eta / 2 + i eta . disp)."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape != state.disp.shape:
        raise DimensionMismatch(f"eta must have shape {state.disp.shape}")
    return complex(np.exp(-0.5 * eta @ state.gamma @ eta + 1j * eta @ state.disp))


def _interleave_permutation(modes: int) -> np.ndarray:
    """Permutation P with z_interleaved = P z_block (x1 y1 x2 y2 ... ordering)."""
    perm = np.zeros((2 * modes, 2 * modes))
    for i in range(modes):
        perm[2 * i, i] = 1
        perm[2 * i + 1, modes + i] = 1
    return perm


def williamson(gamma) -> tuple[np.ndarray, np.ndarray]:
    """Williamson decomposition gamma = S diag(sigma, sigma) S^T with S symplectic.

    Args:
        gamma: symmetric positive-definite 2M x 2M matrix.

    Returns:
        (S, sigma): symplectic S and the symplectic eigenvalues sorted descending.

    Raises:
        NotPositiveDefinite: gamma fails symmetry or positivity checks.
        DecompositionFailed: the Schur form did not block-diagonalize cleanly.
    """
    gamma = np.asarray(gamma, dtype=float)
    modes = gamma.shape[0] // 2
    if np.max(np.abs(gamma - gamma.T)) > SYMMETRY_TOL:
        raise NotPositiveDefinite("matrix is not symmetric within tolerance")
    root = _sqrtm_psd((gamma + gamma.T) / 2)
    anti = root @ symplectic_form(modes) @ root
    anti = (anti - anti.T) / 2
    block, ortho = sla.schur(anti, output="real")

    # schur of a real normal antisymmetric matrix: 2x2 blocks [[0, b], [-b, 0]].
    sigma = np.empty(modes)
    for i in range(modes):
        b = block[2 * i, 2 * i + 1]
        if b < 0:
            ortho[:, [2 * i, 2 * i + 1]] = ortho[:, [2 * i + 1, 2 * i]]
            b = -b
        sigma[i] = b
    off = block.copy()
    for i in range(modes):
        off[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = 0
    if np.max(np.abs(off)) > 1e-8 * max(1.0, np.max(np.abs(block))):
        raise DecompositionFailed("Schur form is not block-diagonal; matrix too ill-conditioned")

    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    col_order = np.empty(2 * modes, dtype=int)
    for new, old in enumerate(order):
        col_order[2 * new] = 2 * old
        col_order[2 * new + 1] = 2 * old + 1
    ortho = ortho[:, col_order]

    d_half = np.repeat(np.sqrt(sigma), 2)
    perm = _interleave_permutation(modes)
    symp = root @ (ortho / d_half) @ perm
    recon = symp @ np.diag(np.concatenate([sigma, sigma])) @ symp.T
    if np.max(np.abs(recon - gamma)) > 1e-8 * max(1.0, np.max(np.abs(gamma))):
        raise DecompositionFailed("Williamson reconstruction residual too large")
    return symp, sigma


def _split_degenerate(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Index groups of (sorted) values equal within tol."""
    groups = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or abs(values[i] - values[start]) > tol * max(1.0, abs(values[start])):
            groups.append(np.arange(start, i))
            start = i
    return groups


def _simultaneous_diag(x: np.ndarray, y: np.ndarray, tol: float = 1e-10):
    """Orthogonal diagonalization of two commuting real symmetric matrices."""
    wx, qx = np.linalg.eigh(x)
    ortho = qx.copy()
    for idx in _split_degenerate(wx, tol):
        if len(idx) > 1:
            sub = qx[:, idx].T @ y @ qx[:, idx]
            _, rot = np.linalg.eigh((sub + sub.T) / 2)
            ortho[:, idx] = qx[:, idx] @ rot
    return ortho


def _takagi_unitary_symmetric(z: np.ndarray) -> np.ndarray:
    """Factor a unitary symmetric Z as Omega Omega^T.

    Writes Z = O exp(i Lambda) O^T with O real orthogonal (real and imaginary
    parts of Z commute), then Omega = O exp(i Lambda / 2).
    """
    z = (z + z.T) / 2
    ortho = _simultaneous_diag(z.real, z.imag)
    diag = np.diag(ortho.T @ z @ ortho)
    phase = np.angle(diag)
    return ortho * np.exp(0.5j * phase)[np.newaxis, :]


def _canonical_column_phases(u: np.ndarray, free_phase: np.ndarray) -> np.ndarray:
    """Deterministic column gauge: leading significant entry made real positive.

    Columns marked in ``free_phase`` may absorb any phase; the others only a
    sign flip (a general phase would spoil the U sinh(r) U^T block).
    """
    u = u.copy()
    for j in range(u.shape[1]):
        col = u[:, j]
        lead = np.flatnonzero(np.abs(col) > 0.5 * np.abs(col).max())[0]
        if free_phase[j]:
            factor = np.conj(col[lead]) / abs(col[lead])
        else:
            factor = 1.0 if (col[lead].real > 0 or (col[lead].real == 0 and col[lead].imag > 0)) else -1.0
        u[:, j] = col * factor
    return u


def bloch_messiah(symp) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decompose a symplectic S as R Q R' with lifted unitaries R, R'.

    Q = diag(e^r, e^-r) with the squeezing values r sorted descending >= 0.
    An orthogonal symplectic input returns (S, I, I).

    Raises:
        NotSymplectic: S^T J S != J within tolerance.
        DecompositionFailed: internal validation of the factors failed.
    """
    symp = np.asarray(symp, dtype=float)
    modes = symp.shape[0] // 2
    form = symplectic_form(modes)
    if np.max(np.abs(symp.T @ form @ symp - form)) > SYMPLECTIC_TOL * max(
        1.0, np.max(np.abs(symp)) ** 2
    ):
        raise NotSymplectic("input does not preserve the symplectic form")

    if np.max(np.abs(symp.T @ symp - np.eye(2 * modes))) < SYMPLECTIC_TOL:
        return symp.copy(), np.eye(2 * modes), np.eye(2 * modes)

    # Polar part P = (S S^T)^(1/2) is symmetric symplectic, P = R Q R^T.
    polar = _sqrtm_psd(symp @ symp.T)
    wmat = basis_change(modes)
    polar_c = wmat @ polar @ wmat.conj().T
    block_e = polar_c[:modes, :modes]  # U cosh(r) U^dag
    block_f = polar_c[:modes, modes:]  # U sinh(r) U^T

    cosh_r, vecs = np.linalg.eigh((block_e + block_e.conj().T) / 2)
    order = np.argsort(-cosh_r, kind="stable")
    cosh_r = cosh_r[order]
    vecs = vecs[:, order]
    if cosh_r.min() < 1 - 1e-8:
        raise DecompositionFailed("polar part has eigenvalue below 1")
    cosh_r = np.maximum(cosh_r, 1.0)
    squeeze = np.arccosh(cosh_r)

    unitary = np.zeros((modes, modes), dtype=complex)
    free_phase = np.zeros(modes, dtype=bool)
    for idx in _split_degenerate(cosh_r, 1e-8):
        cols = vecs[:, idx]
        if squeeze[idx[0]] < 1e-8:
            unitary[:, idx] = cols
            free_phase[idx] = True
        else:
            z = cols.conj().T @ block_f @ cols.conj() / np.sinh(squeeze[idx[0]])
            unitary[:, idx] = cols @ _takagi_unitary_symmetric(z)
    unitary = _canonical_column_phases(unitary, free_phase)

    rot = lift_unitary(unitary)
    qmat = np.diag(np.concatenate([np.exp(squeeze), np.exp(-squeeze)]))
    rot_prime = np.diag(np.concatenate([np.exp(-squeeze), np.exp(squeeze)])) @ rot.T @ symp
    if np.max(np.abs(rot_prime.T @ rot_prime - np.eye(2 * modes))) > 1e-7:
        raise DecompositionFailed("second rotation factor is not orthogonal")
    if np.max(np.abs(rot @ qmat @ rot_prime - symp)) > 1e-7 * max(1.0, np.max(np.abs(symp))):
        raise DecompositionFailed("Bloch-Messiah reconstruction residual too large")
    return rot, qmat, rot_prime


@dataclass(frozen=True)
class CanonicalDecomposition:
    """Canonical form gamma = R Q R' Sigma R'^T Q R^T of a covariance matrix."""

    R: np.ndarray
    Q: np.ndarray
    Rprime: np.ndarray
    sigma: np.ndarray

    @property
    def squeezings(self) -> np.ndarray:
        modes = len(self.sigma)
        return np.log(np.diag(self.Q)[:modes])


def canonical_decomposition(gamma) -> CanonicalDecomposition:
    """Williamson plus Bloch-Messiah of a covariance matrix."""
    symp, sigma = williamson(gamma)
    rot, qmat, rot_prime = bloch_messiah(symp)
    return CanonicalDecomposition(R=rot, Q=qmat, Rprime=rot_prime, sigma=sigma)


def pure_core(gamma) -> np.ndarray:
    """Pure-state covariance R Q^2 R^T / 2 sharing R, Q with ``gamma``.

    Replaces every symplectic eigenvalue by 1/2, so gamma - pure_core(gamma)
    is positive semi-definite.
    """
    decomp = canonical_decomposition(gamma)
    core = 0.5 * decomp.R @ decomp.Q @ decomp.Q @ decomp.R.T
    return (core + core.T) / 2


def convex_weight(gamma, gamma0, xi) -> float:
    """Gaussian mixing density of the pure-core decomposition, evaluated at xi.

    The density has covariance gamma - gamma0 and integrates to one.

    Raises:
        SingularMixture: gamma - gamma0 is singular in some direction (pure
            states must be treated as a point mass by the caller).
    """
    gamma = np.asarray(gamma, dtype=float)
    gamma0 = np.asarray(gamma0, dtype=float)
    xi = np.asarray(xi, dtype=float)
    diff = gamma - gamma0
    diff = (diff + diff.T) / 2
    dim = diff.shape[0]
    w = np.linalg.eigvalsh(diff)
    if w.min() < 1e-10 * max(1.0, w.max()):
        raise SingularMixture("gamma - gamma0 is singular; no mixing density exists")
    quad = xi @ np.linalg.solve(diff, xi)
    sign, logdet = np.linalg.slogdet(diff)
    return float(np.exp(-0.5 * quad - 0.5 * (dim * np.log(2 * np.pi) + logdet)))


def apply_rotation(state: GaussianState, rot) -> GaussianState:
    """Conjugate a state by an orthogonal symplectic phase-space rotation.

    gamma -> R gamma R^T and disp -> R disp; the mean photon number and the
    symplectic spectrum are preserved.

    Raises:
        NotSymplecticOrthogonal: R fails the orthogonality/symplecticity check.
    """
    rot = np.asarray(rot, dtype=float)
    dim = 2 * state.modes
    if rot.shape != (dim, dim):
        raise DimensionMismatch(f"rotation must have shape ({dim}, {dim})")
    form = symplectic_form(state.modes)
    if (
        np.max(np.abs(rot.T @ rot - np.eye(dim))) > SYMPLECTIC_TOL
        or np.max(np.abs(rot.T @ form @ rot - form)) > SYMPLECTIC_TOL
    ):
        raise NotSymplecticOrthogonal("matrix is not orthogonal symplectic")
    return new_state(rot @ state.gamma @ rot.T, rot @ state.disp)


def _haar_unitary(modes: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(modes, modes)) + 1j * rng.normal(size=(modes, modes))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))[np.newaxis, :]


def random_state(modes: int, nbar: float, purity_class: str = "pure", seed=0) -> GaussianState:
    """Deterministic random Gaussian state with an exact mean photon number.

    The photon budget is split by a seeded Dirichlet draw between squeezing,
    thermal noise (mixed class only) and displacement; the squeezing scale is
    then solved so the total hits ``nbar``.  The mixed class keeps every
    symplectic eigenvalue strictly above 1/2.

    Args:
        modes: number of modes M.
        nbar: target mean photon number (>= 0).
        purity_class: "pure" or "mixed".
        seed: RNG seed; equal seeds give identical states.

    Raises:
        InfeasibleTarget: nbar == 0 with the mixed class, which needs thermal
            photons to push an eigenvalue above 1/2.
    """
    if nbar < 0:
        raise InfeasibleTarget("nbar must be non-negative")
    if purity_class not in ("pure", "mixed"):
        raise InfeasibleTarget(f"unknown purity class {purity_class!r}")
    rng = np.random.default_rng(seed)
    unitary = _haar_unitary(modes, rng)
    rot = lift_unitary(unitary)

    if purity_class == "mixed":
        if nbar == 0:
            raise InfeasibleTarget("a mixed state needs nbar > 0")
        weights = rng.dirichlet([1.0, 1.0, 1.0])
        # Keep a solid thermal share so the state stays away from the pure
        # boundary, where the quadrature SLD equation becomes singular.
        weights[1] = max(weights[1], 0.15)
        weights /= weights.sum()
        n_squeeze, n_thermal, n_disp = (float(w) * nbar for w in weights)
    else:
        weights = rng.dirichlet([1.0, 1.0])
        n_squeeze, n_disp = (float(w) * nbar for w in weights)
        n_thermal = 0.0

    direction = rng.uniform(0.2, 1.0, size=modes)
    if n_squeeze > 0:
        def excess(scale):
            return np.sum(np.sinh(scale * direction) ** 2) - n_squeeze

        hi = 1.0
        while excess(hi) < 0:
            hi *= 2
        scale = optimize.brentq(excess, 0.0, hi, xtol=1e-15, rtol=8.9e-16)
        squeeze = scale * direction
    else:
        squeeze = np.zeros(modes)

    if n_thermal > 0:
        t_dir = rng.uniform(0.3, 1.0, size=modes)
        tau = n_thermal / np.sum(t_dir * np.cosh(2 * squeeze))
        sigma = 0.5 + tau * t_dir
    else:
        sigma = np.full(modes, 0.5)

    if n_disp > 0:
        direction_d = rng.normal(size=2 * modes)
        direction_d /= np.linalg.norm(direction_d)
        disp = np.sqrt(2 * n_disp) * direction_d
    else:
        disp = np.zeros(2 * modes)

    qmat = np.concatenate([np.exp(squeeze), np.exp(-squeeze)])
    core = np.diag(qmat * np.concatenate([sigma, sigma]) * qmat)
    gamma = rot @ core @ rot.T
    return new_state(gamma, disp)


def state_to_json(state: GaussianState) -> str:
    """Serialize a state to the canonical JSON layout (row-major gamma)."""
    payload = {
        "modes": state.modes,
        "gamma": [float(v) for v in state.gamma.reshape(-1)],
        "disp": [float(v) for v in state.disp],
    }
    return json.dumps(payload)


def state_from_json(text: str) -> GaussianState:
    """Inverse of :func:`state_to_json`; validates like :func:`new_state`."""
    payload = json.loads(text)
    modes = int(payload["modes"])
    gamma = np.array(payload["gamma"], dtype=float).reshape(2 * modes, 2 * modes)
    disp = np.array(payload["disp"], dtype=float)
    return new_state(gamma, disp)
