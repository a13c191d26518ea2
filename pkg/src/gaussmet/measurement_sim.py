"""Analytic homodyne measurement model and the Monte Carlo estimation harness.

The optimal-probe output, after undoing the circuit and the probe rotation at
a guessed parameter value and applying a quadrature phase theta, is measured
along x on the first mode.  The outcome is a zero-mean Gaussian whose variance
carries all parameter dependence through the (1,1) element of
V^dag U_guess^dag U_phi V.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import circuit_model as cm
from .errors import NonIdentifiable

GOLDEN = (np.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class HomodyneModel:
    """Variance model of the rotated-quadrature homodyne measurement."""

    variance_theta: float
    theta: float
    matrix_elem: complex
    r0: float
    fi: float

    def to_dict(self) -> dict:
        return {
            "variance_theta": self.variance_theta,
            "theta": self.theta,
            "matrix_elem_real": self.matrix_elem.real,
            "matrix_elem_imag": self.matrix_elem.imag,
            "r0": self.r0,
            "fi": self.fi,
        }


@dataclass(frozen=True)
class EstimationRun:
    """Replicated maximum-likelihood estimates of the circuit parameter."""

    n_samples: int
    seed: int
    phi_true: float
    estimates: np.ndarray
    rep_seeds: np.ndarray
    empirical_variance: float
    mse: float
    fi: float

    @property
    def crb(self) -> float:
        """Cramer-Rao floor 1 / (n F) for the per-sample Fisher information."""
        return 1.0 / (self.n_samples * self.fi)

    def summary(self) -> dict:
        return {
            "replications": len(self.estimates),
            "n_samples": self.n_samples,
            "seed": self.seed,
            "phi_true": self.phi_true,
            "mean": float(np.mean(self.estimates)),
            "variance": self.empirical_variance,
            "mse": self.mse,
            "fi": self.fi,
            "crb": self.crb,
        }


def matrix_elem(circuit, phi: float, phi_guess: float) -> complex:
    """(1,1) element of V_guess^dag U_guess^dag U_phi V_guess.

    Equals 1 when the guess matches the true parameter.
    """
    diag = cm.generator(circuit, phi_guess).V
    u_guess = cm.unitary_at(circuit, phi_guess)
    u_true = cm.unitary_at(circuit, phi)
    return complex((diag.conj().T @ u_guess.conj().T @ u_true @ diag)[0, 0])


def homodyne_variance(circuit, phi: float, phi_guess: float, theta: float, r0: float) -> float:
    """Outcome variance (Delta x)^2_theta of the homodyne measurement.

    (1/2) [1 + |m|^2 (cosh 2r0 - 1) + Re(e^{-2i theta} m^2) sinh 2r0] with m
    the matrix element above; strictly positive, and 1/2 at r0 = 0.
    """
    m = matrix_elem(circuit, phi, phi_guess)
    mag2 = abs(m) ** 2
    return 0.5 * float(
        1.0
        + mag2 * (np.cosh(2 * r0) - 1.0)
        + np.real(np.exp(-2j * theta) * m * m) * np.sinh(2 * r0)
    )


def homodyne_fi(circuit, phi: float, r0: float, theta: float) -> float:
    """Per-sample Fisher information at a matched guess (phi_guess = phi).

    Closed form 2 e1^2 sinh^2(2 r0) * 4 sin^2 cos^2 / (e^{2r0} cos^2
    + e^{-2r0} sin^2)^2 with e1 the top generator eigenvalue magnitude.
    """
    eps1 = cm.generator(circuit, phi).specnorm
    s, c = np.sin(theta), np.cos(theta)
    denom = np.exp(2 * r0) * c**2 + np.exp(-2 * r0) * s**2
    return float(2 * eps1**2 * np.sinh(2 * r0) ** 2 * 4 * s**2 * c**2 / denom**2)


def homodyne_fi_fd(circuit, phi: float, phi_guess: float, theta: float, r0: float,
                   step: float = 1e-5) -> float:
    """Fisher information (1/2) (d ln variance / d phi)^2 by central differences.

    Works at any guess; the closed form above only covers phi_guess = phi.
    """
    lo = np.log(homodyne_variance(circuit, phi - step, phi_guess, theta, r0))
    hi = np.log(homodyne_variance(circuit, phi + step, phi_guess, theta, r0))
    return 0.5 * ((hi - lo) / (2 * step)) ** 2


def optimal_theta(r0: float) -> float:
    """Phase theta = arctan(e^{2 r0}) maximizing the homodyne FI."""
    return float(np.arctan(np.exp(2 * r0)))


def homodyne_model(circuit, phi: float, phi_guess: float, theta: float, r0: float) -> HomodyneModel:
    """Bundle the variance, matrix element and matched-guess FI."""
    return HomodyneModel(
        variance_theta=homodyne_variance(circuit, phi, phi_guess, theta, r0),
        theta=theta,
        matrix_elem=matrix_elem(circuit, phi, phi_guess),
        r0=r0,
        fi=homodyne_fi_fd(circuit, phi, phi_guess, theta, r0),
    )


def homodyne_pdf(x, circuit, phi: float, phi_guess: float, theta: float, r0: float):
    """Zero-mean Gaussian outcome density at x (scalar or array)."""
    var = homodyne_variance(circuit, phi, phi_guess, theta, r0)
    x = np.asarray(x, dtype=float)
    return np.exp(-x**2 / (2 * var)) / np.sqrt(2 * np.pi * var)


def sample_homodyne(model: HomodyneModel, n: int, seed) -> np.ndarray:
    """Draw n i.i.d. outcomes from the model; deterministic per seed."""
    if n < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, np.sqrt(model.variance_theta), size=n)


def _golden_section(func, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Golden-section minimizer on [lo, hi]."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = func(c), func(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = func(d)
    return (a + b) / 2


def mle_estimate(samples, circuit, phi_guess: float, theta: float, r0: float,
                 half_width: float = 0.5) -> float:
    """Maximum-likelihood estimate of phi from homodyne samples.

    Maximizes sum_i [-ln v(phi) / 2 - x_i^2 / (2 v(phi))] over the window
    phi_guess +/- half_width by golden-section search (tolerance 1e-10); the
    mean square of the samples is a sufficient statistic.

    Raises:
        NonIdentifiable: the variance is stationary in phi at the window
            center (e.g. theta = 0), so the likelihood carries no signal.
    """
    samples = np.asarray(samples, dtype=float)
    m2 = float(np.mean(samples**2))

    def variance_at(phi):
        return homodyne_variance(circuit, phi, phi_guess, theta, r0)

    step = 1e-6 * max(1.0, half_width)
    slope = (variance_at(phi_guess + step) - variance_at(phi_guess - step)) / (2 * step)
    if abs(slope) < 1e-9 * variance_at(phi_guess):
        raise NonIdentifiable("homodyne variance is stationary in phi at this theta")

    def negloglik(phi):
        v = variance_at(phi)
        return 0.5 * np.log(v) + m2 / (2 * v)

    return _golden_section(negloglik, phi_guess - half_width, phi_guess + half_width)


def run_estimation(circuit, phi_true: float, nbar: float, n_samples: int,
                   replications: int, seed: int = 0, theta: float | None = None,
                   phi_guess: float | None = None, half_width: float = 0.5,
                   jobs: int = 1) -> EstimationRun:
    """Replicated homodyne estimation of phi_true at the optimal settings.

    Each replication draws ``n_samples`` outcomes with its own seed derived
    from the master seed and feeds them to the MLE.  Replications can run on
    a thread pool; results are merged in replication order, so the output is
    independent of ``jobs``.
    """
    from .optimal_probe import squeeze_param

    r0 = squeeze_param(nbar)
    if theta is None:
        theta = optimal_theta(r0)
    if phi_guess is None:
        phi_guess = phi_true
    model = homodyne_model(circuit, phi_true, phi_guess, theta, r0)
    master = np.random.default_rng(seed)
    rep_seeds = master.integers(0, 2**63 - 1, size=replications)

    def one(i: int) -> float:
        xs = sample_homodyne(model, n_samples, int(rep_seeds[i]))
        return mle_estimate(xs, circuit, phi_guess, theta, r0, half_width)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            estimates = np.array(list(pool.map(one, range(replications))))
    else:
        estimates = np.array([one(i) for i in range(replications)])

    fi = homodyne_fi(circuit, phi_true, r0, theta) if phi_guess == phi_true \
        else homodyne_fi_fd(circuit, phi_true, phi_guess, theta, r0)
    return EstimationRun(
        n_samples=n_samples,
        seed=seed,
        phi_true=phi_true,
        estimates=estimates,
        rep_seeds=rep_seeds,
        empirical_variance=float(np.var(estimates, ddof=1)) if replications > 1 else 0.0,
        mse=float(np.mean((estimates - phi_true) ** 2)),
        fi=fi,
    )
