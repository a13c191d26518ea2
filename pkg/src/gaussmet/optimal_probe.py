"""Synthesis of the bound-saturating Gaussian probe and bound-chain audits.

The best Gaussian probe at photon budget nbar is a single-mode squeezed
vacuum with sinh^2(r0) = nbar, zero displacement, rotated by the unitary that
diagonalizes the circuit generator at the guessed working point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import circuit_model as cm
from . import qfi_engine as qe
from .errors import InfeasibleTarget
from .gaussian_core import GaussianState, mean_photon_number, new_state, pure_core


@dataclass(frozen=True)
class OptimalProbeSpec:
    """Optimal probe: squeezing r0, diagonalizer V, and the prepared state."""

    r0: float
    V: np.ndarray
    state: GaussianState

    def to_dict(self) -> dict:
        return {
            "r0": self.r0,
            "V_real": [float(v) for v in self.V.real.reshape(-1)],
            "V_imag": [float(v) for v in self.V.imag.reshape(-1)],
            "modes": self.state.modes,
            "gamma": [float(v) for v in self.state.gamma.reshape(-1)],
            "disp": [float(v) for v in self.state.disp],
        }


@dataclass(frozen=True)
class AuditReport:
    """QFI against the convexity-chain bounds for one probe/circuit pair."""

    qfi: float
    intermediate_bound: float
    final_bound: float
    trace_gap: float
    disp_sq: float

    def chain_holds(self, rtol: float = 1e-8) -> bool:
        scale = max(1.0, self.final_bound)
        return (self.qfi <= self.intermediate_bound + rtol * scale
                and self.intermediate_bound <= self.final_bound + rtol * scale)

    def to_dict(self) -> dict:
        return {
            "qfi": self.qfi,
            "intermediate_bound": self.intermediate_bound,
            "final_bound": self.final_bound,
            "trace_gap": self.trace_gap,
            "disp_sq": self.disp_sq,
            "chain_holds": self.chain_holds(),
        }


def squeeze_param(nbar: float) -> float:
    """Squeezing r0 = ln(sqrt(nbar) + sqrt(nbar + 1)), so sinh^2 r0 = nbar."""
    if nbar < 0:
        raise InfeasibleTarget("nbar must be non-negative")
    return float(np.log(np.sqrt(nbar) + np.sqrt(nbar + 1.0)))


def optimal_state(circuit, phi_guess: float, nbar: float) -> OptimalProbeSpec:
    """Build the optimal probe for a circuit at a guessed parameter value.

    The state covariance is P diag(e^{2r}, e^{-2r}) P^T / 2 with r squeezing
    only the first mode (the one aligned with the largest-magnitude generator
    eigenvalue) and P the phase-space lift of the diagonalizer.

    Args:
        circuit: parsed circuit.
        phi_guess: working point at which the generator is diagonalized.
        nbar: mean photon number of the probe (all spent on squeezing).
    """
    r0 = squeeze_param(nbar)
    spectrum = cm.generator(circuit, phi_guess)
    lift = cm.diagonalizer_lift(spectrum.V)
    squeeze = np.zeros(circuit.modes)
    squeeze[0] = r0
    scales = np.concatenate([np.exp(2 * squeeze), np.exp(-2 * squeeze)])
    gamma = 0.5 * (lift * scales[np.newaxis, :]) @ lift.T
    state = new_state((gamma + gamma.T) / 2, np.zeros(2 * circuit.modes))
    return OptimalProbeSpec(r0=r0, V=spectrum.V, state=state)


def saturation_check(circuit, phi: float, nbar: float) -> float:
    """Residual bound - qfi for the optimal probe built at the true phi.

    Vanishes (relative to the bound) when the probe saturates the ceiling
    8 |g|^2 nbar (nbar + 1); strictly positive when the probe is built at a
    wrong guess.
    """
    probe = optimal_state(circuit, phi, nbar)
    report = qe.qfi(probe.state, circuit, phi)
    return report.bound - report.qfi


def mixed_bound_audit(state: GaussianState, circuit, phi: float) -> AuditReport:
    """Check qfi <= intermediate <= final bound for an arbitrary probe.

    The intermediate bound subtracts the convexity penalty
    [Tr(Gamma - Gamma0) + d^2]^2 / 4 carried by thermal noise and
    displacement; the final bound is 8 |g|^2 nbar (nbar + 1).
    """
    report = qe.qfi(state, circuit, phi)
    core = pure_core(state.gamma)
    trace_gap = float(np.trace(state.gamma - core))
    disp_sq = float(state.disp @ state.disp)
    nbar = mean_photon_number(state)
    specnorm = cm.generator(circuit, phi).specnorm
    intermediate = 8 * specnorm**2 * (nbar * (nbar + 1) - 0.25 * (trace_gap + disp_sq) ** 2)
    return AuditReport(
        qfi=report.qfi,
        intermediate_bound=intermediate,
        final_bound=report.bound,
        trace_gap=trace_gap,
        disp_sq=disp_sq,
    )
