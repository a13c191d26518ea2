"""Sequential strategy: L passes of the target circuit with passive controls.

The composed circuit U_phi C_{L-1} U_phi ... C_1 U_phi on K >= M modes has
generator sum_j R_j^dag g R_j with R_j the partial product to the right of the
j-th pass.  Its spectral norm is at most L |g|; the inverting controls
C_j = U_phi^dag reach equality, giving the L^2 precision scaling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import circuit_model as cm
from . import qfi_engine as qe
from .errors import DimensionMismatch
from .gaussian_core import lift_unitary, new_state
from .optimal_probe import squeeze_param


@dataclass(frozen=True)
class SequentialPlan:
    """Composed-strategy data: passes, mode count, controls, overall generator."""

    L: int
    K: int
    controls: tuple
    overall_generator: np.ndarray
    circuit_ref: str = ""

    @property
    def specnorm(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvalsh(self.overall_generator))))

    def to_json(self) -> str:
        return json.dumps({
            "L": self.L,
            "K": self.K,
            "controls": [
                [[float(v.real), float(v.imag)] for v in c.reshape(-1)]
                for c in self.controls
            ],
            "circuit": self.circuit_ref,
        })


def embed_control(u, total_modes: int) -> np.ndarray:
    """Embed an m-mode unitary as u (+) I on the first m of K modes."""
    u = np.asarray(u, dtype=complex)
    m = u.shape[0]
    if m > total_modes:
        raise DimensionMismatch(f"cannot embed {m} modes into {total_modes}")
    out = np.eye(total_modes, dtype=complex)
    out[:m, :m] = u
    return out


def compose_sequential(circuit, controls, L: int, K: int, phi: float):
    """Overall unitary and generator of L passes with interleaved controls.

    Args:
        circuit: the M-mode target circuit (embedded on the first M of K).
        controls: L-1 unitaries, each K x K.
        L: number of passes (>= 1).
        K: total mode count including ancillas (K >= M).
        phi: parameter value.

    Returns:
        (U_overall, G_overall): the K x K composed unitary and its Hermitian
        generator i U^dag dU/dphi, assembled exactly by the product rule.

    Raises:
        DimensionMismatch: wrong control count or shapes, or K < M.
    """
    if L < 1:
        raise DimensionMismatch("need at least one pass")
    if K < circuit.modes:
        raise DimensionMismatch(f"K = {K} is smaller than the target's {circuit.modes} modes")
    controls = [np.asarray(c, dtype=complex) for c in controls]
    if len(controls) != L - 1:
        raise DimensionMismatch(f"expected {L - 1} controls, got {len(controls)}")
    for c in controls:
        if c.shape != (K, K):
            raise DimensionMismatch(f"control must be {K} x {K}, got {c.shape}")

    target = embed_control(cm.unitary_at(circuit, phi), K)
    gen = embed_control(cm.generator(circuit, phi).g, K)
    gen[circuit.modes:, circuit.modes:] = 0.0

    right = np.eye(K, dtype=complex)  # product right of the current pass
    overall = target.copy()
    total_gen = right.conj().T @ gen @ right
    for c in controls:
        right = c @ target @ right
        overall = target @ c @ overall
        total_gen = total_gen + right.conj().T @ gen @ right
    total_gen = (total_gen + total_gen.conj().T) / 2
    return overall, total_gen


def optimal_controls(circuit, phi: float, L: int, K: int | None = None) -> list:
    """Inverting controls C_j = U_phi^dag (embedded), commuting with g.

    Empty for L = 1; with these controls the composed generator is L times
    the embedded single-pass generator.
    """
    if K is None:
        K = circuit.modes
    inverse = embed_control(cm.unitary_at(circuit, phi).conj().T, K)
    return [inverse.copy() for _ in range(L - 1)]


def sequential_bound(g_specnorm: float, L: int, nbar: float) -> float:
    """QFI ceiling 8 L^2 |g|^2 nbar (nbar + 1) of the sequential strategy."""
    return qe.qfi_bound(L * g_specnorm, nbar)


def sequential_qfi(circuit, controls, L: int, K: int, phi: float, nbar: float) -> qe.QfiReport:
    """End-to-end QFI of the composed circuit with its own optimal probe.

    Builds the single-mode squeezed-vacuum probe aligned with the composed
    generator's top eigenvector (vacuum on every other mode, ancillas
    included) and runs the engine on the composed rotation.
    """
    overall, total_gen = compose_sequential(circuit, controls, L, K, phi)

    eps, vecs = np.linalg.eigh(total_gen)
    order = np.lexsort((-eps, -np.abs(eps)))
    vecs = vecs[:, order]
    specnorm = float(np.abs(eps[order][0]))

    r0 = squeeze_param(nbar)
    squeeze = np.zeros(K)
    squeeze[0] = r0
    lift = lift_unitary(vecs)
    scales = np.concatenate([np.exp(2 * squeeze), np.exp(-2 * squeeze)])
    gamma = 0.5 * (lift * scales[np.newaxis, :]) @ lift.T
    probe = new_state((gamma + gamma.T) / 2)

    rot = lift_unitary(overall)
    kmat = (-1j * cm.lift_generator(total_gen)).real
    drot = rot @ kmat
    return qe.qfi_from_rotation(probe, rot, drot, specnorm)


def make_plan(circuit, controls, L: int, K: int, phi: float, circuit_ref: str = "") -> SequentialPlan:
    """Compose and package a sequential plan for serialization."""
    _, total_gen = compose_sequential(circuit, controls, L, K, phi)
    return SequentialPlan(
        L=L,
        K=K,
        controls=tuple(np.asarray(c, dtype=complex) for c in controls),
        overall_generator=total_gen,
        circuit_ref=circuit_ref,
    )
