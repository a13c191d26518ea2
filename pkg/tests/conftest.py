"""Shared fixtures and helpers for the gaussmet test suite."""

import numpy as np
import pytest

from gaussmet import circuit_model as cm

CORPUS_SPECNORMS = {
    "mz1": 1.0,
    "mz2": 0.5,
    "two_mode_mixing": 1.0,
    "three_mode_mixing": np.sqrt(2),
}

# Optimal-QFI prefactor c in F = c * nbar * (nbar + 1) per corpus circuit.
CORPUS_QFI_COEF = {
    "mz1": 8.0,
    "mz2": 2.0,
    "two_mode_mixing": 8.0,
    "three_mode_mixing": 16.0,
}


@pytest.fixture(scope="session")
def corpus():
    return {name: cm.load_corpus(name) for name in cm.corpus_names()}


def random_circuit(rng: np.random.Generator, modes: int, n_elements: int = 6) -> cm.ParamCircuit:
    """Seeded random circuit with at least one phi-dependent element."""
    lines = [f"modes {modes}"]
    for k in range(n_elements):
        coef = round(float(rng.uniform(-1.5, 1.5)), 6)
        const = round(float(rng.uniform(-2, 2)), 6)
        if k == 0 and abs(coef) < 0.1:
            coef = 1.0
        expr = f"{coef}*phi+{const}" if const >= 0 else f"{coef}*phi{const}"
        if coef == 0:
            expr = str(const)
        if modes > 1 and rng.random() < 0.6:
            m, n = rng.choice(np.arange(1, modes + 1), size=2, replace=False)
            lines.append(f"bs {m} {n} {expr}")
        else:
            m = int(rng.integers(1, modes + 1))
            lines.append(f"ps {m} {expr}")
    return cm.parse_circuit("\n".join(lines))


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))[np.newaxis, :]
