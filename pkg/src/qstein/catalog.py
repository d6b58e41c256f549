"""Named state pairs used by the self-test, examples and the test-suite."""
from __future__ import annotations

import numpy as np

from .linalg import DensityMatrix, random_density, random_unitary
from .states import StatePair

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def classical_coin() -> StatePair:
    """diag(1/2, 1/2) against diag(3/4, 1/4): closed-form D, V and T3."""
    return StatePair(DensityMatrix.diag([0.5, 0.5]), DensityMatrix.diag([0.75, 0.25]),
                     label="classical_coin")


def identical(dim: int = 2) -> StatePair:
    w = np.arange(1, dim + 1, dtype=float)
    r = DensityMatrix.diag(w / w.sum())
    return StatePair(r, r, label=f"identical_d{dim}")


def pure_vs_mixed() -> StatePair:
    """|0><0| against the maximally mixed qubit (zero relative variance, k = 2)."""
    return StatePair(DensityMatrix.diag([1.0, 0.0]), DensityMatrix.diag([0.5, 0.5]),
                     label="pure_vs_mixed")


def hadamard_pair(lam=(0.75, 0.25), mu=(0.8, 0.2)) -> StatePair:
    """rho diagonal in the standard basis, sigma diagonal in the Hadamard basis."""
    sigma = HADAMARD @ np.diag(mu) @ HADAMARD
    return StatePair(DensityMatrix.diag(lam), DensityMatrix(sigma), label="hadamard")


def tilted_pair(lam=(0.8, 0.2), mu=(0.6, 0.4), theta=0.35) -> StatePair:
    u = rotation(theta)
    sigma = u @ np.diag(mu).astype(complex) @ u.conj().T
    return StatePair(DensityMatrix.diag(lam), DensityMatrix(sigma), label=f"tilted_{theta:g}")


def commuting_rotated(lam, mu, u: np.ndarray, label: str = "commuting") -> StatePair:
    """Commuting pair sharing the eigenbasis given by the columns of ``u``."""
    r = u @ np.diag(np.asarray(lam, dtype=complex)) @ u.conj().T
    s = u @ np.diag(np.asarray(mu, dtype=complex)) @ u.conj().T
    return StatePair(DensityMatrix(r), DensityMatrix(s), label=label)


def degenerate_pairs() -> list[StatePair]:
    """Three zero-variance pairs: rho = k sigma on supp(rho), commuting."""
    u3 = random_unitary(3, np.random.default_rng(7))
    return [
        identical(2),
        pure_vs_mixed(),
        commuting_rotated([0.5, 0.5, 0.0], [0.25, 0.25, 0.5], u3, label="qutrit_k2"),
    ]


def qubit_suite() -> list[StatePair]:
    """Two commuting and three non-commuting qubit pairs."""
    u = rotation(0.6)
    return [
        classical_coin(),
        commuting_rotated([0.7, 0.3], [0.4, 0.6], u, label="commuting_rotated"),
        hadamard_pair(),
        tilted_pair(),
        StatePair(DensityMatrix.pure([np.cos(0.3), np.sin(0.3) * np.exp(0.4j)]),
                  DensityMatrix.diag([0.65, 0.35]), label="pure_vs_diag"),
    ]


def random_pair(dim: int, rng: np.random.Generator, label: str | None = None) -> StatePair:
    return StatePair(random_density(dim, rng), random_density(dim, rng),
                     label=label or f"random_d{dim}")
