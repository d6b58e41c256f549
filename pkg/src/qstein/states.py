"""The (null, alternative) hypothesis pair."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvariantViolation
from .linalg import DensityMatrix

SIGMA_FULL_RANK_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class StatePair:
    """Null hypothesis ``rho`` against alternative ``sigma``.

    ``sigma`` must be full rank unless built with :meth:`relaxed`; the
    relaxed form exists only so that relative entropy can report +inf
    for support violations.
    """

    rho: DensityMatrix
    sigma: DensityMatrix
    sigma_min_eig: float = SIGMA_FULL_RANK_ATOL
    label: str = "pair"
    full_rank: bool = True

    def __post_init__(self):
        problems = []
        if self.rho.dim != self.sigma.dim:
            problems.append(f"dimension mismatch ({self.rho.dim} vs {self.sigma.dim})")
        elif self.full_rank:
            smin = float(self.sigma.spectrum.eigenvalues[0])
            if smin <= self.sigma_min_eig:
                problems.append(f"sigma not full rank (min eigenvalue {smin:.3e})")
        if problems:
            raise InvariantViolation(problems)

    @classmethod
    def from_arrays(cls, rho, sigma, label: str = "pair") -> "StatePair":
        return cls(DensityMatrix(rho), DensityMatrix(sigma), label=label)

    @classmethod
    def relaxed(cls, rho: DensityMatrix, sigma: DensityMatrix, label: str = "pair") -> "StatePair":
        return cls(rho, sigma, label=label, full_rank=False)

    @property
    def dim(self) -> int:
        return self.rho.dim

    @cached_property
    def lam(self) -> np.ndarray:
        """Eigenvalues of rho (ascending, sub-floor values zeroed)."""
        return self.rho.eigenvalues

    @cached_property
    def mu(self) -> np.ndarray:
        """Eigenvalues of sigma, clamped below at ``sigma_min_eig``."""
        return np.maximum(self.sigma.spectrum.eigenvalues, self.sigma_min_eig)

    @property
    def a_basis(self) -> np.ndarray:
        return self.rho.spectrum.eigenvectors

    @property
    def b_basis(self) -> np.ndarray:
        return self.sigma.spectrum.eigenvectors

    @cached_property
    def overlaps(self) -> np.ndarray:
        """``gamma[y, x] = <b_y|a_x>``."""
        return self.b_basis.conj().T @ self.a_basis

    def commutator_norm(self) -> float:
        r, s = self.rho.matrix, self.sigma.matrix
        return float(np.linalg.norm(r @ s - s @ r))

    def commutes(self, atol: float = 1e-10) -> bool:
        return self.commutator_norm() <= atol
