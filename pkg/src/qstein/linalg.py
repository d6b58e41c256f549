"""Dense Hermitian matrix substrate.

All routines operate on plain ``numpy`` complex arrays. ``DensityMatrix``
and ``Spectrum`` are light immutable carriers that validate on
construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import BudgetExceeded, InvariantViolation, NotHermitian

HERMITIAN_ATOL = 1e-12
PSD_ATOL = 1e-10
TRACE_ATOL = 1e-10
DEFAULT_MAX_DIM = 4096


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermiticity_error(m: np.ndarray) -> float:
    """Largest absolute deviation ``|m[i,j] - conj(m[j,i])|``."""
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)))


def check_hermitian(m, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return ``m`` as a symmetrised complex array, or raise NotHermitian."""
    a = as_matrix(m)
    err = hermiticity_error(a)
    if err > atol:
        raise NotHermitian(f"matrix deviates from Hermitian by {err:.3e}")
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with eigenvectors stored as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T

    def apply(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        u = self.eigenvectors
        return (u * fn(self.eigenvalues)) @ u.conj().T


def eig_hermitian(m, atol: float = HERMITIAN_ATOL) -> Spectrum:
    a = check_hermitian(m, atol)
    w, u = np.linalg.eigh(a)
    return Spectrum(w, u)


def matrix_function(m, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    return eig_hermitian(m).apply(fn)


def positive_part_trace(m) -> float:
    """Sum of the positive eigenvalues, ``Tr(m)_+``."""
    w = np.linalg.eigvalsh(check_hermitian(m))
    return float(np.sum(w[w > 0]))


def spectral_projectors(m, tol: float):
    """Projectors onto the eigenspaces with eigenvalue > tol and |eigenvalue| <= tol.

    Returns ``(p_pos, p_zero, eigenvalues)``.
    """
    s = eig_hermitian(m)
    w, u = s.eigenvalues, s.eigenvectors
    pos = w > tol
    zero = np.abs(w) <= tol
    up, uz = u[:, pos], u[:, zero]
    return up @ up.conj().T, uz @ uz.conj().T, w


def kron_all(mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def kron_power_array(m, n: int, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    a = np.asarray(m)
    if n < 1:
        raise ValueError("n must be a positive integer")
    dim = a.shape[0] ** n
    if dim > max_dim:
        raise BudgetExceeded(dim, max_dim)
    out = a
    for _ in range(n - 1):
        out = np.kron(out, a)
    return out


def kron_sum_power(v, n: int) -> np.ndarray:
    """All n-fold sums ``v[i1] + ... + v[in]`` in Kronecker (row-major) order."""
    v = np.asarray(v, dtype=float)
    out = v
    for _ in range(n - 1):
        out = np.add.outer(out, v).ravel()
    return out


def validate_density(a: np.ndarray) -> list[str]:
    """List every violated density-matrix invariant (empty when valid)."""
    problems = []
    err = hermiticity_error(a)
    if err > HERMITIAN_ATOL:
        problems.append(f"not Hermitian (deviation {err:.3e})")
        a = 0.5 * (a + a.conj().T)
    w = np.linalg.eigvalsh(a)
    if w.size and w[0] < -PSD_ATOL:
        problems.append(f"not positive semidefinite (min eigenvalue {w[0]:.3e})")
    tr = float(np.real(np.trace(a)))
    if abs(tr - 1.0) > TRACE_ATOL:
        problems.append(f"not unit trace (trace {tr:.12g})")
    return problems


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix.

    ``eigen_floor`` is the numerical rank tolerance: eigenvalues below it
    are treated as exact zeros.
    """

    matrix: np.ndarray
    eigen_floor: float = 1e-14

    def __post_init__(self):
        a = as_matrix(self.matrix)
        problems = validate_density(a)
        if problems:
            raise InvariantViolation(problems)
        a = 0.5 * (a + a.conj().T)
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def spectrum(self) -> Spectrum:
        return eig_hermitian(self.matrix)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues with sub-floor values (and negative noise) set to 0."""
        w = self.spectrum.eigenvalues.copy()
        w[w < self.eigen_floor] = 0.0
        return w

    @classmethod
    def diag(cls, values) -> "DensityMatrix":
        return cls(np.diag(np.asarray(values, dtype=complex)))

    @classmethod
    def pure(cls, vec) -> "DensityMatrix":
        v = np.asarray(vec, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def trusted(cls, matrix: np.ndarray, eigen_floor: float = 1e-14) -> "DensityMatrix":
        """Wrap a matrix known to be a state by construction, skipping validation."""
        obj = object.__new__(cls)
        a = np.asarray(matrix, dtype=complex)
        a.setflags(write=False)
        object.__setattr__(obj, "matrix", a)
        object.__setattr__(obj, "eigen_floor", eigen_floor)
        return obj

    def rotated(self, u: np.ndarray) -> "DensityMatrix":
        return DensityMatrix(u @ self.matrix @ u.conj().T, self.eigen_floor)


def kron_power(m: DensityMatrix, n: int, max_dim: int = DEFAULT_MAX_DIM) -> DensityMatrix:
    """``m`` tensored with itself ``n`` times."""
    # tensor powers of a valid state are valid; skip the O(dim^3) re-check
    return DensityMatrix.trusted(kron_power_array(m.matrix, n, max_dim), m.eigen_floor)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random state from the induced (Hilbert-Schmidt type) measure."""
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ g.conj().T
    rho = rho / np.real(np.trace(rho))
    return DensityMatrix(0.5 * (rho + rho.conj().T))
