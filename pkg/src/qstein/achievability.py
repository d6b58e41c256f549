"""Explicit projective tests that achieve the second-order tradeoff.

For every eigen-sequence ``x^n`` of ``rho^{(n)}`` the vector ``|a_{x^n}>`` is
cut down to the eigenvectors ``|b_{y^n}>`` of ``sigma^{(n)}`` whose likelihood
ratio ``lambda^n(x^n)/mu^n(y^n)`` clears the threshold ``L_n``. The cut
vectors, taken in order of ascending ``lambda^n``, are orthonormalised with
a zero-preserving Gram-Schmidt pass and the test is the projector onto their
span. Its type II error is then at most ``1/L_n`` and its type I error at
most the probability that the classical log-likelihood-ratio sum falls
strictly below ``log L_n``.

Vectors are handled in the product eigenbasis of ``sigma`` (index ``y^n`` in
Kronecker order) until the final change of basis.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .divergences import quantum_relative_entropy
from .errors import BudgetExceeded
from .linalg import DEFAULT_MAX_DIM, kron_power_array, kron_sum_power
from .ns_classical import BELOW, clears, convolve_n, llr_distribution, tail_prob
from .states import StatePair

GS_TOL = 1e-9
ORDER_RTOL = 1e-12


@dataclass(frozen=True)
class Threshold:
    n: int
    E2: float
    f_n: float
    D: float

    @property
    def log_L(self) -> float:
        return self.n * self.D + math.sqrt(self.n) * self.E2 + self.f_n

    @classmethod
    def from_log_L(cls, n: int, D: float, log_L: float, f_n: float = 0.0) -> "Threshold":
        return cls(n, (log_L - n * D - f_n) / math.sqrt(n), f_n, D)


@dataclass(frozen=True)
class SequenceIndex:
    xn: tuple
    log_lambda: float
    order_rank: int


def _check_budget(dim: int, n: int, max_dim: int) -> int:
    total = dim ** n
    if total > max_dim:
        raise BudgetExceeded(total, max_dim)
    return total


def _log_or_neginf(v):
    v = np.asarray(v, dtype=float)
    out = np.full(v.shape, -np.inf)
    pos = v > 0
    out[pos] = np.log(v[pos])
    return out


def ascending_order(log_lambda_n: np.ndarray, rtol: float = ORDER_RTOL) -> np.ndarray:
    """Positions sorted by ascending value; near-equal values keep index order.

    Index order of the Kronecker enumeration is lexicographic in ``x^n``,
    so ties break lexicographically.
    """
    order = np.argsort(log_lambda_n, kind="stable")
    vals = log_lambda_n[order]
    out = []
    start = 0
    for i in range(1, vals.size + 1):
        if i == vals.size or not _tied(vals[i - 1], vals[i], rtol):
            out.extend(sorted(order[start:i].tolist()))
            start = i
    return np.asarray(out, dtype=np.intp)


def _tied(a: float, b: float, rtol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(b - a) <= rtol * max(1.0, abs(a), abs(b))


def sequence_order(p: StatePair, n: int) -> list[SequenceIndex]:
    log_lam_n = kron_sum_power(_log_or_neginf(p.lam), n)
    order = ascending_order(log_lam_n)
    seqs = list(itertools.product(range(p.dim), repeat=n))
    return [SequenceIndex(seqs[i], float(log_lam_n[i]), rank) for rank, i in enumerate(order)]


def xi_vector(p: StatePair, xn: SequenceIndex | tuple, th: Threshold,
              max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """``Q_{x^n} |a_{x^n}>`` expressed in the product eigenbasis of sigma."""
    seq = xn.xn if isinstance(xn, SequenceIndex) else tuple(xn)
    n = len(seq)
    _check_budget(p.dim, n, max_dim)
    gamma = p.overlaps
    log_lam = _log_or_neginf(p.lam)
    log_mu = np.log(p.mu)
    ll = float(sum(log_lam[x] for x in seq))
    out = np.zeros(p.dim ** n, dtype=complex)
    for k, yn in enumerate(itertools.product(range(p.dim), repeat=n)):
        llr = ll - sum(log_mu[y] for y in yn)
        if clears(llr, th.log_L):
            out[k] = np.prod([gamma[y, x] for x, y in zip(seq, yn)])
    return out


def xi_matrix(p: StatePair, n: int, log_L: float, max_dim: int = DEFAULT_MAX_DIM):
    """All xi vectors as columns (column index = x^n in Kronecker order).

    Also returns the log-likelihood table ``log lambda^n(x^n)`` used for ordering.
    """
    _check_budget(p.dim, n, max_dim)
    gamma_n = kron_power_array(p.overlaps, n, max_dim)          # [y^n, x^n]
    log_lam_n = kron_sum_power(_log_or_neginf(p.lam), n)
    log_mu_n = kron_sum_power(np.log(p.mu), n)
    with np.errstate(invalid="ignore"):
        llr = log_lam_n[None, :] - log_mu_n[:, None]
    mask = clears(llr, log_L)
    return np.where(mask, gamma_n, 0.0), log_lam_n


def modified_gram_schmidt(vectors, tol: float = GS_TOL) -> list[np.ndarray]:
    """Orthonormalise in order; vectors already in the running span become zero.

    Each input is projected against the kept outputs twice (modified
    Gram-Schmidt with one reorthogonalisation pass); a residual norm below
    ``tol`` marks the input as dependent.
    """
    vecs = [np.asarray(v, dtype=complex) for v in vectors]
    if not vecs:
        return []
    q, _ = kernels.gram_schmidt(np.ascontiguousarray(np.vstack(vecs)), tol)
    return list(q)


@dataclass(eq=False)
class ConstructedTest:
    A: np.ndarray
    kept_basis: np.ndarray       # rows: orthonormal vectors spanning the test (computational basis)
    alpha: float
    beta: float
    threshold: Threshold
    tail_bound: float            # Pr{LLR sum < log L_n}
    all_reject: bool = False
    info: dict = field(default_factory=dict)

    @property
    def beta_bound(self) -> float:
        return math.exp(-self.threshold.log_L)

    @property
    def rank(self) -> int:
        return int(self.kept_basis.shape[0])


def build_test(p: StatePair, n: int, E2: float, f_n: float = 0.0, *,
               D: float | None = None, max_dim: int = DEFAULT_MAX_DIM) -> ConstructedTest:
    """Construct the projector ``A_n`` and evaluate its errors exactly.

    ``D`` may be passed to avoid recomputing the relative entropy.
    """
    if D is None:
        D = quantum_relative_entropy(p)
    th = Threshold(n, E2, f_n, D)
    return build_test_at(p, th, max_dim=max_dim)


def build_test_at(p: StatePair, th: Threshold, max_dim: int = DEFAULT_MAX_DIM) -> ConstructedTest:
    n = th.n
    xi, log_lam_n = xi_matrix(p, n, th.log_L, max_dim)
    order = ascending_order(log_lam_n)
    q, keep = kernels.gram_schmidt(np.ascontiguousarray(xi[:, order].T), GS_TOL)
    basis_sigma = q[keep]                                           # rows in sigma-product basis
    b_n = kron_power_array(p.b_basis, n, max_dim)
    basis = basis_sigma @ b_n.T                                     # rows in computational basis
    A = basis.T @ basis.conj()
    A = 0.5 * (A + A.conj().T)

    rho_n = kron_power_array(p.rho.matrix, n, max_dim)
    sigma_n = kron_power_array(p.sigma.matrix, n, max_dim)
    alpha = float(np.real(1.0 - np.sum(rho_n * A.T)))
    beta = float(np.real(np.sum(sigma_n * A.T)))
    alpha = min(1.0, max(0.0, alpha))
    beta = min(1.0, max(0.0, beta))

    tail = tail_prob(convolve_n(llr_distribution(p), n), th.log_L, BELOW)
    return ConstructedTest(
        A=A,
        kept_basis=basis,
        alpha=alpha,
        beta=beta,
        threshold=th,
        tail_bound=tail,
        all_reject=basis.shape[0] == 0,
        info={"nonzero_xi": int(np.count_nonzero(np.linalg.norm(xi, axis=0) > 0))},
    )


def classical_test_errors(p: StatePair, n: int, log_L: float) -> tuple[float, float]:
    """``(alpha, beta)`` of the likelihood-ratio region for commuting pairs.

    For commuting states the construction reduces to accepting exactly the
    eigen-sequences whose ratio clears ``L_n``; this evaluates that test on
    the classical law, with no dense n-copy matrices.
    """
    d_n = convolve_n(llr_distribution(p), n)
    hit = clears(d_n.values, log_L)
    alpha = float(d_n.probs[~hit].sum())
    # sigma-mass of an accepted atom is its rho-mass times exp(-llr)
    beta = float(np.sum(d_n.probs[hit] * np.exp(-d_n.values[hit])))
    return alpha, beta
