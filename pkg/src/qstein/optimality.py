"""Computable converse: a lower bound on the type I error of any test.

Any test whose type II error is at most ``exp(-(nD + E2 sqrt(n) + f_n))`` has

    alpha >= Pr{S_n <= nD + E2 sqrt(n) + f_n - f'_n}
             - (1/(eps1^2 eps2^2) + 1) exp(-f'_n) - eps1^2 - 2 sqrt(2) eps2,

where ``S_n`` is the n-fold log-likelihood-ratio sum of the classical
embedding. ``lemma2_gap`` exposes the vector inequality the argument rests on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergences import quantum_relative_entropy, quantum_relative_variance
from .errors import AtomBudgetExceeded, DegenerateVariance, NotNormalized, NotProjector
from .ns_classical import (AT_OR_BELOW, DEFAULT_MAX_ATOMS, convolve_n, llr_distribution,
                           monte_carlo_tail, tail_prob)
from .states import StatePair

LEMMA2_CONST = 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class ConverseParams:
    eps1: float
    eps2: float
    f_n: float
    fprime_n: float

    def __post_init__(self):
        if self.eps1 <= 0 or self.eps2 <= 0:
            raise ValueError("eps1 and eps2 must be positive")
        if self.fprime_n <= 0:
            raise ValueError("fprime_n must be positive")

    @classmethod
    def finite_n_schedule(cls, n: int, f_n: float = 0.0) -> "ConverseParams":
        """The parameter choice that turns the converse into the finite-n upper bound.

        ``f'_n = log(2^9 n^2)``, ``eps1 = 2^(1/8) e^(-f'/8)``, ``eps2 = 2^(-1/4) e^(-f'/4)``;
        the resulting correction is ``1/sqrt(n) + 1/(512 n^2) <= 2/sqrt(n)``.
        """
        fp = math.log(2.0 ** 9 * n * n)
        return cls(
            eps1=2.0 ** 0.125 * math.exp(-fp / 8.0),
            eps2=2.0 ** -0.25 * math.exp(-fp / 4.0),
            f_n=f_n,
            fprime_n=fp,
        )

    def correction(self) -> float:
        e1sq = self.eps1 ** 2
        e2sq = self.eps2 ** 2
        return ((1.0 / (e1sq * e2sq) + 1.0) * math.exp(-self.fprime_n)
                + e1sq + LEMMA2_CONST * self.eps2)


@dataclass(frozen=True)
class ConverseBound:
    tail_term: float
    correction: float
    alpha_lower: float
    tail_stderr: float = 0.0
    method: str = "exact"


def lemma2_gap(phi, varphi, proj, atol: float = 1e-10) -> float:
    """``|| |phi><phi| varphi ||^2 - || pi |phi><phi| pi varphi ||^2``.

    Bounded above by ``2 sqrt(2) || phi - pi phi ||``.
    """
    phi = np.asarray(phi, dtype=complex)
    varphi = np.asarray(varphi, dtype=complex)
    proj = np.asarray(proj, dtype=complex)
    if abs(np.linalg.norm(phi) - 1) > atol or abs(np.linalg.norm(varphi) - 1) > atol:
        raise NotNormalized("phi and varphi must be unit vectors")
    scale = max(1.0, float(np.linalg.norm(proj)))
    if (np.linalg.norm(proj @ proj - proj) > 1e-9 * scale
            or np.linalg.norm(proj - proj.conj().T) > 1e-9 * scale):
        raise NotProjector("pi must be an orthogonal projector")
    first = abs(np.vdot(phi, varphi)) ** 2
    pphi = proj @ phi
    # pi|phi><phi|pi |varphi> = <phi|pi varphi> pi|phi>
    second = abs(np.vdot(pphi, varphi)) ** 2 * float(np.vdot(pphi, pphi).real)
    return float(first - second)


def lemma2_distance(phi, proj) -> float:
    phi = np.asarray(phi, dtype=complex)
    return float(np.linalg.norm(phi - np.asarray(proj) @ phi))


def alpha_lower_bound(p: StatePair, n: int, E2: float, params: ConverseParams, *,
                      D: float | None = None, V: float | None = None,
                      max_atoms: int = DEFAULT_MAX_ATOMS,
                      mc_samples: int = 1_000_000, seed: int = 0) -> ConverseBound:
    """Lower bound on alpha for every test with beta <= exp(-(nD + E2 sqrt(n) + f_n)).

    The tail is exact by convolution; beyond ``max_atoms`` a seeded Monte
    Carlo estimate is used and its standard error reported.
    """
    if V is None:
        V = quantum_relative_variance(p)
    if V <= 0:
        raise DegenerateVariance("converse bound requires V > 0")
    if D is None:
        D = quantum_relative_entropy(p)
    thr = n * D + math.sqrt(n) * E2 + params.f_n - params.fprime_n
    d1 = llr_distribution(p)
    try:
        tail = tail_prob(convolve_n(d1, n, max_atoms), thr, AT_OR_BELOW)
        stderr, method = 0.0, "exact"
    except AtomBudgetExceeded:
        # estimate of the strict tail; the tie mass is zero almost surely here
        est = monte_carlo_tail(d1, n, thr, mc_samples, seed)
        tail, stderr, method = est.estimate, est.stderr, "monte_carlo"
    corr = params.correction()
    lower = min(1.0, max(0.0, tail - corr))
    return ConverseBound(tail, corr, lower, stderr, method)


def dn_term_bound(n: int, log_beta: float, params: ConverseParams, D: float, E2: float) -> float:
    """Upper bound on the off-threshold mass ``D_n`` of a test with the given beta.

    Always ``D_n <= L_n beta`` with ``log L_n = nD + E2 sqrt(n) + f_n - f'_n``;
    under the beta constraint this is at most ``exp(-f'_n)``, which is what
    is returned in that case. Capped at 1.
    """
    budget = n * D + math.sqrt(n) * E2 + params.f_n
    if log_beta <= -budget:
        return min(1.0, math.exp(-params.fprime_n))
    return min(1.0, math.exp(budget - params.fprime_n + log_beta))
