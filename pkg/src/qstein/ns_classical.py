"""Classical embedding of a state pair (Nussbaum-Szkola distribution).

Measuring ``rho`` first in its own eigenbasis and then in the eigenbasis of
``sigma`` yields outcome ``(x, y)`` with probability
``lambda(x) |<b_y|a_x>|^2``. The log-likelihood ratio
``log(lambda(X)/mu(Y))`` of this pair has mean D and variance V, and its
n-fold i.i.d. sums govern every tail quantity in the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import AtomBudgetExceeded, DegenerateVariance
from .gaussian import norm_cdf
from .states import StatePair

MERGE_RTOL = 1e-12
DEFAULT_MAX_ATOMS = 2_000_000
# comparisons of a log-ratio against a threshold treat values within this
# relative distance as equal (the ">=" side wins)
TIE_RTOL = 1e-12

BELOW = "below"
AT_OR_ABOVE = "at_or_above"
AT_OR_BELOW = "at_or_below"
ABOVE = "above"


def clears(value, threshold):
    """Elementwise ``value >= threshold`` with a relative tie tolerance."""
    value = np.asarray(value, dtype=float)
    if math.isinf(threshold):
        return value >= threshold
    slack = TIE_RTOL * max(1.0, abs(threshold))
    return value >= threshold - slack


@dataclass(frozen=True, eq=False)
class NSJoint:
    probs: np.ndarray   # probs[x, y]
    lam: np.ndarray
    mu: np.ndarray


def build_ns_joint(p: StatePair) -> NSJoint:
    gamma = p.overlaps                       # gamma[y, x]
    probs = p.lam[:, None] * np.abs(gamma.T) ** 2
    return NSJoint(probs, p.lam.copy(), p.mu.copy())


@dataclass(frozen=True, eq=False)
class LLRDistribution:
    """Finitely supported law of a (sum of) log-likelihood ratio(s).

    ``values`` strictly increasing, ``probs`` positive and summing to one.
    ``n`` records how many i.i.d. copies the law represents.
    """

    values: np.ndarray
    probs: np.ndarray
    n: int = 1

    def __len__(self):
        return self.values.size

    @property
    def atoms(self):
        return list(zip(self.values.tolist(), self.probs.tolist()))

    def mean(self) -> float:
        return float(np.dot(self.probs, self.values))

    def var(self) -> float:
        m = self.mean()
        return float(np.dot(self.probs, (self.values - m) ** 2))

    def abs_central_moment(self, k: int = 3) -> float:
        m = self.mean()
        return float(np.dot(self.probs, np.abs(self.values - m) ** k))

    def total_mass(self) -> float:
        return float(self.probs.sum())

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.choice(self.values, size=size, p=self.probs / self.probs.sum())


def _from_unsorted(values, probs, n=1) -> LLRDistribution:
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    order = np.argsort(values, kind="stable")
    v, q = kernels.merge_sorted_atoms(values[order], probs[order], MERGE_RTOL)
    return LLRDistribution(v, q, n)


def llr_atoms(j: NSJoint) -> LLRDistribution:
    """Distinct values of ``log(lambda(x)/mu(y))`` over cells of positive mass."""
    mask = j.probs > 0.0
    xs, ys = np.nonzero(mask)
    vals = np.log(j.lam[xs]) - np.log(j.mu[ys])
    return _from_unsorted(vals, j.probs[xs, ys])


def llr_distribution(p: StatePair) -> LLRDistribution:
    return llr_atoms(build_ns_joint(p))


def convolve_n(d: LLRDistribution, n: int, max_atoms: int = DEFAULT_MAX_ATOMS) -> LLRDistribution:
    """Exact law of the sum of ``n`` i.i.d. copies of ``d``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if d.n != 1:
        raise ValueError("convolve_n expects a single-copy distribution")
    if n == 1:
        return d
    cur_v, cur_p = d.values, d.probs
    for _ in range(n - 1):
        # pre-merge size is at most max_atoms * len(d); only the merged count is capped
        cur_v, cur_p = kernels.convolve_sorted(cur_v, cur_p, d.values, d.probs, MERGE_RTOL)
        if cur_v.size > max_atoms:
            raise AtomBudgetExceeded(cur_v.size, max_atoms)
    return LLRDistribution(cur_v, cur_p, n)


def tail_prob(d: LLRDistribution, threshold: float, direction: str = BELOW) -> float:
    """Exact probability mass on one side of ``threshold``.

    ``below`` is strict and ``at_or_above`` its complement; ties are
    resolved by :func:`clears`. ``at_or_below``/``above`` use the same
    tolerance with the tie mass on the lower side.
    """
    if direction in (BELOW, AT_OR_ABOVE):
        hit = clears(d.values, threshold)
        upper = float(d.probs[hit].sum())
        lower = float(d.probs[~hit].sum())
        return lower if direction == BELOW else upper
    if direction in (AT_OR_BELOW, ABOVE):
        if math.isinf(threshold):
            above = d.values > threshold
        else:
            above = d.values > threshold + TIE_RTOL * max(1.0, abs(threshold))
        upper = float(d.probs[above].sum())
        lower = float(d.probs[~above].sum())
        return lower if direction == AT_OR_BELOW else upper
    raise ValueError(f"unknown direction {direction!r}")


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    samples: int


def monte_carlo_tail(d: LLRDistribution, n: int, threshold: float, samples: int,
                     seed: int, chunk: int = 200_000) -> MonteCarloEstimate:
    """Estimate ``Pr{Z_1 + ... + Z_n < threshold}`` for i.i.d. ``Z_i ~ d``.

    Each replicate draws the multinomial count vector of atoms, so the cost
    is independent of ``n``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if threshold == math.inf:
        return MonteCarloEstimate(1.0, 0.0, samples)
    if threshold == -math.inf:
        return MonteCarloEstimate(0.0, 0.0, samples)
    rng = np.random.default_rng(seed)
    pr = d.probs / d.probs.sum()
    hits = 0
    left = samples
    while left:
        m = min(chunk, left)
        counts = rng.multinomial(n, pr, size=m)
        sums = counts @ d.values
        hits += int(np.count_nonzero(~clears(sums, threshold)))
        left -= m
    est = hits / samples
    return MonteCarloEstimate(est, math.sqrt(est * (1.0 - est) / samples), samples)


def berry_esseen_envelope(mean: float, var: float, t3: float, n: int, x: float,
                          C: float = 0.4784) -> tuple[float, float]:
    """Bounds on ``Pr{sqrt(n) (S_n/n - mean) <= x}`` from the Berry-Esseen inequality.

    ``mean`` only fixes the centring of the statistic being bounded.
    """
    if var <= 0:
        raise DegenerateVariance("Berry-Esseen envelope needs positive variance")
    if n < 1:
        raise ValueError("n must be >= 1")
    centre = norm_cdf(x / math.sqrt(var))
    half = C * t3 / (math.sqrt(n) * var ** 1.5)
    return max(0.0, centre - half), min(1.0, centre + half)


def standardized_cdf(d_n: LLRDistribution, mean: float, x: float) -> float:
    """Exact ``Pr{sqrt(n) (S_n/n - mean) <= x}`` for an n-fold law."""
    n = d_n.n
    return tail_prob(d_n, n * mean + math.sqrt(n) * x, AT_OR_BELOW)
