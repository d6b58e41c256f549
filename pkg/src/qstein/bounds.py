"""Asymptotic and finite-n evaluators for the optimal type II exponent.

``theorem1_limit`` gives the limiting optimal type I error when the type II
error is held at ``exp(-(E1 n + E2 sqrt(n) + o(sqrt n)))``. ``finite_n_bounds``
sandwiches ``-log beta_n(eps)`` using the Berry-Esseen constant ``C``; each
side carries its own applicability condition on ``n`` and is reported as
not applicable (``None``) when that condition fails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .divergences import divergence_report
from .errors import DegenerateVariance
from .gaussian import norm_cdf, norm_ppf
from .states import StatePair

BERRY_ESSEEN_C = 0.4784
BERRY_ESSEEN_C_RANGE = (0.40973, 0.4784)
REGIME_ATOL = 1e-12

BELOW_D = "below_D"
AT_D = "at_D"
ABOVE_D = "above_D"


@dataclass(frozen=True)
class AsymptoticVerdict:
    regime: str
    limit_alpha: float


def theorem1_limit(p: StatePair, E1: float, E2: float, *, D: float | None = None,
                   V: float | None = None) -> AsymptoticVerdict:
    if D is None or V is None:
        rep = divergence_report(p)
        D = rep.D if D is None else D
        V = rep.V if V is None else V
    if E1 < D - REGIME_ATOL:
        return AsymptoticVerdict(BELOW_D, 0.0)
    if E1 > D + REGIME_ATOL:
        return AsymptoticVerdict(ABOVE_D, 1.0)
    if V <= 0:
        raise DegenerateVariance("second-order limit undefined when V = 0")
    return AsymptoticVerdict(AT_D, norm_cdf(E2 / math.sqrt(V)))


@dataclass(frozen=True)
class FiniteNBounds:
    n: int
    eps: float
    lower: float | None
    upper: float | None
    C: float
    D: float
    V: float
    T3: float

    @property
    def lower_applicable(self) -> bool:
        return self.lower is not None

    @property
    def upper_applicable(self) -> bool:
        return self.upper is not None

    @property
    def skew(self) -> float:
        """Berry-Esseen shift ``C T3 / V^(3/2)``."""
        return self.C * self.T3 / self.V ** 1.5


def lower_condition(n: int, eps: float, C: float, V: float, T3: float) -> bool:
    return eps - C * T3 / (math.sqrt(n) * V ** 1.5) >= 0.0


def upper_condition(n: int, eps: float, C: float, V: float, T3: float) -> bool:
    return eps + (C * T3 / V ** 1.5 + 2.0) / math.sqrt(n) <= 1.0


def finite_n_bounds_from_moments(D: float, V: float, T3: float, n: int, eps: float,
                                 C: float = BERRY_ESSEEN_C) -> FiniteNBounds:
    if V <= 0:
        raise DegenerateVariance("finite-n bounds require V > 0")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    rn = math.sqrt(n)
    sv = math.sqrt(V)
    skew = C * T3 / V ** 1.5
    lower = upper = None
    if lower_condition(n, eps, C, V, T3):
        lower = n * D + rn * sv * norm_ppf(eps - skew / rn)
    if upper_condition(n, eps, C, V, T3):
        upper = (n * D + rn * sv * norm_ppf(eps + (skew + 2.0) / rn)
                 + math.log(2.0 ** 9 * n * n))
    return FiniteNBounds(n, eps, lower, upper, C, D, V, T3)


def theorem2_bounds(p: StatePair, n: int, eps: float, C: float = BERRY_ESSEEN_C) -> FiniteNBounds:
    """Lower/upper bounds on ``-log beta_n(eps)``."""
    rep = divergence_report(p)
    return finite_n_bounds_from_moments(rep.D, rep.V, rep.T3, n, eps, C)


def second_order_residual(p: StatePair | None, n: int, eps: float, neg_log_beta: float, *,
                          D: float | None = None, V: float | None = None) -> float:
    """``-log beta - nD - sqrt(n V) Phi^{-1}(eps)``, the third-order remainder."""
    if D is None or V is None:
        rep = divergence_report(p)
        D = rep.D if D is None else D
        V = rep.V if V is None else V
    return neg_log_beta - n * D - math.sqrt(n) * math.sqrt(V) * norm_ppf(eps)
