import math

import pytest
from scipy.special import ndtr, ndtri

from qstein import catalog
from qstein.bounds import (ABOVE_D, AT_D, BELOW_D, BERRY_ESSEEN_C, BERRY_ESSEEN_C_RANGE,
                           finite_n_bounds_from_moments, lower_condition, second_order_residual,
                           theorem1_limit, theorem2_bounds, upper_condition)
from qstein.errors import DegenerateVariance
from qstein.np_oracle import classical_beta_of_epsilon

LN3 = math.log(3.0)
COIN = dict(D=math.log(2) - 0.5 * LN3, V=LN3 ** 2 / 4, T3=LN3 ** 3 / 8)


class TestAsymptotic:
    @pytest.mark.parametrize("shift, regime, limit", [(-0.01, BELOW_D, 0.0), (0.01, ABOVE_D, 1.0)])
    def test_first_order_regimes(self, shift, regime, limit):
        p = catalog.hadamard_pair()
        v = theorem1_limit(p, theorem2_bounds(p, 100, 0.3).D + shift, 0.7)
        assert v.regime == regime and v.limit_alpha == limit

    @pytest.mark.parametrize("E2", [-1.0, 0.0, 0.4])
    def test_at_D(self, E2):
        p = catalog.classical_coin()
        v = theorem1_limit(p, COIN["D"], E2)
        assert v.regime == AT_D
        assert v.limit_alpha == pytest.approx(float(ndtr(E2 / math.sqrt(COIN["V"]))))

    def test_degenerate(self):
        p = catalog.pure_vs_mixed()
        with pytest.raises(DegenerateVariance):
            theorem1_limit(p, math.log(2), 0.0)


class TestFiniteN:
    def test_default_constant(self):
        assert BERRY_ESSEEN_C == 0.4784
        lo, hi = BERRY_ESSEEN_C_RANGE
        assert lo < hi == BERRY_ESSEEN_C

    @pytest.mark.parametrize("n", [25, 100, 400, 1600])
    def test_formulas(self, n):
        b = finite_n_bounds_from_moments(n=n, eps=0.4, C=0.4784, **COIN)
        skew = 0.4784 * COIN["T3"] / COIN["V"] ** 1.5
        sv = math.sqrt(n * COIN["V"])
        lower = n * COIN["D"] + sv * float(ndtri(0.4 - skew / math.sqrt(n)))
        upper = (n * COIN["D"] + sv * float(ndtri(0.4 + (skew + 2) / math.sqrt(n)))
                 + math.log(2 ** 9 * n * n))
        assert b.lower == pytest.approx(lower, rel=1e-12)
        assert b.upper == pytest.approx(upper, rel=1e-12)
        assert b.skew == pytest.approx(skew)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_small_n_upper_not_applicable(self, n):
        b = theorem2_bounds(catalog.hadamard_pair(), n, 0.45)
        assert not b.upper_applicable and b.upper is None
        assert b.upper_applicable == upper_condition(n, 0.45, b.C, b.V, b.T3)
        assert b.lower_applicable == lower_condition(n, 0.45, b.C, b.V, b.T3)

    @pytest.mark.parametrize("n", [25, 100, 400, 1600])
    def test_coin_sandwich(self, n):
        b = theorem2_bounds(catalog.classical_coin(), n, 0.4)
        nlb = classical_beta_of_epsilon(catalog.classical_coin(), n, 0.4).neg_log_beta
        assert b.lower <= nlb <= b.upper

    def test_larger_constant_widens(self):
        a = finite_n_bounds_from_moments(n=400, eps=0.4, C=0.40973, **COIN)
        b = finite_n_bounds_from_moments(n=400, eps=0.4, C=0.4784, **COIN)
        assert b.lower < a.lower and b.upper > a.upper

    def test_input_checks(self):
        with pytest.raises(DegenerateVariance):
            finite_n_bounds_from_moments(0.1, 0.0, 0.0, 10, 0.5)
        with pytest.raises(ValueError):
            finite_n_bounds_from_moments(0.1, 1.0, 1.0, 10, 1.0)

    def test_residual(self):
        n, eps = 100, 0.4
        nlb = 50.0
        r = second_order_residual(None, n, eps, nlb, D=COIN["D"], V=COIN["V"])
        assert r == pytest.approx(nlb - n * COIN["D"] - math.sqrt(n * COIN["V"]) * float(ndtri(eps)))
