import math

import numpy as np
import pytest

from qstein import catalog
from qstein.errors import AtomBudgetExceeded, DegenerateVariance
from qstein.linalg import random_density
from qstein.ns_classical import (ABOVE, AT_OR_ABOVE, AT_OR_BELOW, BELOW, berry_esseen_envelope,
                                 build_ns_joint, clears, convolve_n, llr_distribution,
                                 monte_carlo_tail, standardized_cdf, tail_prob)
from qstein.states import StatePair

LN3 = math.log(3.0)


def brute_force_joint(p):
    """p(x, y) = lambda_x |<b_y|a_x>|^2 by explicit loops over eigenvectors."""
    lam, a = np.linalg.eigh(p.rho.matrix)
    mu, b = np.linalg.eigh(p.sigma.matrix)
    out = np.zeros((p.dim, p.dim))
    for x in range(p.dim):
        for y in range(p.dim):
            out[x, y] = max(lam[x], 0.0) * abs(np.vdot(b[:, y], a[:, x])) ** 2
    return out


class TestJoint:
    @pytest.mark.parametrize("dim", [2, 3, 4])
    def test_matches_loops(self, rng, dim):
        p = StatePair(random_density(dim, rng), random_density(dim, rng))
        j = build_ns_joint(p)
        assert np.allclose(j.probs, brute_force_joint(p), atol=1e-14)
        assert j.probs.sum() == pytest.approx(1.0, abs=1e-12)

    def test_marginals(self, rng):
        p = StatePair(random_density(3, rng), random_density(3, rng))
        j = build_ns_joint(p)
        assert np.allclose(j.probs.sum(axis=1), j.lam, atol=1e-14)


class TestLLR:
    def test_coin_atoms(self):
        d = llr_distribution(catalog.classical_coin())
        assert d.values == pytest.approx([-math.log(1.5), math.log(2.0)])
        assert d.probs == pytest.approx([0.5, 0.5])

    def test_coin_moments(self):
        d = llr_distribution(catalog.classical_coin())
        assert d.mean() == pytest.approx(math.log(2) - 0.5 * LN3, abs=1e-15)
        assert d.var() == pytest.approx(LN3 ** 2 / 4, abs=1e-15)
        assert d.abs_central_moment(3) == pytest.approx(LN3 ** 3 / 8, abs=1e-15)

    def test_zero_mass_cells_dropped(self):
        d = llr_distribution(catalog.pure_vs_mixed())
        assert d.values == pytest.approx([math.log(2.0)])


class TestConvolution:
    @pytest.mark.parametrize("n", [2, 5, 9])
    def test_coin_is_binomial(self, n):
        d = convolve_n(llr_distribution(catalog.classical_coin()), n)
        a, b = -math.log(1.5), math.log(2.0)
        expect_v = [k * b + (n - k) * a for k in range(n + 1)]
        expect_p = [math.comb(n, k) / 2 ** n for k in range(n + 1)]
        assert d.values == pytest.approx(expect_v, abs=1e-12)
        assert d.probs == pytest.approx(expect_p, abs=1e-15)

    def test_mean_and_variance_scale(self, rng):
        d1 = llr_distribution(StatePair(random_density(3, rng), random_density(3, rng)))
        d4 = convolve_n(d1, 4)
        assert d4.mean() == pytest.approx(4 * d1.mean(), abs=1e-12)
        assert d4.var() == pytest.approx(4 * d1.var(), abs=1e-11)

    def test_coin_at_large_n_stays_on_lattice(self):
        d = convolve_n(llr_distribution(catalog.classical_coin()), 1600)
        # extreme binomial masses underflow and are dropped, nothing else
        assert len(d) <= 1601
        k = (d.values + 1600 * math.log(1.5)) / LN3
        assert np.allclose(k, np.round(k), atol=1e-9)
        assert d.total_mass() == pytest.approx(1.0, abs=1e-12)

    def test_atom_budget(self, rng):
        d1 = llr_distribution(StatePair(random_density(4, rng), random_density(4, rng)))
        with pytest.raises(AtomBudgetExceeded):
            convolve_n(d1, 6, max_atoms=1000)


class TestTails:
    def test_tie_goes_to_clearing_side(self):
        d = llr_distribution(catalog.classical_coin())
        thr = math.log(2.0) * (1 + 1e-14)
        assert clears(math.log(2.0), thr)
        assert tail_prob(d, thr, BELOW) == pytest.approx(0.5)
        assert tail_prob(d, thr, AT_OR_ABOVE) == pytest.approx(0.5)
        assert tail_prob(d, math.log(2.0), AT_OR_BELOW) == pytest.approx(1.0)
        assert tail_prob(d, math.log(2.0), ABOVE) == 0.0

    @pytest.mark.parametrize("thr", [-5.0, 0.0, 0.2, 1.0])
    def test_complements(self, rng, thr):
        d = convolve_n(llr_distribution(StatePair(random_density(2, rng), random_density(2, rng))), 3)
        assert tail_prob(d, thr, BELOW) + tail_prob(d, thr, AT_OR_ABOVE) == pytest.approx(1.0)
        assert tail_prob(d, thr, AT_OR_BELOW) + tail_prob(d, thr, ABOVE) == pytest.approx(1.0)

    def test_unknown_direction(self):
        with pytest.raises(ValueError):
            tail_prob(llr_distribution(catalog.classical_coin()), 0.0, "sideways")

    @pytest.mark.parametrize("n, thr", [(10, 0.5), (40, 6.0), (100, 14.0)])
    def test_monte_carlo_agrees_with_exact(self, n, thr):
        d1 = llr_distribution(catalog.tilted_pair())
        exact = tail_prob(convolve_n(d1, n), thr, BELOW)
        est = monte_carlo_tail(d1, n, thr, samples=200_000, seed=3)
        assert abs(est.estimate - exact) <= 5 * est.stderr + 1e-12

    def test_monte_carlo_is_seeded(self):
        d1 = llr_distribution(catalog.hadamard_pair())
        a = monte_carlo_tail(d1, 20, 5.0, 10_000, seed=11)
        b = monte_carlo_tail(d1, 20, 5.0, 10_000, seed=11)
        assert a == b


class TestBerryEsseen:
    @pytest.mark.parametrize("pair", [catalog.classical_coin(), catalog.hadamard_pair(),
                                      catalog.tilted_pair()], ids=lambda p: p.label)
    @pytest.mark.parametrize("n", [4, 25, 100])
    def test_exact_cdf_inside_envelope(self, pair, n):
        d1 = llr_distribution(pair)
        dn = convolve_n(d1, n)
        var, t3 = d1.var(), d1.abs_central_moment(3)
        for z in np.linspace(-3, 3, 25):
            x = z * math.sqrt(var)
            lo, hi = berry_esseen_envelope(d1.mean(), var, t3, n, x)
            f = standardized_cdf(dn, d1.mean(), x)
            assert lo - 1e-12 <= f <= hi + 1e-12

    def test_degenerate(self):
        with pytest.raises(DegenerateVariance):
            berry_esseen_envelope(0.0, 0.0, 0.0, 4, 0.0)
