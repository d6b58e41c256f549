import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qstein import catalog
from qstein.divergences import divergence_report
from qstein.errors import DegenerateVariance, NotNormalized, NotProjector
from qstein.np_oracle import alpha_of_beta
from qstein.optimality import (LEMMA2_CONST, ConverseParams, alpha_lower_bound, dn_term_bound,
                               lemma2_distance, lemma2_gap)

from conftest import random_projector, random_unit


class TestSchedule:
    @pytest.mark.parametrize("n", [1, 4, 25, 400, 10_000])
    def test_correction_closed_form(self, n):
        c = ConverseParams.finite_n_schedule(n).correction()
        assert c == pytest.approx(1 / math.sqrt(n) + 1 / (512 * n * n), rel=1e-12)
        assert c <= 2 / math.sqrt(n)

    def test_validation(self):
        with pytest.raises(ValueError):
            ConverseParams(0.0, 0.1, 0.0, 1.0)
        with pytest.raises(ValueError):
            ConverseParams(0.1, 0.1, 0.0, 0.0)


class TestProjectionInequality:
    @settings(max_examples=300, deadline=None)
    @given(dim=st.integers(2, 12), seed=st.integers(0, 2 ** 32 - 1), data=st.data())
    def test_gap_bounded(self, dim, seed, data):
        rng = np.random.default_rng(seed)
        rank = data.draw(st.integers(0, dim))
        phi, vphi = random_unit(dim, rng), random_unit(dim, rng)
        proj = random_projector(dim, rank, rng)
        assert lemma2_gap(phi, vphi, proj) <= LEMMA2_CONST * lemma2_distance(phi, proj) + 1e-9

    def test_near_tight_direction(self, rng):
        # phi almost inside the range: both sides small
        proj = random_projector(4, 3, rng)
        phi = proj @ random_unit(4, rng) + 1e-4 * random_unit(4, rng)
        phi /= np.linalg.norm(phi)
        gap = lemma2_gap(phi, phi, proj)
        assert abs(gap) <= LEMMA2_CONST * lemma2_distance(phi, proj) + 1e-12

    def test_full_projector_gives_zero(self, rng):
        phi, vphi = random_unit(3, rng), random_unit(3, rng)
        assert lemma2_gap(phi, vphi, np.eye(3)) == pytest.approx(0.0, abs=1e-14)

    def test_rejects_bad_inputs(self, rng):
        phi = random_unit(3, rng)
        with pytest.raises(NotNormalized):
            lemma2_gap(2 * phi, phi, np.eye(3))
        with pytest.raises(NotProjector):
            lemma2_gap(phi, phi, 0.5 * np.eye(3))


class TestConverse:
    @pytest.mark.parametrize("pair", [catalog.hadamard_pair(), catalog.tilted_pair()],
                             ids=lambda p: p.label)
    @pytest.mark.parametrize("n", [2, 4, 6])
    @pytest.mark.parametrize("E2", [-1.0, 0.0, 1.0])
    def test_below_optimal_alpha(self, pair, n, E2):
        # every test meeting the beta constraint, including the optimal one, obeys the bound
        rep = divergence_report(pair)
        params = ConverseParams(eps1=0.3, eps2=0.05, f_n=0.0, fprime_n=3.0)
        cb = alpha_lower_bound(pair, n, E2, params, D=rep.D, V=rep.V)
        beta_level = math.exp(-(n * rep.D + math.sqrt(n) * E2))
        opt = alpha_of_beta(pair, n, beta_level)
        assert cb.alpha_lower <= opt.beta + opt.gap + 1e-9

    def test_schedule_bound_below_optimal(self):
        pair = catalog.hadamard_pair()
        for n in (4, 8):
            params = ConverseParams.finite_n_schedule(n)
            cb = alpha_lower_bound(pair, n, 1.5, params)
            rep = divergence_report(pair)
            opt = alpha_of_beta(pair, n, math.exp(-(n * rep.D + 1.5 * math.sqrt(n))))
            assert cb.alpha_lower <= opt.beta + 1e-9

    def test_monte_carlo_fallback(self):
        pair = catalog.tilted_pair()
        params = ConverseParams(eps1=0.2, eps2=0.01, f_n=0.0, fprime_n=8.0)
        exact = alpha_lower_bound(pair, 30, 0.5, params)
        mc = alpha_lower_bound(pair, 30, 0.5, params, max_atoms=10, mc_samples=200_000, seed=1)
        assert exact.method == "exact" and mc.method == "monte_carlo"
        assert abs(mc.tail_term - exact.tail_term) <= 5 * mc.tail_stderr + 1e-9

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateVariance):
            alpha_lower_bound(catalog.pure_vs_mixed(), 3, 0.0,
                              ConverseParams.finite_n_schedule(3))

    def test_tail_grows_with_E2(self):
        pair = catalog.hadamard_pair()
        params = ConverseParams.finite_n_schedule(10)
        tails = [alpha_lower_bound(pair, 10, e, params).tail_term for e in (-2, 0, 2, 4)]
        assert tails == sorted(tails)


class TestDnTerm:
    def test_constraint_met(self):
        params = ConverseParams.finite_n_schedule(16)
        budget = 16 * 0.3 + 4 * 0.5
        assert dn_term_bound(16, -budget - 1, params, 0.3, 0.5) == pytest.approx(
            math.exp(-params.fprime_n))

    def test_constraint_missed_scales_with_beta(self):
        params = ConverseParams(0.1, 0.1, 0.0, 2.0)
        v = dn_term_bound(4, -1.0, params, 0.5, 0.0)
        assert v == pytest.approx(math.exp(2.0 - 2.0 - 1.0))

    def test_capped(self):
        params = ConverseParams(0.1, 0.1, 0.0, 1e-3)
        assert dn_term_bound(4, 0.0, params, 1.0, 1.0) == 1.0
