"""Quick end-to-end invariant suite run by ``qstein selftest``."""
from __future__ import annotations

import math

import numpy as np

from . import catalog
from .achievability import build_test
from .divergences import divergence_report
from .io import ResultRow
from .np_oracle import beta_of_epsilon, classical_beta_of_epsilon
from .ns_classical import berry_esseen_envelope, convolve_n, llr_distribution, standardized_cdf
from .optimality import LEMMA2_CONST, lemma2_distance, lemma2_gap


def _checks(seed: int):
    rng = np.random.default_rng(seed)
    atol = 1e-9

    # classical embedding reproduces D and V
    for k in range(10):
        dim = 2 + k % 3
        p = catalog.random_pair(dim, rng, label=f"random_{k}")
        rep = divergence_report(p)
        d1 = llr_distribution(p)
        err = max(abs(rep.D - d1.mean()), abs(rep.V - d1.var()))
        yield "divergences", f"embedding_moments[{p.label}]", err <= atol, err

    # constructed projector: idempotent and inside its guarantees
    for p in catalog.qubit_suite()[2:4]:
        for n in (1, 3):
            for E2 in (-1.0, 1.0):
                t = build_test(p, n, E2)
                err = float(np.linalg.norm(t.A @ t.A - t.A))
                ok = err <= 1e-8 and t.beta <= t.beta_bound + 1e-10 and t.alpha <= t.tail_bound + atol
                yield "achievability", f"construction[{p.label},n={n},E2={E2:g}]", ok, err

    # oracle gap, closed forms and the classical cross-check
    for eps in (0.1, 0.5):
        r = beta_of_epsilon(catalog.identical(2), 3, eps)
        yield "np-oracle", f"identical[eps={eps}]", abs(r.beta - (1 - eps)) <= atol, r.beta
        r = beta_of_epsilon(catalog.pure_vs_mixed(), 2, eps)
        yield "np-oracle", f"pure_vs_mixed[eps={eps}]", abs(r.beta - (1 - eps) / 4) <= atol, r.beta
        coin = catalog.classical_coin()
        q = beta_of_epsilon(coin, 4, eps)
        c = classical_beta_of_epsilon(coin, 4, eps)
        yield "np-oracle", f"classical_match[eps={eps}]", abs(q.beta - c.beta) <= atol, q.beta
        r = beta_of_epsilon(catalog.hadamard_pair(), 3, eps)
        yield "np-oracle", f"dual_gap[eps={eps}]", r.gap <= 1e-6, r.gap

    # vector inequality behind the converse
    worst = -math.inf
    for _ in range(200):
        dim = int(rng.integers(2, 9))
        phi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        vphi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        phi /= np.linalg.norm(phi)
        vphi /= np.linalg.norm(vphi)
        basis = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))[0]
        cols = basis[:, : int(rng.integers(0, dim + 1))]
        proj = cols @ cols.conj().T
        worst = max(worst, lemma2_gap(phi, vphi, proj) - LEMMA2_CONST * lemma2_distance(phi, proj))
    yield "optimality", "projection_inequality_random", worst <= atol, worst

    # Berry-Esseen envelope on the coin
    d1 = llr_distribution(catalog.classical_coin())
    dn = convolve_n(d1, 16)
    t3 = d1.abs_central_moment(3)
    bad = 0
    for x in np.linspace(-3, 3, 13):
        lo, hi = berry_esseen_envelope(0.0, d1.var(), t3, 16, x * math.sqrt(d1.var()))
        f = standardized_cdf(dn, d1.mean(), x * math.sqrt(d1.var()))
        bad += not (lo - atol <= f <= hi + atol)
    yield "ns-classical", "berry_esseen_envelope", bad == 0, float(bad)

    # zero-variance detection
    p = catalog.pure_vs_mixed()
    rep = divergence_report(p)
    yield "divergences", "degenerate_flag", rep.degenerate and rep.V <= atol, rep.V
    p = catalog.random_pair(3, rng)
    yield "divergences", "generic_not_degenerate", not divergence_report(p).degenerate, 0.0


def run_selftest(cfg):
    from .sweep import Check, SweepResult
    rows, checks = [], []
    for module, name, ok, value in _checks(cfg.seed):
        rows.append(ResultRow("selftest", module, "selftest", name, value=float(value),
                              status="pass" if ok else "fail"))
        checks.append(Check(name, bool(ok), repr(value)))
    return SweepResult(rows, checks)
