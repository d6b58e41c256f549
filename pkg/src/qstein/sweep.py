"""Experiment runner behind the command line.

``run_sweep`` evaluates one mode over the grid ``n x eps`` (or ``n x E2``),
returns the result rows in a fixed order together with a summary of the
internal consistency checks, and maps the outcome to an exit code.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, catalog, kernels
from .achievability import Threshold, build_test_at, classical_test_errors
from .bounds import (BERRY_ESSEEN_C, finite_n_bounds_from_moments, lower_condition,
                     second_order_residual, theorem1_limit, upper_condition)
from .divergences import divergence_report
from .errors import AtomBudgetExceeded, BudgetExceeded, InvariantViolation, QSteinError
from .io import ResultRow, load_state_pair
from .np_oracle import beta_of_epsilon, classical_beta_of_epsilon
from .ns_classical import BELOW, convolve_n, llr_distribution, tail_prob
from .optimality import ConverseParams, alpha_lower_bound
from .states import StatePair

MODES = ("divergences", "achievability", "oracle", "bounds", "sweep", "selftest")

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3

DEFAULT_TOLERANCES = {
    "oracle_gap": 1e-6,
    "check_atol": 1e-9,
    "max_dim": 4096,
    "max_atoms": 2_000_000,
    "mc_samples": 200_000,
}

CATALOG_PREFIX = "catalog:"
CATALOG = {
    "classical_coin": catalog.classical_coin,
    "identical": catalog.identical,
    "pure_vs_mixed": catalog.pure_vs_mixed,
    "hadamard": catalog.hadamard_pair,
    "tilted": catalog.tilted_pair,
}


def resolve_pair(spec: str) -> StatePair:
    """Load a pair file, or a built-in pair given as ``catalog:<name>``."""
    if spec.startswith(CATALOG_PREFIX):
        name = spec[len(CATALOG_PREFIX):]
        if name not in CATALOG:
            raise InvariantViolation([f"unknown catalog pair {name!r}; "
                                      f"choose from {', '.join(sorted(CATALOG))}"])
        return CATALOG[name]()
    return load_state_pair(spec)


@dataclass
class ExperimentConfig:
    state_pair_path: str
    n_values: list[int] = field(default_factory=lambda: [1, 2, 4])
    eps_values: list[float] = field(default_factory=lambda: [0.1, 0.25, 0.5])
    E2_values: list[float] = field(default_factory=lambda: [0.0])
    mode: str = "sweep"
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    C: float = BERRY_ESSEEN_C
    output_path: str | None = None
    timing: bool = False

    def __post_init__(self):
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}
        problems = []
        if self.mode not in MODES:
            problems.append(f"mode must be one of {', '.join(MODES)}")
        if any(int(n) != n or n < 1 for n in self.n_values):
            problems.append("n values must be positive integers")
        if any(not 0.0 < e < 1.0 for e in self.eps_values):
            problems.append("eps values must lie in (0, 1)")
        if any(not math.isfinite(e) for e in self.E2_values):
            problems.append("E2 values must be finite")
        if not self.C > 0:
            problems.append("C must be positive")
        if (self.mode != "selftest" and not self.state_pair_path.startswith(CATALOG_PREFIX)
                and not Path(self.state_pair_path).is_file()):
            problems.append(f"pair file {self.state_pair_path!r} does not exist")
        if problems:
            raise InvariantViolation(problems)
        self.n_values = sorted({int(n) for n in self.n_values})
        self.eps_values = sorted(set(self.eps_values))
        self.E2_values = sorted(set(self.E2_values))

    def echo(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SweepResult:
    rows: list[ResultRow]
    checks: list[Check]
    budget_exceeded: int = 0
    errors: int = 0

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    @property
    def exit_code(self) -> int:
        if self.failures or self.errors:
            return EXIT_INVARIANT
        if self.budget_exceeded:
            return EXIT_BUDGET
        return EXIT_OK

    def summary(self) -> dict:
        return {
            "rows": len(self.rows),
            "checks": len(self.checks),
            "failed_checks": [asdict(c) for c in self.failures],
            "budget_exceeded": self.budget_exceeded,
            "errors": self.errors,
            "exit_code": self.exit_code,
        }


class _Runner:
    def __init__(self, cfg: ExperimentConfig, pair: StatePair):
        self.cfg = cfg
        self.pair = pair
        self.tol = cfg.tolerances
        self.rows: list[ResultRow] = []
        self.checks: list[Check] = []
        self.budget = 0
        self.errors = 0
        self.rep = divergence_report(pair)
        self._oracle_cache: dict = {}

    # bookkeeping -----------------------------------------------------------
    def row(self, module, source, quantity, t0=None, **kw) -> ResultRow:
        kw.setdefault("D", self.rep.D)
        kw.setdefault("V", self.rep.V)
        kw.setdefault("T3", self.rep.T3)
        r = ResultRow(self.pair.label, module, source, quantity, **kw)
        if self.cfg.timing and t0 is not None:
            r.runtime_ms = round((time.perf_counter() - t0) * 1e3, 3)
        self.rows.append(r)
        return r

    def check(self, name: str, ok: bool, detail: str = ""):
        self.checks.append(Check(name, bool(ok), detail))

    def fail_row(self, module, source, quantity, exc: Exception, **kw):
        if isinstance(exc, (BudgetExceeded, AtomBudgetExceeded)):
            self.budget += 1
            status = "budget_exceeded"
        else:
            self.errors += 1
            status = f"error:{type(exc).__name__}"
        self.row(module, source, quantity, status=status, **kw)

    @property
    def max_dim(self) -> int:
        return int(self.tol["max_dim"])

    def fits(self, n: int) -> bool:
        return self.pair.dim ** n <= self.max_dim

    # oracle ----------------------------------------------------------------
    def oracle(self, n: int, eps: float):
        """``(beta, neg_log_beta, certificate, gap, t_star, pos_trace, source)``."""
        key = (n, eps)
        if key not in self._oracle_cache:
            if self.fits(n):
                res = beta_of_epsilon(self.pair, n, eps, tol=self.tol["oracle_gap"],
                                      max_dim=self.max_dim)
                pos = next((e.pos_trace for e in res.evaluations if e.t == res.t_star), math.nan)
                out = (res.beta, res.neg_log_beta, res.certificate, res.gap, res.t_star, pos,
                       "neyman-pearson-dual")
            elif self.pair.commutes():
                c = classical_beta_of_epsilon(self.pair, n, eps)
                out = (c.beta, c.neg_log_beta, None, None, None, None, "classical-neyman-pearson")
            else:
                raise BudgetExceeded(self.pair.dim ** n, self.max_dim)
            self._oracle_cache[key] = out
        return self._oracle_cache[key]

    def oracle_rows(self, n: int, eps: float):
        t0 = time.perf_counter()
        try:
            beta, nlb, cert, gap, _, _, src = self.oracle(n, eps)
        except (QSteinError, ValueError) as exc:
            self.fail_row("np-oracle", "neyman-pearson-dual", "beta", exc, n=n, eps=eps)
            return None
        status = "ok"
        if gap is not None and gap > self.tol["oracle_gap"]:
            status = "gap_above_tol"
        self.row("np-oracle", src, "beta", t0, n=n, eps=eps, value=beta, lower=cert,
                 certificate=cert, gap=gap, status=status)
        self.row("np-oracle", src, "neg_log_beta", n=n, eps=eps, value=nlb)
        if gap is not None:
            self.check(f"oracle_gap[n={n},eps={eps}]", -1e-12 <= gap <= self.tol["oracle_gap"],
                       f"gap={gap:.3e}")
        if self.rep.degenerate:
            # zero variance: the frontier is the line alpha = 1 - beta exp(nD)
            expect = (1.0 - eps) * math.exp(-n * self.rep.D)
            self.check(f"degenerate_frontier[n={n},eps={eps}]",
                       abs(beta - expect) <= self.tol["check_atol"],
                       f"beta={beta!r} expected={expect!r}")
        return beta, nlb

    # bounds ----------------------------------------------------------------
    def bound_rows(self, n: int, eps: float, neg_log_beta: float | None = None):
        rep = self.rep
        C = self.cfg.C
        if rep.V <= 0:
            self.row("bounds", "berry-esseen-sandwich", "lower", n=n, eps=eps, c_const=C,
                     lower_applicable=False, upper_applicable=False,
                     status="degenerate_variance")
            return
        b = finite_n_bounds_from_moments(rep.D, rep.V, rep.T3, n, eps, C)
        common = dict(n=n, eps=eps, c_const=C, lower_applicable=b.lower_applicable,
                      upper_applicable=b.upper_applicable)
        self.row("bounds", "berry-esseen-lower", "lower", value=b.lower, lower=b.lower,
                 status="ok" if b.lower_applicable else "not_applicable", **common)
        self.row("bounds", "converse-schedule-upper", "upper", value=b.upper, upper=b.upper,
                 status="ok" if b.upper_applicable else "not_applicable", **common)
        self.check(f"bound_flags[n={n},eps={eps}]",
                   b.lower_applicable == lower_condition(n, eps, C, rep.V, rep.T3)
                   and b.upper_applicable == upper_condition(n, eps, C, rep.V, rep.T3))
        if neg_log_beta is None:
            return
        ok = True
        atol = self.tol["check_atol"]
        if b.lower_applicable:
            ok &= b.lower <= neg_log_beta + atol
        if b.upper_applicable:
            ok &= neg_log_beta <= b.upper + atol
        self.row("bounds", "sandwich", "neg_log_beta", value=neg_log_beta, lower=b.lower,
                 upper=b.upper, status="ok" if ok else "violated", **common)
        self.check(f"sandwich[n={n},eps={eps}]", ok,
                   f"lower={b.lower} value={neg_log_beta} upper={b.upper}")
        res = second_order_residual(None, n, eps, neg_log_beta, D=rep.D, V=rep.V)
        self.row("bounds", "second-order-residual", "residual", value=res, n=n, eps=eps)

    # achievability ---------------------------------------------------------
    def achievability_rows(self, th: Threshold, eps: float | None = None, oracle_info=None):
        n = th.n
        t0 = time.perf_counter()
        atol = self.tol["check_atol"]
        common = dict(n=n, eps=eps, e2=th.E2)
        tag = f"n={n},E2={th.E2:.6g}"
        try:
            if self.fits(n):
                t = build_test_at(self.pair, th, max_dim=self.max_dim)
                alpha, beta, tail = t.alpha, t.beta, t.tail_bound
                proj_err = float(np.linalg.norm(t.A @ t.A - t.A))
                src = "constructed-projector"
            elif self.pair.commutes():
                alpha, beta = classical_test_errors(self.pair, n, th.log_L)
                tail = tail_prob(convolve_n(llr_distribution(self.pair), n), th.log_L, BELOW)
                proj_err = None
                src = "classical-likelihood-region"
            else:
                raise BudgetExceeded(self.pair.dim ** n, self.max_dim)
        except (QSteinError, ValueError) as exc:
            self.fail_row("achievability", "constructed-projector", "alpha", exc, **common)
            return None
        bb = math.exp(-th.log_L)
        self.row("achievability", src, "alpha", t0, value=alpha, upper=tail, **common)
        self.row("achievability", src, "beta", value=beta, upper=bb, **common)
        self.row("achievability", src, "log_L", value=th.log_L, **common)
        if proj_err is not None:
            self.row("achievability", src, "projector_error", value=proj_err, **common)
            self.check(f"projector[{tag}]", proj_err <= 1e-8, f"{proj_err:.3e}")
        self.check(f"achievability_beta[{tag}]", beta <= bb + 1e-10, f"{beta!r} vs {bb!r}")
        self.check(f"achievability_alpha[{tag}]", alpha <= tail + atol, f"{alpha!r} vs {tail!r}")
        if oracle_info is not None and oracle_info[4] is not None:
            # weak duality at the oracle's multiplier: t(1 - alpha) - beta <= Tr(t rho_n - sigma_n)_+
            t_star, pos = oracle_info[4], oracle_info[5]
            floor = 1.0 - (beta + pos) / t_star
            self.check(f"achievability_vs_oracle[{tag}]", alpha >= floor - atol,
                       f"alpha={alpha!r} floor={floor!r}")
        return alpha, beta

    # optimality ------------------------------------------------------------
    def converse_rows(self, n: int, E2: float, eps: float | None = None,
                      alpha_cap: float | None = None):
        rep = self.rep
        common = dict(n=n, eps=eps, e2=E2)
        if rep.V <= 0:
            self.row("optimality", "converse-schedule", "alpha_lower",
                     status="degenerate_variance", **common)
            return
        t0 = time.perf_counter()
        params = ConverseParams.finite_n_schedule(n)
        try:
            cb = alpha_lower_bound(self.pair, n, E2, params, D=rep.D, V=rep.V,
                                   max_atoms=int(self.tol["max_atoms"]),
                                   mc_samples=int(self.tol["mc_samples"]), seed=self.cfg.seed)
        except (QSteinError, ValueError) as exc:
            self.fail_row("optimality", "converse-schedule", "alpha_lower", exc, **common)
            return
        src = "converse-schedule" if cb.method == "exact" else "converse-schedule-monte-carlo"
        self.row("optimality", src, "alpha_lower", t0, value=cb.alpha_lower, lower=cb.alpha_lower,
                 certificate=cb.tail_term, gap=cb.correction, **common)
        if alpha_cap is not None:
            slack = self.tol["check_atol"] + 5.0 * cb.tail_stderr
            self.check(f"converse_vs_oracle[n={n},eps={eps}]", cb.alpha_lower <= alpha_cap + slack,
                       f"alpha_lower={cb.alpha_lower!r} eps={alpha_cap!r}")

    # modes -----------------------------------------------------------------
    def divergences(self):
        rep = self.rep
        t0 = time.perf_counter()
        d1 = llr_distribution(self.pair)
        self.row("divergences", "operator-trace", "D", t0, value=rep.D)
        self.row("divergences", "operator-trace", "V", value=rep.V)
        self.row("divergences", "classical-embedding", "T3", value=rep.T3)
        self.row("divergences", "zero-variance-test", "degenerate",
                 value=1.0 if rep.degenerate else 0.0,
                 certificate=rep.k if rep.k is not None else None)
        if math.isfinite(rep.D):
            dm, dv = abs(rep.D - d1.mean()), abs(rep.V - d1.var())
            self.row("divergences", "classical-embedding", "llr_mean", value=d1.mean(), gap=dm)
            self.row("divergences", "classical-embedding", "llr_var", value=d1.var(), gap=dv)
            self.check("embedding_mean", dm <= self.tol["check_atol"], f"{dm:.3e}")
            self.check("embedding_var", dv <= self.tol["check_atol"], f"{dv:.3e}")

    def achievability(self):
        for n in self.cfg.n_values:
            for E2 in self.cfg.E2_values:
                self.achievability_rows(Threshold(n, E2, 0.0, self.rep.D))
                self.converse_rows(n, E2)

    def oracle_mode(self):
        for n in self.cfg.n_values:
            for eps in self.cfg.eps_values:
                self.oracle_rows(n, eps)

    def bounds(self):
        for n in self.cfg.n_values:
            for eps in self.cfg.eps_values:
                self.bound_rows(n, eps)
        if self.rep.V > 0:
            for E2 in self.cfg.E2_values:
                v = theorem1_limit(self.pair, self.rep.D, E2, D=self.rep.D, V=self.rep.V)
                self.row("bounds", "second-order-limit", "limit_alpha", e2=E2,
                         value=v.limit_alpha, status=v.regime)

    def sweep(self):
        self.divergences()
        for n in self.cfg.n_values:
            for eps in self.cfg.eps_values:
                out = self.oracle_rows(n, eps)
                if out is None:
                    continue
                beta, nlb = out
                self.bound_rows(n, eps, nlb)
                if not math.isfinite(nlb):
                    continue
                # matched exponent: L_n = 1/beta_n(eps)
                E2 = (nlb - n * self.rep.D) / math.sqrt(n)
                self.achievability_rows(Threshold(n, E2, 0.0, self.rep.D), eps,
                                        self._oracle_cache[(n, eps)])
                self.converse_rows(n, E2, eps, alpha_cap=eps)


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Evaluate ``cfg.mode``; rows come back in deterministic grid order."""
    if cfg.mode == "selftest":
        from .selftest import run_selftest
        return run_selftest(cfg)
    pair = resolve_pair(cfg.state_pair_path)
    r = _Runner(cfg, pair)
    {"divergences": r.divergences, "achievability": r.achievability, "oracle": r.oracle_mode,
     "bounds": r.bounds, "sweep": r.sweep}[cfg.mode]()
    return SweepResult(r.rows, r.checks, r.budget, r.errors)


def build_manifest(cfg: ExperimentConfig, result: SweepResult) -> dict:
    return {
        "package": "qstein",
        "version": __version__,
        "config": cfg.echo(),
        "tolerances": cfg.tolerances,
        "kernel_backend": kernels.BACKEND,
        "summary": result.summary(),
    }
