"""Exact optimal tradeoff between the two error types, with certificates.

The optimal tests are (randomised) Neyman-Pearson projectors onto the
positive part of ``t rho_n - sigma_n``. For every ``t >= 0`` the weak
duality bound

    beta_n(eps) >= t (1 - eps) - Tr(t rho_n - sigma_n)_+

holds, so each evaluated ``t`` yields a certificate and the primal value
obtained by randomising between two bracketing tests is certified to
within the reported gap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ToleranceNotReached
from .linalg import DEFAULT_MAX_DIM, as_matrix, kron_power_array
from .ns_classical import LLRDistribution, convolve_n, llr_distribution
from .states import StatePair

DEFAULT_TOL = 1e-6
EIG_RTOL = 1e-12
CANDIDATE_RTOL = 1e-9
MAX_ITER = 200
T_MAX = 1e300


class NPTest(NamedTuple):
    alpha: float
    beta: float
    projector: np.ndarray


@dataclass(frozen=True)
class _Eval:
    t: float
    alpha: float          # with P = positive part
    beta: float
    alpha_k: float        # with P = positive part + kernel
    beta_k: float
    pos_trace: float      # Tr(t rho - sigma)_+


class _Pencil:
    """Evaluates Neyman-Pearson tests of a fixed ``(rho_n, sigma_n)``."""

    def __init__(self, rho_n: np.ndarray, sigma_n: np.ndarray):
        self.rho = rho_n
        self.sigma = sigma_n
        self.cache: dict[float, _Eval] = {}

    def __call__(self, t: float) -> _Eval:
        hit = self.cache.get(t)
        if hit is not None:
            return hit
        m = t * self.rho - self.sigma
        w, u = np.linalg.eigh(0.5 * (m + m.conj().T))
        tol = EIG_RTOL * max(1.0, t)
        pos = w > tol
        zero = np.abs(w) <= tol
        r_diag = np.real(np.sum(u.conj() * (self.rho @ u), axis=0))
        s_diag = np.real(np.sum(u.conj() * (self.sigma @ u), axis=0))
        a = 1.0 - float(r_diag[pos].sum())
        b = float(s_diag[pos].sum())
        # the certificate needs every positive eigenvalue, including those inside the zero band
        ev = _Eval(t, a, b, a - float(r_diag[zero].sum()), b + float(s_diag[zero].sum()),
                   float(w[w > 0].sum()))
        self.cache[t] = ev
        return ev

    def candidates(self) -> np.ndarray:
        """Values of ``t`` where ``t rho_n - sigma_n`` becomes singular (ascending)."""
        ws, us = np.linalg.eigh(self.sigma)
        inv_sqrt = (us / np.sqrt(ws)) @ us.conj().T
        nu = np.linalg.eigvalsh(inv_sqrt @ self.rho @ inv_sqrt)
        nu = nu[nu > 1e-14 * max(1.0, nu[-1])]
        ts = np.sort(1.0 / nu)
        out = [ts[0]]
        for t in ts[1:]:
            if t - out[-1] > CANDIDATE_RTOL * t:
                out.append(t)
        return np.asarray(out)


def np_test(rho_n, sigma_n, t: float) -> NPTest:
    """Projector onto the strictly positive eigenspace of ``t rho_n - sigma_n``."""
    rho_n = as_matrix(getattr(rho_n, "matrix", rho_n))
    sigma_n = as_matrix(getattr(sigma_n, "matrix", sigma_n))
    m = t * rho_n - sigma_n
    w, u = np.linalg.eigh(0.5 * (m + m.conj().T))
    up = u[:, w > EIG_RTOL * max(1.0, t)]
    proj = up @ up.conj().T
    alpha = float(np.real(1.0 - np.sum(rho_n * proj.T)))
    beta = float(np.real(np.sum(sigma_n * proj.T)))
    return NPTest(alpha, beta, proj)


@dataclass
class OracleResult:
    beta: float
    certificate: float
    gap: float
    t_star: float
    iterations: int
    evaluations: list = field(default_factory=list, repr=False)

    @property
    def neg_log_beta(self) -> float:
        return -math.log(self.beta) if self.beta > 0 else math.inf


def _midpoint(lo: float, hi: float) -> float:
    if lo > 0 and hi > 2.0 * lo:
        return math.sqrt(lo * hi)
    return 0.5 * (lo + hi)


def _probe_points(cands: np.ndarray) -> list[float]:
    pts = [0.5 * cands[0]]
    pts += [0.5 * (a + b) for a, b in zip(cands[:-1], cands[1:])]
    pts.append(2.0 * cands[-1])
    return pts


def _bracket(pencil: _Pencil, key, target: float):
    """Probe points ``lo < hi`` with ``key(lo) >= target >= key(hi)``; key nonincreasing in t."""
    pts = _probe_points(pencil.candidates())
    if key(pencil(pts[0])) < target:
        return 0.0, pts[0]
    lo_i, hi_i = 0, len(pts) - 1
    if key(pencil(pts[hi_i])) >= target:
        # rank-deficient rho: the type I error only vanishes as t -> inf
        lo_t, t = pts[hi_i], 2.0 * pts[hi_i]
        while key(pencil(t)) > target:
            if t > T_MAX:
                raise ToleranceNotReached(math.inf, 0.0)
            lo_t, t = t, 2.0 * t
        return lo_t, t
    while hi_i - lo_i > 1:
        mid = (lo_i + hi_i) // 2
        if key(pencil(pts[mid])) >= target:
            lo_i = mid
        else:
            hi_i = mid
    return pts[lo_i], pts[hi_i]


def _search(pencil: _Pencil, eps: float, tol: float, mode: str):
    """Shared bracket-and-bisect loop.

    ``mode='beta'``: minimise beta subject to alpha <= eps (eps is the alpha budget).
    ``mode='alpha'``: minimise alpha subject to beta <= eps (eps is the beta budget).
    """
    target_stop = min(tol, 1e-11)
    if mode == "beta":
        key = lambda e: e.alpha                     # noqa: E731  nonincreasing in t
        target = eps
    else:
        key = lambda e: -e.beta                     # noqa: E731
        target = -eps

    lo, hi = _bracket(pencil, key, target)
    cands = pencil.candidates()

    def dual(e: _Eval) -> float:
        if mode == "beta":
            return e.t * (1.0 - eps) - e.pos_trace
        if e.t == 0:
            return -math.inf
        return 1.0 - (eps + e.pos_trace) / e.t

    def primal(a: _Eval, b: _Eval) -> float:
        # randomise between the test at a (key >= target) and at b (key <= target)
        if mode == "beta":
            xa, ya, xb, yb = a.alpha, a.beta, b.alpha, b.beta
        else:
            xa, ya, xb, yb = -a.beta, a.alpha, -b.beta, b.alpha
        if xa <= target:
            return ya
        if xb >= target or xa == xb:
            return yb
        w = (xa - target) / (xa - xb)
        return (1.0 - w) * ya + w * yb

    for c in cands[(cands > lo) & (cands < hi)]:
        pencil(float(c))
    it = 0
    while True:
        ea, eb = pencil(lo), pencil(hi)
        value = primal(ea, eb)
        certs = [dual(e) for e in pencil.cache.values()]
        cert = max(certs)
        t_star = max(pencil.cache.values(), key=dual).t
        gap = value - cert
        if gap <= target_stop or it >= MAX_ITER or hi - lo <= 4e-16 * hi:
            break
        mid = _midpoint(lo, hi)
        if key(pencil(mid)) >= target:
            lo = mid
        else:
            hi = mid
        it += 1
    if gap > tol:
        raise ToleranceNotReached(gap, tol)
    return value, cert, gap, t_star, it


def _n_copy(p: StatePair, n: int, max_dim: int):
    return (kron_power_array(p.rho.matrix, n, max_dim),
            kron_power_array(p.sigma.matrix, n, max_dim))


def beta_of_epsilon(p: StatePair, n: int, eps: float, tol: float = DEFAULT_TOL,
                    max_dim: int = DEFAULT_MAX_DIM) -> OracleResult:
    """Minimal type II error over all tests with type I error at most ``eps``."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    pencil = _Pencil(*_n_copy(p, n, max_dim))
    beta, cert, gap, t_star, it = _search(pencil, eps, tol, "beta")
    return OracleResult(beta, cert, gap, t_star, it, sorted(pencil.cache.values(), key=lambda e: e.t))


def alpha_of_beta(p: StatePair, n: int, beta_level: float, tol: float = DEFAULT_TOL,
                  max_dim: int = DEFAULT_MAX_DIM) -> OracleResult:
    """Minimal type I error over all tests with type II error at most ``beta_level``.

    The returned ``beta`` field holds the optimal alpha; the certificate is
    ``max_t 1 - (beta_level + Tr(t rho_n - sigma_n)_+)/t``.
    """
    if beta_level >= 1.0:
        return OracleResult(0.0, 0.0, 0.0, math.inf, 0)
    if beta_level <= 0.0:
        return OracleResult(1.0, 1.0, 0.0, 0.0, 0)
    pencil = _Pencil(*_n_copy(p, n, max_dim))
    alpha, cert, gap, t_star, it = _search(pencil, beta_level, tol, "alpha")
    return OracleResult(alpha, cert, gap, t_star, it, sorted(pencil.cache.values(), key=lambda e: e.t))


def _lower_hull(points):
    """Lower convex envelope of (alpha, beta) points, ascending in alpha."""
    pts = sorted(set(points))
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (pt[1] - y1) - (y2 - y1) * (pt[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(pt)
    # keep only the nonincreasing part (the tradeoff frontier)
    out = [hull[0]]
    for pt in hull[1:]:
        if pt[1] <= out[-1][1]:
            out.append(pt)
    return out


@dataclass
class TradeoffCurve:
    """Sampled Neyman-Pearson tests with their lower convex envelope.

    ``points`` holds ``(t, alpha, beta)`` for both the positive-part test and
    the one that also accepts the kernel. ``dual_gap`` is the largest
    certified gap over the declared query levels.
    """

    points: list
    hull: list
    dual_gap: float
    queries: dict = field(default_factory=dict)

    def beta_at(self, alpha: float) -> float:
        """Chord interpolation of the hull; exact at sampled points, an upper bound between."""
        xs = [h[0] for h in self.hull]
        ys = [h[1] for h in self.hull]
        if alpha <= xs[0]:
            return ys[0]
        return float(np.interp(alpha, xs, ys))

    def dual_certificate(self, eps: float) -> float:
        return max(t * (1.0 - eps) - pt for t, pt in self._traces)

    _traces: list = field(default_factory=list, repr=False)


def tradeoff_curve(p: StatePair, n: int, query_eps=(0.1, 0.25, 0.5), tol: float = DEFAULT_TOL,
                   max_dim: int = DEFAULT_MAX_DIM) -> TradeoffCurve:
    pencil = _Pencil(*_n_copy(p, n, max_dim))
    cands = pencil.candidates()
    for t in list(cands) + _probe_points(cands):
        pencil(float(t))
    queries = {}
    for eps in query_eps:
        beta, cert, gap, t_star, _ = _search(pencil, eps, tol, "beta")
        queries[eps] = (beta, cert, gap)
    pts = []
    for e in sorted(pencil.cache.values(), key=lambda e: e.t):
        pts.append((e.t, e.alpha, e.beta))
        if e.alpha_k != e.alpha:
            pts.append((e.t, e.alpha_k, e.beta_k))
    pts += [(0.0, 1.0, 0.0), (math.inf, 0.0, 1.0)]
    hull = _lower_hull([(a, b) for _, a, b in pts])
    curve = TradeoffCurve(pts, hull, max((q[2] for q in queries.values()), default=0.0), queries)
    curve._traces = [(e.t, e.pos_trace) for e in pencil.cache.values()]
    return curve


def classical_np(lambda_n, mu_n, eps: float) -> float:
    """Optimal randomised likelihood-ratio test on paired cell probabilities.

    Cells are accepted in order of decreasing ``lambda/mu`` until their
    lambda-mass reaches ``1 - eps``; the last group is accepted fractionally.
    """
    lam = np.asarray(lambda_n, dtype=float).ravel()
    mu = np.asarray(mu_n, dtype=float).ravel()
    keep = lam > 0
    lam, mu = lam[keep], mu[keep]
    with np.errstate(divide="ignore"):
        llr = np.log(lam) - np.log(mu)
    return _np_fill(llr, lam, mu, eps)


def _np_fill(llr, lam, mu, eps):
    order = np.argsort(-llr, kind="stable")
    llr, lam, mu = llr[order], lam[order], mu[order]
    need = 1.0 - eps
    acc = 0.0
    beta = 0.0
    i = 0
    while i < llr.size and acc < need:
        j = i + 1
        while j < llr.size and _same_ratio(llr[i], llr[j]):
            j += 1
        g_lam = float(lam[i:j].sum())
        g_mu = float(mu[i:j].sum())
        if acc + g_lam <= need:
            acc += g_lam
            beta += g_mu
        else:
            beta += g_mu * (need - acc) / g_lam
            acc = need
        i = j
    return beta


def _same_ratio(a, b):
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= 1e-12 * max(1.0, abs(a))


@dataclass(frozen=True)
class ClassicalNPResult:
    beta: float
    neg_log_beta: float


def classical_np_llr(d_n: LLRDistribution, eps: float) -> ClassicalNPResult:
    """Neyman-Pearson optimum from an n-fold log-likelihood-ratio law.

    Valid when the two hypotheses commute: the alternative's mass on an
    atom ``v`` is ``p(v) exp(-v)``. Works in the log domain so that
    exponentially small betas keep full relative precision.
    """
    order = np.argsort(-d_n.values, kind="stable")
    v = d_n.values[order]
    p = d_n.probs[order]
    need = 1.0 - eps
    cum = np.cumsum(p)
    k = int(np.searchsorted(cum, need, side="left"))
    k = min(k, v.size - 1)
    prev = cum[k - 1] if k > 0 else 0.0
    frac = (need - prev) / p[k]
    logs = list(np.log(p[:k]) - v[:k])
    if frac > 0:
        logs.append(math.log(frac * p[k]) - v[k])
    if not logs:
        return ClassicalNPResult(0.0, math.inf)
    logs = np.asarray(logs)
    top = logs.max()
    log_beta = top + math.log(np.exp(logs - top).sum())
    return ClassicalNPResult(math.exp(log_beta), -log_beta)


def classical_beta_of_epsilon(p: StatePair, n: int, eps: float) -> ClassicalNPResult:
    """``beta_n(eps)`` for a commuting pair at any ``n`` via exact convolution."""
    if not p.commutes():
        raise ValueError("classical evaluation requires commuting states")
    return classical_np_llr(convolve_n(llr_distribution(p), n), eps)
