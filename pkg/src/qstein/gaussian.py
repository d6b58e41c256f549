"""Standard normal CDF and its inverse.

``norm_cdf`` is erfc-based so the lower tail keeps full relative accuracy.
``norm_ppf`` starts from the stdlib rational approximation and polishes
with safeguarded Newton steps (bisection whenever a step leaves the
bracket), targeting ~1e-12 agreement with ``norm_cdf``.
"""
import math
from statistics import NormalDist

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_STD = NormalDist()


def norm_cdf(x: float) -> float:
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    return 0.5 * math.erfc(-x / _SQRT2)


def norm_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def norm_ppf(u: float, tol: float = 1e-14, max_iter: int = 60) -> float:
    """Inverse of :func:`norm_cdf`; returns +-inf at 1 and 0."""
    if not 0.0 <= u <= 1.0 or math.isnan(u):
        raise ValueError(f"probability out of range: {u}")
    if u == 0.0:
        return -math.inf
    if u == 1.0:
        return math.inf
    if u > 0.5:
        # 1 - u is exact here; solve in the lower tail where cdf has full relative precision
        return -norm_ppf(1.0 - u, tol, max_iter)
    lo, hi = -40.0, 40.0
    try:
        x = _STD.inv_cdf(u)
    except Exception:
        x = 0.0
    for _ in range(max_iter):
        f = norm_cdf(x) - u
        if f > 0:
            hi = min(hi, x)
        else:
            lo = max(lo, x)
        d = norm_pdf(x)
        step = f / d if d > 0 else math.inf
        if abs(step) <= tol * max(1.0, abs(x)):
            return x - step
        nxt = x - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        x = nxt
    return x
