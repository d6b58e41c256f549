"""Compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Each workload is run through both backends; the output lists the best
wall time of each and the speed-up. Results are also checked for agreement.
"""
import argparse
import time

import numpy as np

from qstein import catalog
from qstein.achievability import Threshold, ascending_order, xi_matrix
from qstein.divergences import quantum_relative_entropy
from qstein.kernels import _fallback
from qstein.linalg import random_density
from qstein.ns_classical import MERGE_RTOL, llr_distribution
from qstein.states import StatePair

try:
    from qstein.kernels import _core
except ImportError:
    _core = None


def repeated_convolution(impl, d, n):
    v, p = d.values, d.probs
    for _ in range(n - 1):
        v, p = impl.convolve_sorted(v, p, d.values, d.probs, MERGE_RTOL)
    return v, p


def workloads():
    coin = llr_distribution(catalog.classical_coin())
    rng = np.random.default_rng(0)
    qutrit = llr_distribution(StatePair(random_density(3, rng), random_density(3, rng)))
    yield "convolve coin n=1600", lambda m: repeated_convolution(m, coin, 1600)
    yield "convolve qutrit n=6", lambda m: repeated_convolution(m, qutrit, 6)

    raw = np.sort(rng.normal(size=200_000).round(3))
    probs = rng.random(raw.size)
    yield "merge 2e5 atoms", lambda m: m.merge_sorted_atoms(raw, probs, 1e-12)

    for n in (6, 8):
        pair = catalog.hadamard_pair()
        D = quantum_relative_entropy(pair)
        th = Threshold(n, 0.0, 0.0, D)
        xi, ll = xi_matrix(pair, n, th.log_L)
        rows = np.ascontiguousarray(xi[:, ascending_order(ll)].T)
        yield f"gram-schmidt hadamard n={n}", lambda m, r=rows: m.gram_schmidt(r, 1e-9)


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _core is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'workload':32s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speed-up':>9s}  agree")
    for name, job in workloads():
        tp, op = best_time(lambda: job(_fallback), args.repeat)
        if _core is None:
            print(f"{name:32s} {tp * 1e3:12.2f} {'-':>14s} {'-':>9s}")
            continue
        tc, oc = best_time(lambda: job(_core), args.repeat)
        agree = all(np.allclose(a, b, rtol=1e-12, atol=1e-14) for a, b in zip(op, oc))
        print(f"{name:32s} {tp * 1e3:12.2f} {tc * 1e3:14.2f} {tp / tc:8.1f}x  {agree}")


if __name__ == "__main__":
    main()
