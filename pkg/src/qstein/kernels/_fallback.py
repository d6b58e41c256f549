"""Pure-Python/numpy versions of the compiled kernels."""
import numpy as np


def _scale(v):
    return np.maximum(1.0, np.abs(v))


def merge_sorted_atoms(values, probs, rtol):
    values = np.asarray(values, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if values.size == 0:
        return values.copy(), probs.copy()
    # a new cluster starts wherever the gap to the previous value exceeds the tolerance
    starts = np.empty(values.size, dtype=bool)
    starts[0] = True
    starts[1:] = np.diff(values) > rtol * _scale(values[1:])
    idx = np.flatnonzero(starts)
    p = np.add.reduceat(probs, idx)
    # each cluster is represented by its smallest member
    v = values[idx]
    keep = p > 0.0
    return v[keep], p[keep]


def convolve_sorted(va, pa, vb, pb, rtol):
    v = np.add.outer(np.asarray(va, float), np.asarray(vb, float)).ravel()
    p = np.multiply.outer(np.asarray(pa, float), np.asarray(pb, float)).ravel()
    order = np.argsort(v, kind="stable")
    return merge_sorted_atoms(v[order], p[order], rtol)


def gram_schmidt(vectors, tol):
    vectors = np.asarray(vectors, dtype=complex)
    nvec, dim = vectors.shape
    q = np.zeros((nvec, dim), dtype=complex)
    keep = np.zeros(nvec, dtype=bool)
    kept = []
    for r in range(nvec):
        v = vectors[r].copy()
        nrm = 0.0
        for _ in range(2):
            for j in kept:
                v -= np.vdot(q[j], v) * q[j]
            nrm = np.linalg.norm(v)
        if nrm >= tol:
            q[r] = v / nrm
            keep[r] = True
            kept.append(r)
    return q, keep
