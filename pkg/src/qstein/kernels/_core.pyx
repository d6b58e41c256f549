# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Semantics mirror ``_fallback`` exactly."""
import numpy as np

from libc.math cimport fabs, sqrt


cdef inline double _scale(double v) nogil:
    cdef double a = fabs(v)
    return a if a > 1.0 else 1.0


def merge_sorted_atoms(const double[::1] values, const double[::1] probs, double rtol):
    cdef Py_ssize_t n = values.shape[0]
    out_v_arr = np.empty(n, dtype=np.float64)
    out_p_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out_v = out_v_arr
    cdef double[::1] out_p = out_p_arr
    cdef Py_ssize_t i, k = 0
    cdef double acc_p, first, prev, v
    if n == 0:
        return out_v_arr, out_p_arr
    with nogil:
        first = values[0]
        prev = first
        acc_p = probs[0]
        for i in range(1, n):
            v = values[i]
            if v - prev <= rtol * _scale(v):
                acc_p += probs[i]
            else:
                if acc_p > 0.0:
                    out_v[k] = first
                    out_p[k] = acc_p
                    k += 1
                first = v
                acc_p = probs[i]
            prev = v
        if acc_p > 0.0:
            out_v[k] = first
            out_p[k] = acc_p
            k += 1
    return out_v_arr[:k].copy(), out_p_arr[:k].copy()


def convolve_sorted(const double[::1] va, const double[::1] pa,
                    const double[::1] vb, const double[::1] pb, double rtol):
    """k-way merge of the shifted lists ``va + vb[j]``; both inputs ascending."""
    cdef Py_ssize_t m = va.shape[0], kb = vb.shape[0]
    cdef Py_ssize_t total = m * kb
    out_v_arr = np.empty(total, dtype=np.float64)
    out_p_arr = np.empty(total, dtype=np.float64)
    cdef double[::1] out_v = out_v_arr
    cdef double[::1] out_p = out_p_arr
    heads_arr = np.zeros(kb, dtype=np.intp)
    cdef Py_ssize_t[::1] heads = heads_arr
    cdef Py_ssize_t step, j, best, k = 0
    cdef double bestv, cand, v, p, acc_p = 0.0, first = 0.0, prev = 0.0
    cdef bint started = False
    if total == 0:
        return out_v_arr, out_p_arr
    with nogil:
        for step in range(total):
            best = -1
            bestv = 0.0
            for j in range(kb):
                if heads[j] < m:
                    cand = va[heads[j]] + vb[j]
                    if best < 0 or cand < bestv:
                        best = j
                        bestv = cand
            v = bestv
            p = pa[heads[best]] * pb[best]
            heads[best] += 1
            if started and v - prev <= rtol * _scale(v):
                acc_p += p
            else:
                if started and acc_p > 0.0:
                    out_v[k] = first
                    out_p[k] = acc_p
                    k += 1
                acc_p = p
                first = v
                started = True
            prev = v
        if acc_p > 0.0:
            out_v[k] = first
            out_p[k] = acc_p
            k += 1
    return out_v_arr[:k].copy(), out_p_arr[:k].copy()


cdef double _project_out(double complex[:, ::1] q, Py_ssize_t[::1] kept, Py_ssize_t nkept,
                         double complex[::1] v, Py_ssize_t dim) nogil:
    cdef Py_ssize_t a, i, r
    cdef double complex c
    cdef double s = 0.0
    for a in range(nkept):
        r = kept[a]
        c = 0.0
        for i in range(dim):
            c = c + q[r, i].conjugate() * v[i]
        for i in range(dim):
            v[i] = v[i] - c * q[r, i]
    for i in range(dim):
        s += v[i].real * v[i].real + v[i].imag * v[i].imag
    return sqrt(s)


def gram_schmidt(const double complex[:, ::1] vectors, double tol):
    """Modified Gram-Schmidt over rows with one reorthogonalisation pass.

    Rows whose residual norm falls below ``tol`` become zero rows.
    Returns ``(q, keep)``.
    """
    cdef Py_ssize_t nvec = vectors.shape[0], dim = vectors.shape[1]
    q_arr = np.zeros((nvec, dim), dtype=np.complex128)
    keep_arr = np.zeros(nvec, dtype=bool)
    cdef double complex[:, ::1] q = q_arr
    kept_arr = np.zeros(nvec, dtype=np.intp)
    cdef Py_ssize_t[::1] kept = kept_arr
    v_arr = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] v = v_arr
    cdef Py_ssize_t r, i, nkept = 0
    cdef double nrm
    for r in range(nvec):
        with nogil:
            for i in range(dim):
                v[i] = vectors[r, i]
            _project_out(q, kept, nkept, v, dim)
            nrm = _project_out(q, kept, nkept, v, dim)
            if nrm >= tol:
                for i in range(dim):
                    q[r, i] = v[i] / nrm
                kept[nkept] = r
                nkept += 1
        if nrm >= tol:
            keep_arr[r] = True
    return q_arr, keep_arr
