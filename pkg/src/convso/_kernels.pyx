# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: Clifford blade products and cyclic Jacobi sweeps.

The pure-Python twin lives in ``_kernels_py``; both expose the same
functions with the same signatures and are selected in ``kernels``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int _popcount(unsigned long long v) nogil:
    return __builtin_popcountll(v)


cdef inline double _blade_sign(unsigned long long a, unsigned long long b,
                               int n) nogil:
    # generator i sits at bit n - i, so larger generator index = lower bit
    cdef int swaps = _popcount(a & b)
    b >>= 1
    while b:
        swaps += _popcount(a & b)
        b >>= 1
    return -1.0 if (swaps & 1) else 1.0


def blade_sign_table(int n):
    """Return (sign, rank) tables with e_a e_b = sign[a, b] * e_{rank[a, b]}."""
    cdef Py_ssize_t dim = 1 << n
    cdef cnp.ndarray[cnp.float64_t, ndim=2] sign = np.empty((dim, dim))
    cdef cnp.ndarray[cnp.int64_t, ndim=2] rank = np.empty((dim, dim), dtype=np.int64)
    cdef Py_ssize_t a, b
    for a in range(dim):
        for b in range(dim):
            sign[a, b] = _blade_sign(a, b, n)
            rank[a, b] = a ^ b
    return sign, rank


_SIGNS = {}


def blade_product(double[::1] x, double[::1] y, int n):
    """Product of two full Cl(n) coordinate vectors (length 2**n)."""
    cdef Py_ssize_t dim = 1 << n
    if x.shape[0] != dim or y.shape[0] != dim:
        raise ValueError("coordinate vectors must have length 2**n")
    if n not in _SIGNS:
        _SIGNS[n] = np.ascontiguousarray(blade_sign_table(n)[0])
    cdef double[:, ::1] sign = _SIGNS[n]
    out = np.zeros(dim)
    cdef double[::1] o = out
    cdef Py_ssize_t a, b
    cdef double xa
    with nogil:
        for a in range(dim):
            xa = x[a]
            if xa == 0.0:
                continue
            for b in range(dim):
                o[a ^ b] += sign[a, b] * xa * y[b]
    return out


def jacobi_eigh(double[:, ::1] m, double tol=1e-15, int max_sweeps=100):
    """Cyclic-by-row Jacobi eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors, sweeps) with eigenvalues unsorted
    (diagonal order) and eigenvectors as columns.
    """
    cdef Py_ssize_t size = m.shape[0]
    if m.shape[1] != size:
        raise ValueError("matrix must be square")
    a_arr = np.array(m, dtype=np.float64, order="C")
    v_arr = np.eye(size)
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, k
    cdef int sweep = 0
    cdef double off, total, apq, theta, t, c, s, tau, akp, akq, vkp, vkq
    cdef double app, aqq
    with nogil:
        while sweep < max_sweeps:
            off = 0.0
            total = 0.0
            for p in range(size):
                for q in range(size):
                    total += a[p, q] * a[p, q]
                    if p != q:
                        off += a[p, q] * a[p, q]
            if off <= tol * tol * total or off == 0.0:
                break
            for p in range(size - 1):
                for q in range(p + 1, size):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    app = a[p, p]
                    aqq = a[q, q]
                    theta = (aqq - app) / (2.0 * apq)
                    if theta >= 0:
                        t = 1.0 / (theta + sqrt(1.0 + theta * theta))
                    else:
                        t = -1.0 / (-theta + sqrt(1.0 + theta * theta))
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    tau = s / (1.0 + c)
                    a[p, p] = app - t * apq
                    a[q, q] = aqq + t * apq
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for k in range(size):
                        if k != p and k != q:
                            akp = a[k, p]
                            akq = a[k, q]
                            a[k, p] = akp - s * (akq + tau * akp)
                            a[k, q] = akq + s * (akp - tau * akq)
                            a[p, k] = a[k, p]
                            a[q, k] = a[k, q]
                    for k in range(size):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = vkp - s * (vkq + tau * vkp)
                        v[k, q] = vkq + s * (vkp - tau * vkq)
            sweep += 1
    return np.diag(a_arr).copy(), v_arr, sweep
