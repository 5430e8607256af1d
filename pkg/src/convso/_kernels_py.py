"""Pure-Python/numpy implementations of the compiled kernels.

Same names, signatures and return conventions as ``_kernels.pyx``.
"""
import numpy as np


def _popcount(v):
    v = np.asarray(v, dtype=np.int64)
    count = np.zeros_like(v)
    while np.any(v):
        count += v & 1
        v = v >> 1
    return count


def blade_sign_table(n):
    """Return (sign, rank) tables with e_a e_b = sign[a, b] * e_{rank[a, b]}."""
    dim = 1 << n
    a = np.arange(dim, dtype=np.int64)[:, None]
    b = np.arange(dim, dtype=np.int64)[None, :]
    swaps = np.zeros((dim, dim), dtype=np.int64)
    for p in range(n):
        swaps += ((a >> p) & 1) * _popcount(b >> (p + 1))
    swaps += _popcount(a & b)
    sign = np.where(swaps & 1, -1.0, 1.0)
    return sign, a ^ b


_TABLES = {}


def blade_product(x, y, n):
    """Product of two full Cl(n) coordinate vectors (length 2**n)."""
    dim = 1 << n
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (dim,) or y.shape != (dim,):
        raise ValueError("coordinate vectors must have length 2**n")
    if n not in _TABLES:
        _TABLES[n] = blade_sign_table(n)
    sign, rank = _TABLES[n]
    ia = np.flatnonzero(x)
    ib = np.flatnonzero(y)
    out = np.zeros(dim)
    if ia.size and ib.size:
        terms = sign[np.ix_(ia, ib)] * np.outer(x[ia], y[ib])
        np.add.at(out, rank[np.ix_(ia, ib)].ravel(), terms.ravel())
    return out


def jacobi_eigh(m, tol=1e-15, max_sweeps=100):
    """Cyclic-by-row Jacobi eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors, sweeps) with eigenvalues unsorted
    (diagonal order) and eigenvectors as columns.
    """
    a = np.array(m, dtype=float)
    size = a.shape[0]
    if a.ndim != 2 or a.shape[1] != size:
        raise ValueError("matrix must be square")
    v = np.eye(size)
    sweep = 0
    while sweep < max_sweeps:
        total = np.sum(a * a)
        off = np.sum(np.square(a - np.diag(np.diag(a))))
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
                    t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                tau = s / (1.0 + c)
                colp = a[:, p].copy()
                colq = a[:, q].copy()
                newp = colp - s * (colq + tau * colp)
                newq = colq + s * (colp - tau * colq)
                a[:, p] = newp
                a[:, q] = newq
                a[p, :] = newp
                a[q, :] = newq
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = vp - s * (vq + tau * vp)
                v[:, q] = vq + s * (vp - tau * vq)
        sweep += 1
    return np.diag(a).copy(), v, sweep
