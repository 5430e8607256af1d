"""Hypercube, parity polytopes, their polars, and small-scale facet machinery."""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass

import numpy as np

BOUNDARY_TOL = 1e-7
MAX_FAMILY_N = 20

BOX = "box"
ODD_SET = "odd-set"
EVEN_SET = "even-set"
SIGN = "sign"
EQUALITY = "equality"


@dataclass(frozen=True)
class Membership:
    verdict: str  # "inside" | "boundary" | "outside"
    slack: float
    row: int  # index of the row attaining the worst slack
    tag: str = ""

    @property
    def contains(self):
        return self.verdict != "outside"


def classify(slack, tol):
    if slack > tol:
        return "inside"
    if slack >= -tol:
        return "boundary"
    return "outside"


@dataclass(frozen=True)
class HPolytope:
    """{x : <a_k, x> <= b_k}; each row carries the family it came from."""

    n: int
    rows: np.ndarray
    offsets: np.ndarray
    tags: tuple

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float).reshape(-1, self.n)
        offsets = np.asarray(self.offsets, dtype=float).reshape(-1)
        if len(rows) != len(offsets) or len(self.tags) != len(offsets):
            raise ValueError("rows, offsets and tags must have equal length")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "offsets", offsets)

    def __len__(self):
        return len(self.offsets)

    def slacks(self, x):
        return self.offsets - np.asarray(x, dtype=float) @ self.rows.T

    def scaled(self, t):
        return HPolytope(self.n, self.rows, t * self.offsets, self.tags)

    def subset(self, keep):
        keep = list(keep)
        return HPolytope(self.n, self.rows[keep], self.offsets[keep],
                         tuple(self.tags[k] for k in keep))

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["tag"] + [f"a{i + 1}" for i in range(self.n)] + ["b"])
        for tag, a, b in zip(self.tags, self.rows, self.offsets):
            writer.writerow([tag] + [f"{v:.17g}" for v in a] + [f"{b:.17g}"])
        return buf.getvalue()


@dataclass(frozen=True)
class VPolytope:
    n: int
    vertices: np.ndarray

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(self.n)])
        for v in self.vertices:
            writer.writerow([f"{c:g}" for c in v])
        return buf.getvalue()


def _check(n, lo):
    if not isinstance(n, (int, np.integer)) or n < lo:
        raise ValueError(f"n must be an integer >= {lo}, got {n!r}")
    if n > MAX_FAMILY_N:
        raise ValueError(f"n = {n} exceeds the exponential-family guard {MAX_FAMILY_N}")
    return int(n)


def _set_rows(n, parity):
    """Rows sum_{i not in I} x_i - sum_{i in I} x_i for |I| with the given parity.

    ``parity`` is 0 (even), 1 (odd) or None (all subsets); subsets are
    enumerated in lexicographic order of their indicator vectors.
    """
    rows = []
    for bits in itertools.product((0, 1), repeat=n):
        if parity is None or sum(bits) % 2 == parity:
            rows.append([-1.0 if b else 1.0 for b in bits])
    return np.array(rows).reshape(-1, n)


def _box_rows(n):
    rows = []
    for i in range(n):
        for s in (1.0, -1.0):
            r = np.zeros(n)
            r[i] = s
            rows.append(r)
    return np.array(rows)


def hypercube(n) -> HPolytope:
    n = _check(n, 1)
    return HPolytope(n, _box_rows(n), np.ones(2 * n), (BOX,) * (2 * n))


def cross_polytope(n) -> HPolytope:
    """Polar of the hypercube: 2**n sign-vector rows."""
    n = _check(n, 1)
    rows = _set_rows(n, None)
    return HPolytope(n, rows, np.ones(len(rows)), (SIGN,) * len(rows))


def parity_polytope(n) -> HPolytope:
    """PP_n: box plus odd-set rows with offset n - 2; simplified for n = 2, 3."""
    n = _check(n, 2)
    if n == 2:
        rows = np.array([[1.0, -1.0], [-1.0, 1.0], [1.0, 0.0], [-1.0, 0.0]])
        return HPolytope(2, rows, np.array([0.0, 0.0, 1.0, 1.0]),
                         (EQUALITY, EQUALITY, BOX, BOX))
    if n == 3:
        rows = np.array([[1.0, -1.0, 1.0], [-1.0, 1.0, 1.0],
                         [1.0, 1.0, -1.0], [-1.0, -1.0, -1.0]])
        return HPolytope(3, rows, np.ones(4), (ODD_SET,) * 4)
    odd = _set_rows(n, 1)
    rows = np.vstack([_box_rows(n), odd])
    offsets = np.concatenate([np.ones(2 * n), np.full(len(odd), n - 2.0)])
    return HPolytope(n, rows, offsets, (BOX,) * (2 * n) + (ODD_SET,) * len(odd))


def parity_polytope_full(n) -> HPolytope:
    """The unsimplified box + odd-set description, valid for every n >= 2."""
    n = _check(n, 2)
    odd = _set_rows(n, 1)
    rows = np.vstack([_box_rows(n), odd])
    offsets = np.concatenate([np.ones(2 * n), np.full(len(odd), n - 2.0)])
    return HPolytope(n, rows, offsets, (BOX,) * (2 * n) + (ODD_SET,) * len(odd))


def odd_parity_polytope(n) -> HPolytope:
    """PP_n^- = R PP_n with R flipping the last coordinate."""
    p = parity_polytope(n)
    rows = p.rows.copy()
    rows[:, -1] *= -1
    flip = {ODD_SET: EVEN_SET, EVEN_SET: ODD_SET}
    return HPolytope(p.n, rows, p.offsets, tuple(flip.get(t, t) for t in p.tags))


def parity_polar(n) -> HPolytope:
    """PP_n polar: even-set rows with offset 1 (2**(n-1) facets)."""
    n = _check(n, 2)
    rows = _set_rows(n, 0)
    return HPolytope(n, rows, np.ones(len(rows)), (EVEN_SET,) * len(rows))


def odd_parity_polar(n) -> HPolytope:
    """PP_n^- polar: odd-set rows with offset 1."""
    n = _check(n, 2)
    rows = _set_rows(n, 1)
    return HPolytope(n, rows, np.ones(len(rows)), (ODD_SET,) * len(rows))


def member(p: HPolytope, x, tol=BOUNDARY_TOL) -> Membership:
    x = np.asarray(x, dtype=float)
    if x.shape != (p.n,):
        raise ValueError(f"point of shape {x.shape} for a polytope in R^{p.n}")
    slacks = p.slacks(x)
    k = int(np.argmin(slacks))
    slack = float(slacks[k])
    return Membership(classify(slack, tol), slack, k, p.tags[k])


def vertices(kind, n) -> VPolytope:
    """Sign vectors of C_n ("cube"), PP_n ("parity") or PP_n^- ("odd-parity")."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= 16:
        raise ValueError(f"n must be in [1, 16], got {n!r}")
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    negatives = np.sum(signs < 0, axis=1)
    if kind == "cube":
        keep = np.ones(len(signs), dtype=bool)
    elif kind == "parity":
        keep = negatives % 2 == 0
    elif kind == "odd-parity":
        keep = negatives % 2 == 1
    else:
        raise ValueError(f"unknown vertex family {kind!r}")
    return VPolytope(int(n), signs[keep])


class LPError(RuntimeError):
    pass


def simplex_max(c, a, b, tol=1e-9, max_pivots=10_000):
    """max c.x subject to a x <= b with x free, for b >= 0 (origin feasible).

    Dense tableau simplex with Bland's rule. Returns (value, x), with value
    ``inf`` when the problem is unbounded.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float).reshape(-1, len(c))
    b = np.asarray(b, dtype=float)
    if np.any(b < -tol):
        raise LPError("origin must be feasible (all offsets >= 0)")
    m, n = a.shape
    # columns: x+ (n), x- (n), slacks (m), rhs
    t = np.zeros((m + 1, 2 * n + m + 1))
    t[:m, :n] = a
    t[:m, n:2 * n] = -a
    t[:m, 2 * n:2 * n + m] = np.eye(m)
    t[:m, -1] = np.maximum(b, 0.0)
    t[m, :n] = -c
    t[m, n:2 * n] = c
    basis = list(range(2 * n, 2 * n + m))
    for _ in range(max_pivots):
        entering = next((j for j in range(2 * n + m) if t[m, j] < -tol), None)
        if entering is None:
            x = np.zeros(2 * n + m)
            for r, var in enumerate(basis):
                x[var] = t[r, -1]
            return float(t[m, -1]), x[:n] - x[n:2 * n]
        col = t[:m, entering]
        ratios = [(t[r, -1] / col[r], basis[r], r) for r in range(m) if col[r] > tol]
        if not ratios:
            return float("inf"), None
        best = min(q for q, _, _ in ratios)
        # Bland: among tied ratios leave with the lowest-indexed basic variable
        _, row = min((var, r) for q, var, r in ratios if q <= best + tol)
        t[row] /= t[row, entering]
        for r in range(m + 1):
            if r != row and t[r, entering] != 0.0:
                t[r] -= t[r, entering] * t[row]
        basis[row] = entering
    raise LPError("pivot limit reached")


def irredundant_rows(p: HPolytope, tol=1e-9):
    """Indices of rows kept by a sequential LP redundancy sweep."""
    active = list(range(len(p)))
    for k in range(len(p)):
        others = [r for r in active if r != k]
        if not others:
            continue
        value, _ = simplex_max(p.rows[k], p.rows[others], p.offsets[others], tol=tol)
        if value <= p.offsets[k] + tol:
            active.remove(k)
    return active


def reduce(p: HPolytope) -> HPolytope:
    return p.subset(irredundant_rows(p))


def facet_count(p: HPolytope) -> int:
    """Number of irredundant inequalities (LP-based; n <= 6)."""
    if p.n > 6:
        raise ValueError("facet_count is limited to n <= 6")
    if np.any(p.offsets < 0):
        raise LPError("degenerate polytope: origin is not feasible")
    return len(irredundant_rows(p))


def ppalt_check(n, x):
    """Whether [x in C_n and x in (n-2) PP_n^-polar] agrees with [x in PP_n].

    For n = 3 the identity PP_3 = PP_3^-polar is checked as well.
    """
    if n < 3:
        raise ValueError("the identity needs n >= 3")
    x = np.asarray(x, dtype=float)
    in_cube = bool(np.all(hypercube(n).slacks(x) >= 0))
    in_polar = bool(np.all(odd_parity_polar(n).scaled(n - 2).slacks(x) >= 0))
    in_pp = bool(np.all(parity_polytope(n).slacks(x) >= 0))
    ok = (in_cube and in_polar) == in_pp
    if n == 3:
        ok = ok and (bool(np.all(odd_parity_polar(3).slacks(x) >= 0)) == in_pp)
    return ok


def most_violated_odd_set(z):
    """Sign vector a of the odd-set row maximising <a, z>."""
    z = np.asarray(z, dtype=float)
    a = np.where(z < 0, -1.0, 1.0)
    if np.sum(a < 0) % 2 == 0:
        k = int(np.argmin(np.abs(z)))
        a[k] = -a[k]
    return a


def _clip_sum_root(w, target):
    """beta >= 0 with sum(clip(w - beta, -1, 1)) = target (g is nonincreasing)."""
    breaks = np.unique(np.concatenate([w - 1.0, w + 1.0, [0.0]]))
    breaks = breaks[breaks >= 0.0]

    def g(beta):
        return float(np.sum(np.clip(w - beta, -1.0, 1.0)))

    lo = 0.0
    g_lo = g(lo)
    for hi in breaks:
        if hi <= lo:
            continue
        g_hi = g(hi)
        if g_hi <= target:
            if g_lo == g_hi:
                return hi
            return lo + (g_lo - target) * (hi - lo) / (g_lo - g_hi)
        lo, g_lo = hi, g_hi
    raise RuntimeError("parity projection did not bracket the facet")


def project_parity_polytope(n, x):
    """Euclidean projection onto PP_n.

    Clip to the box; if the clipped point violates its sign-pattern odd-set
    row, project onto the box intersected with that row's hyperplane.
    """
    x = np.asarray(x, dtype=float)
    if n < 2 or x.shape != (n,):
        raise ValueError("expected a point of R^n with n >= 2")
    z = np.clip(x, -1.0, 1.0)
    a = most_violated_odd_set(z)
    if a @ z <= n - 2:
        return z
    w = a * x
    beta = _clip_sum_root(w, n - 2.0)
    return a * np.clip(w - beta, -1.0, 1.0)
