"""Iterative optimizers over LMIs, used to cross-check the closed forms.

``maximize_linear_over_lmi`` runs ADMM on

    max <c, x>  s.t.  b - A x in K,

with K a product of PSD cones (one per block) and a zero cone for the
equality restrictions. ``dykstra_conv_son`` projects onto conv SO(n) by
alternating projections on the two blocks of the representation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import polytopes
from .clifford import a_family
from .geometry import special_svd
from .hull_reps import LinearMatrixInequality, evaluate_lmi
from .linalg import EigenResult, symmetric_eig  # noqa: F401  (re-exported)


@dataclass(frozen=True)
class SolveReport:
    objective: float
    x: np.ndarray  # primal point (n x n), exactly feasible up to rounding
    iterations: int
    reason: str  # "converged" | "iteration-limit" | "unbounded"
    residual: float  # worst LMI violation at x (0 when feasible)
    upper_bound: float  # dual objective b.y
    dual_residual: float  # ||A^T y - c|| for that y

    @property
    def converged(self):
        return self.reason == "converged"


class InfeasibleStartError(ValueError):
    pass


def _stack(lmi: LinearMatrixInequality):
    """The operator as a dense matrix A (rows: stacked block entries), and b."""
    n = lmi.n
    rows, rhs, cones = [], [], []
    for blk in lmi.blocks:
        m = blk.size
        rows.append(blk.coeff.reshape(n * n, m * m).T)
        rhs.append(blk.constant.reshape(-1))
        cones.append(("psd", m))
    if lmi.equalities:
        rows.append(np.array([e.reshape(-1) for e, _ in lmi.equalities]))
        rhs.append(np.array([r for _, r in lmi.equalities], dtype=float))
        cones.append(("zero", len(lmi.equalities)))
    return np.vstack(rows), np.concatenate(rhs), cones


def _project_cone(v, cones):
    out = np.empty_like(v)
    at = 0
    for kind, m in cones:
        if kind == "psd":
            seg = v[at:at + m * m].reshape(m, m)
            res = symmetric_eig(seg)
            w = np.maximum(res.eigenvalues, 0.0)
            out[at:at + m * m] = ((res.eigenvectors * w) @ res.eigenvectors.T).reshape(-1)
            at += m * m
        else:
            out[at:at + m] = 0.0
            at += m
    return out


def _project_dual_cone(v, cones):
    # PSD blocks are self-dual; the zero cone's dual is everything
    out = v.copy()
    at = 0
    for kind, m in cones:
        if kind == "psd":
            out[at:at + m * m] = _project_cone(v[at:at + m * m], [(kind, m)])
            at += m * m
        else:
            at += m
    return out


def maximize_linear_over_lmi(lmi: LinearMatrixInequality, c, tol=1e-7,
                             max_iter=20000, rho=1.0) -> SolveReport:
    """ADMM with residual balancing; the returned point is pulled back to
    exact feasibility by scaling towards the origin."""
    n = lmi.n
    c = np.asarray(c, dtype=float)
    if c.shape != (n, n):
        raise ValueError(f"objective has shape {c.shape}, expected {(n, n)}")
    start = evaluate_lmi(lmi, np.zeros((n, n)))
    s0 = float(np.min(start.block_slacks))
    if s0 < tol or start.equality_residual > tol:
        raise InfeasibleStartError("the origin must be strictly feasible")
    a, b, cones = _stack(lmi)
    cv = c.reshape(-1)
    gram = a.T @ a
    # directions with A d = 0 are free; a nonzero objective along them is unbounded
    evals, evecs = np.linalg.eigh(gram)
    null = evecs[:, evals <= 1e-12 * max(1.0, evals.max())]
    if null.size and np.linalg.norm(null.T @ cv) > 1e-12:
        return SolveReport(float("inf"), np.full((n, n), np.nan), 0, "unbounded",
                           float("nan"), float("inf"), float("nan"))
    pinv = np.linalg.pinv(gram)

    x = np.zeros(n * n)
    s = b.copy()
    u = np.zeros_like(b)
    scale = max(1.0, np.linalg.norm(b))
    reason = "iteration-limit"
    it = 0
    for it in range(1, max_iter + 1):
        x = pinv @ (a.T @ (b - s - u) + cv / rho)
        ax = a @ x
        s_prev = s
        s = _project_cone(b - ax - u, cones)
        r = ax + s - b
        u = u + r
        r_norm = np.linalg.norm(r)
        d_norm = rho * np.linalg.norm(a.T @ (s - s_prev))
        if r_norm <= tol * scale and d_norm <= tol * max(1.0, np.linalg.norm(cv)):
            reason = "converged"
            break
        if it % 50 == 0:
            if r_norm > 10 * d_norm:
                rho *= 2.0
                u /= 2.0
            elif d_norm > 10 * r_norm:
                rho /= 2.0
                u *= 2.0

    xm = x.reshape(n, n)
    ev = evaluate_lmi(lmi, xm)
    violation = max(0.0, -float(np.min(ev.block_slacks)))
    # blocks only: equality rows are linear and scale with x
    if violation > 0.0:
        xm = xm * (s0 / (s0 + violation))
        ev = evaluate_lmi(lmi, xm)
    residual = max(0.0, -ev.slack)
    y = _project_dual_cone(rho * u, cones)
    return SolveReport(float(np.sum(c * xm)), xm, it, reason, residual,
                       float(b @ y), float(np.linalg.norm(a.T @ y - cv)))


def project_conv_son(x):
    """Frobenius-nearest point of conv SO(n): SSVD, then project sigma_tilde on PP_n."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("expected a square matrix")
    svd = special_svd(x)
    p = polytopes.project_parity_polytope(x.shape[0], svd.sigma_tilde)
    return (svd.u * p) @ svd.v.T


@dataclass(frozen=True)
class DykstraResult:
    x: np.ndarray
    iterations: int
    change: float
    converged: bool


def _clip_singular(x, hi=1.0):
    u, s, vt = np.linalg.svd(x)
    return (u * np.minimum(s, hi)) @ vt


def _clip_eigen(m, hi):
    res = symmetric_eig(m)
    w = np.minimum(res.eigenvalues, hi)
    return (res.eigenvectors * w) @ res.eigenvectors.T


def dykstra_conv_son(x0, tol=1e-10, max_iter=200000) -> DykstraResult:
    """Dykstra's alternating projections onto conv SO(n), n in {3, 4}.

    Works in pairs (X, M) with M = sum_ij A_ij [RX]_ij on the graph subspace,
    intersected with {sigma_1(X) <= 1} and {M <= (n-2) I}. That map is a
    scaled isometry for n >= 3, so the product-space projection of
    (X0, M(X0)) coincides with the Frobenius projection of X0.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.shape[0]
    if n not in (3, 4):
        raise ValueError("the Dykstra cross-check is set up for n in {3, 4}")
    dense = a_family(n)[2] * np.array([1.0] * (n - 1) + [-1.0])[:, None, None, None]
    half = dense.shape[-1]
    bmat = dense.reshape(n * n, half * half).T  # vec(M) = bmat @ vec(X)

    def graph(px, pm):
        xv = (px.reshape(-1) + bmat.T @ pm.reshape(-1)) / (1.0 + half)
        return xv.reshape(n, n), (bmat @ xv).reshape(half, half)

    px, pm = x0.copy(), (bmat @ x0.reshape(-1)).reshape(half, half)
    incs = [(np.zeros_like(px), np.zeros_like(pm)) for _ in range(3)]
    change = np.inf
    for it in range(1, max_iter + 1):
        start = (px, pm)
        for k in range(3):
            ix, im = incs[k]
            qx, qm = px + ix, pm + im
            if k == 0:
                nx, nm = graph(qx, qm)
            elif k == 1:
                nx, nm = _clip_singular(qx), qm
            else:
                nx, nm = qx, _clip_eigen(qm, n - 2.0)
            incs[k] = (qx - nx, qm - nm)
            px, pm = nx, nm
        change = np.sqrt(np.sum((px - start[0]) ** 2) + np.sum((pm - start[1]) ** 2))
        if change <= tol:
            return DykstraResult(graph(px, pm)[0], it, change, True)
    return DykstraResult(graph(px, pm)[0], max_iter, change, False)
