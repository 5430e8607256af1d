"""LMI and PSD-lift descriptions of conv SO(n), conv O(n) and their polars."""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numpy as np

from .clifford import _check_n, a_family, matrix_to_csv, pencil
from .geometry import BodyKind
from .linalg import eigh_descending


@dataclass(frozen=True)
class LMIBlock:
    """constant - sum_ij coeff[i, j] * X_ij >= 0 (PSD)."""

    constant: np.ndarray  # (m, m)
    coeff: np.ndarray  # (n, n, m, m)

    @property
    def size(self):
        return self.constant.shape[0]

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return self.constant - np.tensordot(x, self.coeff, axes=([-2, -1], [0, 1]))

    def to_csv(self, x=None):
        return matrix_to_csv(self.constant if x is None else self.evaluate(x))


@dataclass(frozen=True)
class LinearMatrixInequality:
    n: int
    body: BodyKind
    blocks: tuple
    # affine restrictions <E, X> = rhs
    equalities: tuple = field(default_factory=tuple)

    @property
    def sizes(self):
        return tuple(b.size for b in self.blocks)

    @property
    def total_size(self):
        return sum(self.sizes)


@dataclass(frozen=True)
class LMIEvaluation:
    blocks: list
    block_slacks: np.ndarray
    equality_residual: float
    slack: float

    def feasible(self, tol=1e-9):
        return self.slack >= -tol


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def _block(constant, coeff):
    return LMIBlock(_frozen(constant), _frozen(coeff))


def _r_signs(n):
    r = np.ones(n)
    r[-1] = -1.0
    return r


def _pencil_coeff(n, reflect=False, scale=1.0):
    dense = a_family(n)[2] * scale
    if reflect:
        # [RX]_ij = r_i X_ij
        dense = dense * _r_signs(n)[:, None, None, None]
    return dense


def _opnorm_block(n):
    """[[0, X], [X^T, 0]] <= I_2n."""
    coeff = np.zeros((n, n, 2 * n, 2 * n))
    for i in range(n):
        for j in range(n):
            coeff[i, j, i, n + j] = 1.0
            coeff[i, j, n + j, i] = 1.0
    return _block(np.eye(2 * n), coeff)


def son_polar_rep(n) -> LinearMatrixInequality:
    n = _check_n(n)
    half = 1 << (n - 1)
    return LinearMatrixInequality(n, BodyKind.SON_POLAR,
                                  (_block(np.eye(half), _pencil_coeff(n)),))


def son_minus_polar_rep(n) -> LinearMatrixInequality:
    n = _check_n(n)
    half = 1 << (n - 1)
    return LinearMatrixInequality(n, BodyKind.SON_MINUS_POLAR,
                                  (_block(np.eye(half), _pencil_coeff(n, reflect=True)),))


def on_polar_rep(n) -> LinearMatrixInequality:
    n = _check_n(n)
    half = 1 << (n - 1)
    return LinearMatrixInequality(n, BodyKind.ON_POLAR, (
        _block(np.eye(half), _pencil_coeff(n)),
        _block(np.eye(half), _pencil_coeff(n, reflect=True)),
    ))


def conv_on_rep(n) -> LinearMatrixInequality:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return LinearMatrixInequality(int(n), BodyKind.CONV_ON, (_opnorm_block(int(n)),))


def _conv_so2():
    # [[1 + c, s], [s, 1 - c]] >= 0 with c = (X11 + X22)/2, s = (X21 - X12)/2
    zdiag = np.diag([1.0, -1.0])
    xflip = np.array([[0.0, 1.0], [1.0, 0.0]])
    coeff = np.zeros((2, 2, 2, 2))
    coeff[0, 0] = coeff[1, 1] = -0.5 * zdiag
    coeff[1, 0] = -0.5 * xflip
    coeff[0, 1] = 0.5 * xflip
    eqs = (
        (_frozen([[1.0, 0.0], [0.0, -1.0]]), 0.0),
        (_frozen([[0.0, 1.0], [1.0, 0.0]]), 0.0),
    )
    return LinearMatrixInequality(2, BodyKind.CONV_SON, (_block(np.eye(2), coeff),), eqs)


def conv_son_rep(n) -> LinearMatrixInequality:
    n = _check_n(n)
    if n == 2:
        return _conv_so2()
    half = 1 << (n - 1)
    pencil_block = _block((n - 2) * np.eye(half), _pencil_coeff(n, reflect=True))
    if n == 3:
        return LinearMatrixInequality(3, BodyKind.CONV_SON, (pencil_block,))
    return LinearMatrixInequality(n, BodyKind.CONV_SON, (_opnorm_block(n), pencil_block))


def representation(body, n) -> LinearMatrixInequality:
    body = BodyKind.parse(body)
    return {
        BodyKind.CONV_SON: conv_son_rep,
        BodyKind.SON_POLAR: son_polar_rep,
        BodyKind.CONV_ON: conv_on_rep,
        BodyKind.ON_POLAR: on_polar_rep,
        BodyKind.SON_MINUS_POLAR: son_minus_polar_rep,
    }[body](n)


def evaluate_lmi(lmi: LinearMatrixInequality, x) -> LMIEvaluation:
    """Block matrices at X and the worst slack.

    The slack is the smallest block eigenvalue; each equality counts as a
    pair of inequalities with slack -|residual|.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (lmi.n, lmi.n):
        raise ValueError(f"variable has shape {x.shape}, expected {(lmi.n, lmi.n)}")
    mats = [b.evaluate(x) for b in lmi.blocks]
    slacks = np.array([eigh_descending(m).eigenvalues[-1] for m in mats])
    resid = max((abs(float(np.sum(e * x)) - r) for e, r in lmi.equalities), default=0.0)
    slack = float(np.min(slacks))
    if lmi.equalities:
        slack = min(slack, -resid)
    return LMIEvaluation(mats, slacks, resid, slack)


def lmi_slack(lmi: LinearMatrixInequality, xs):
    """Vectorized evaluate_lmi(...).slack over a stack of shape (..., n, n)."""
    xs = np.asarray(xs, dtype=float)
    worst = None
    for b in lmi.blocks:
        s = np.linalg.eigvalsh(b.evaluate(xs))[..., 0]
        worst = s if worst is None else np.minimum(worst, s)
    for e, r in lmi.equalities:
        worst = np.minimum(worst, -np.abs(np.sum(xs * e, axis=(-2, -1)) - r))
    return worst


# -- PSD lifts ---------------------------------------------------------------

@dataclass(frozen=True)
class ConvSOnLift:
    """conv SO(n) = {[<A_ij, Z>]_ij : Z PSD of size 2^(n-1), tr Z = 1}."""

    n: int

    @property
    def cone_size(self):
        return 1 << (self.n - 1)

    def output(self, z):
        z = np.asarray(z, dtype=float)
        dense = a_family(self.n)[2]
        return np.tensordot(dense, z, axes=([-2, -1], [-2, -1]))

    def feasible(self, z, tol=1e-9):
        z = np.asarray(z, dtype=float)
        return (abs(np.trace(z) - 1.0) <= tol
                and eigh_descending(z).eigenvalues[-1] >= -tol)

    def support(self, c):
        """Optimal value of max <C, output(Z)> over the lift: lambda_max."""
        return eigh_descending(pencil(c, self.n)).top

    def optimal_z(self, c):
        v = eigh_descending(pencil(c, self.n)).top_vector
        return np.outer(v, v)


def psd_lift_conv_son(n) -> ConvSOnLift:
    return ConvSOnLift(_check_n(n))


@dataclass(frozen=True)
class NuclearLift:
    """O(n) polar = {Z : [[X, Z], [Z^T, Y]] PSD, tr X + tr Y = 2}; size 2n."""

    n: int

    @property
    def cone_size(self):
        return 2 * self.n

    def block(self, x, y, z):
        return np.block([[x, z], [np.transpose(z), y]])

    def feasible(self, x, y, z, tol=1e-9):
        m = self.block(x, y, z)
        return (abs(np.trace(x) + np.trace(y) - 2.0) <= tol
                and eigh_descending(m).eigenvalues[-1] >= -tol)

    def certificate(self, z):
        """(X, Y) witnessing Z whenever the nuclear norm of Z is at most 1."""
        z = np.asarray(z, dtype=float)
        u, s, vt = np.linalg.svd(z)
        spare = (1.0 - s.sum()) / self.n
        if spare < 0:
            return None
        x = (u * s) @ u.T + spare * np.eye(self.n)
        y = (vt.T * s) @ vt + spare * np.eye(self.n)
        return x, y


def nuclear_lift(n) -> NuclearLift:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return NuclearLift(int(n))


# -- SDPA export -------------------------------------------------------------

def _fmt(v):
    v = float(v)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def sdpa_text(lmi: LinearMatrixInequality, objective) -> str:
    """SDPA sparse text for: minimize <objective, X> subject to the LMI.

    SDPA's primal reads min c.x s.t. sum_i x_i F_i - F_0 >= 0, so with
    variable i = (i-1)n + j holding X_ij we emit F_0 = -constant and
    F_i = -coeff[i, j], and c = objective as given. Maximizing <C, X> is
    the export of -C. Equality restrictions become a diagonal block holding
    <E, X> <= r and -<E, X> <= -r.
    """
    n = lmi.n
    obj = np.asarray(objective, dtype=float)
    if obj.shape != (n, n):
        raise ValueError(f"objective has shape {obj.shape}, expected {(n, n)}")
    blocks = [(b.constant, b.coeff) for b in lmi.blocks]
    if lmi.equalities:
        k = 2 * len(lmi.equalities)
        const = np.zeros(k)
        coeff = np.zeros((n, n, k))
        for t, (e, r) in enumerate(lmi.equalities):
            const[2 * t], const[2 * t + 1] = r, -r
            coeff[:, :, 2 * t] = e
            coeff[:, :, 2 * t + 1] = -e
        blocks.append((const, coeff))
    sizes = []
    for const, _ in blocks:
        sizes.append(str(const.shape[0]) if const.ndim == 2 else str(-const.shape[0]))
    out = io.StringIO()
    out.write(f"{n * n}\n{len(blocks)}\n{' '.join(sizes)}\n")
    out.write(" ".join(_fmt(v) for v in obj.reshape(-1)) + "\n")
    for bnum, (const, coeff) in enumerate(blocks, start=1):
        diag = const.ndim == 1
        mats = [(0, -const)] + [(i * n + j + 1, -coeff[i, j])
                               for i in range(n) for j in range(n)]
        for var, mat in mats:
            if diag:
                for r in np.flatnonzero(mat):
                    out.write(f"{var} {bnum} {r + 1} {r + 1} {_fmt(mat[r])}\n")
                continue
            rows, cols = np.nonzero(np.triu(mat))
            for r, c in zip(rows, cols):
                out.write(f"{var} {bnum} {r + 1} {c + 1} {_fmt(mat[r, c])}\n")
    return out.getvalue()


def export_sdpa(lmi: LinearMatrixInequality, objective, path):
    text = sdpa_text(lmi, objective)
    try:
        with open(os.fspath(path), "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write SDPA file {path}: {exc}") from exc
    return path


def lmi_to_csv(lmi: LinearMatrixInequality, x=None):
    """All blocks (constant, or evaluated at X) as CSV sections."""
    parts = []
    for k, b in enumerate(lmi.blocks, start=1):
        parts.append(f"# block {k} size {b.size}\n" + b.to_csv(x))
    return "".join(parts)
