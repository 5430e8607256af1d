"""Special SVD, membership oracles by diagonal reduction, support functions."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import polytopes
from .clifford import check_rotation, pencil, quad_map
from .linalg import eigh_descending
from .polytopes import BOUNDARY_TOL, classify

JITTER_GAP = 1e-10
JITTER_EPS = 1e-8


class BodyKind(enum.Enum):
    CONV_SON = "conv-son"
    SON_POLAR = "son-polar"
    CONV_ON = "conv-on"
    ON_POLAR = "on-polar"
    SON_MINUS_POLAR = "son-minus-polar"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).lower().replace("_", "-"))
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown body {text!r}; expected one of {names}") from None


@dataclass(frozen=True)
class SpecialSVD:
    u: np.ndarray
    sigma_tilde: np.ndarray
    v: np.ndarray

    def reconstruct(self):
        return (self.u * self.sigma_tilde[..., None, :]) @ np.swapaxes(self.v, -1, -2)


@dataclass(frozen=True)
class MembershipReport:
    body: BodyKind
    verdict: str
    slack: float
    witness: object = None

    @property
    def contains(self):
        return self.verdict != "outside"


@dataclass(frozen=True)
class SupportResult:
    value: float
    maximizer: np.ndarray
    eigengap: float
    jittered: bool = False


def _square(x):
    x = np.asarray(x, dtype=float)
    if x.ndim < 2 or x.shape[-1] != x.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {x.shape}")
    return x


def special_svd(x) -> SpecialSVD:
    """X = U diag(sigma_tilde) V^T with det(U) det(V) = 1, for one X or a stack."""
    x = _square(x)
    if not np.all(np.isfinite(x)):
        raise ValueError("matrix has non-finite entries")
    u, s, vt = np.linalg.svd(x)
    flip = np.linalg.det(u) * np.linalg.det(vt) < 0
    u = u.copy()
    s = s.copy()
    u[..., :, -1] *= np.where(flip, -1.0, 1.0)[..., None]
    s[..., -1] *= np.where(flip, -1.0, 1.0)
    return SpecialSVD(u, s, np.swapaxes(vt, -1, -2))


def parity_slack(z):
    """Worst slack of PP_n at the rows of z (vectorized over leading axes)."""
    z = np.asarray(z, dtype=float)
    return np.min(_parity_slacks(z), axis=-1)


def _parity_slacks(z):
    return polytopes.parity_polytope(z.shape[-1]).slacks(z)


def conv_son_slack(x):
    """PP_n slack of sigma_tilde(X); negative means X is outside conv SO(n)."""
    return parity_slack(special_svd(x).sigma_tilde)


def member_conv_son(x, tol=BOUNDARY_TOL) -> MembershipReport:
    x = _square(x)
    if x.ndim != 2:
        raise ValueError("member_conv_son takes a single matrix")
    p = polytopes.parity_polytope(x.shape[0])
    m = polytopes.member(p, special_svd(x).sigma_tilde, tol)
    return MembershipReport(BodyKind.CONV_SON, m.verdict, m.slack,
                            (m.tag, p.rows[m.row], p.offsets[m.row]))


def member_conv_on(x, tol=BOUNDARY_TOL) -> MembershipReport:
    x = _square(x)
    slack = 1.0 - float(np.linalg.norm(x, 2))
    return MembershipReport(BodyKind.CONV_ON, classify(slack, tol), slack)


def _reflect_rows(y):
    y = np.array(y, dtype=float)
    y[..., -1, :] *= -1.0
    return y


def polar_slack(kind, y):
    """1 - lambda_max of the relevant pencil(s); vectorized over leading axes."""
    kind = BodyKind.parse(kind)
    y = _square(y)
    if kind is BodyKind.SON_POLAR:
        return 1.0 - np.linalg.eigvalsh(pencil(y))[..., -1]
    if kind is BodyKind.SON_MINUS_POLAR:
        return 1.0 - np.linalg.eigvalsh(pencil(_reflect_rows(y)))[..., -1]
    if kind is BodyKind.ON_POLAR:
        return np.minimum(polar_slack(BodyKind.SON_POLAR, y),
                          polar_slack(BodyKind.SON_MINUS_POLAR, y))
    raise ValueError(f"{kind.value} is not a polar body")


def member_polar(kind, y, tol=BOUNDARY_TOL) -> MembershipReport:
    kind = BodyKind.parse(kind)
    y = _square(y)
    candidates = []
    if kind in (BodyKind.SON_POLAR, BodyKind.ON_POLAR):
        candidates.append(y)
    if kind in (BodyKind.SON_MINUS_POLAR, BodyKind.ON_POLAR):
        candidates.append(_reflect_rows(y))
    if not candidates:
        raise ValueError(f"{kind.value} is not a polar body")
    worst = None
    for c in candidates:
        res = eigh_descending(pencil(c))
        slack = 1.0 - res.top
        if worst is None or slack < worst[0]:
            worst = (slack, res.top_vector)
    slack, witness = worst
    return MembershipReport(kind, classify(slack, tol), float(slack), witness)


def support_conv_son(c, seed=0) -> SupportResult:
    """max <C, X> over SO(n) as lambda_max(sum C_ij A_ij), with a rotation maximizer.

    When the top eigenvalue is (numerically) repeated, an arbitrary vector of
    the top eigenspace need not map to a rotation, so the maximizer is taken
    from a seeded perturbation of C instead.
    """
    c = _square(c)
    res = eigh_descending(pencil(c))
    value = res.top
    if res.gap >= JITTER_GAP:
        return SupportResult(value, quad_map(res.top_vector), res.gap)
    rng = np.random.default_rng(seed)
    jitter = JITTER_EPS * max(1.0, np.abs(c).max()) * rng.standard_normal(c.shape)
    alt = eigh_descending(pencil(c + jitter))
    x = quad_map(alt.top_vector)
    if np.sum(c * x) < value - 1e-6:
        raise RuntimeError("perturbed maximizer failed its certificate")
    return SupportResult(value, x, res.gap, jittered=True)


def support_conv_son_value(c):
    """lambda_max(sum C_ij A_ij) for one C or a stack."""
    return np.linalg.eigvalsh(pencil(_square(c)))[..., -1]


def support_conv_on(c):
    """Support of the operator-norm ball: the nuclear norm."""
    return np.sum(np.linalg.svd(_square(c), compute_uv=False), axis=-1)


def support_on_polar(c):
    """Support of O(n) polar (nuclear-norm ball): the operator norm."""
    return np.linalg.svd(_square(c), compute_uv=False)[..., 0]


def parity_gauge(z):
    """Gauge of PP_n (n >= 3): max_k <a_k, z> / b_k."""
    z = np.asarray(z, dtype=float)
    p = polytopes.parity_polytope(z.shape[-1])
    return np.max((z @ p.rows.T) / p.offsets, axis=-1)


def gauge_conv_son(x, tol=1e-12):
    """Gauge of conv SO(n), i.e. the support function of SO(n) polar."""
    st = special_svd(x).sigma_tilde
    if st.shape[-1] == 2:
        off_plane = np.abs(st[..., 0] - st[..., 1]) > tol * np.maximum(1.0, st[..., 0])
        return np.where(off_plane, np.inf, st[..., 0])
    return parity_gauge(st)


def horn_check(x, tol=1e-9):
    """Slack of diag(X) in PP_n; nonnegative for every rotation X."""
    x = check_rotation(x, max(tol, 1e-9) * 1e3)
    return float(parity_slack(np.diag(x)))


def diag_sign_rotation(v):
    """diag*(v) for a sign vector with an even number of -1 entries."""
    v = np.asarray(v, dtype=float)
    d = np.diag(v)
    check_rotation(d, 1e-12)
    return d
