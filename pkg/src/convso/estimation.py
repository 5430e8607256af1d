"""Attitude estimation: Wahba's problem and joint attitude/spin-rate search.

Concentrations may be ``math.inf`` to mark noiseless data. In a Wahba solve
infinite-kappa observations get unit weight and finite ones are dropped,
which is the kappa -> inf limit of the normalized likelihood.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .clifford import pencil, quad_map
from .linalg import eigh_descending

AMBIGUOUS_GAP = 1e-10
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DirectionObservation:
    x: np.ndarray
    y: np.ndarray
    kappa: float = 1.0
    k: int = 0  # sample index

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be vectors of equal length")
        if abs(np.linalg.norm(x) - 1) > 1e-10 or abs(np.linalg.norm(y) - 1) > 1e-10:
            raise ValueError("directions must be unit vectors")
        if not self.kappa >= 0:
            raise ValueError("kappa must be nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class SpinObservation:
    omega: float
    kappa: float = 1.0
    k: int = 0

    def __post_init__(self):
        if not 0.0 <= self.omega < TWO_PI:
            raise ValueError("omega must lie in [0, 2*pi)")
        if not self.kappa >= 0:
            raise ValueError("kappa must be nonnegative")


@dataclass(frozen=True)
class AttitudeEstimate:
    q_hat: np.ndarray
    objective: float
    eigengap: float
    omega_hat: float | None = None

    @property
    def ambiguous(self):
        return self.eigengap < AMBIGUOUS_GAP


def _weights(kappas):
    kappas = np.asarray(kappas, dtype=float)
    inf = np.isinf(kappas)
    if inf.any():
        return inf.astype(float)
    return kappas


def wahba_matrix(observations):
    """B = sum_k kappa_k y_k x_k^T."""
    if not observations:
        raise ValueError("at least one observation is required")
    xs = np.array([o.x for o in observations])
    ys = np.array([o.y for o in observations])
    w = _weights([o.kappa for o in observations])
    return np.einsum("k,ki,kj->ij", w, ys, xs)


def solve_b(b) -> AttitudeEstimate:
    """Maximize <B, Q> over SO(n) through the top eigenvector of the pencil."""
    res = eigh_descending(pencil(b))
    q = quad_map(res.top_vector)
    return AttitudeEstimate(q, float(np.sum(b * q)), res.gap)


def wahba_solve(observations) -> AttitudeEstimate:
    if not observations:
        raise ValueError("at least one observation is required")
    n = len(observations[0].x)
    if not 2 <= n <= 8:
        raise ValueError(f"dimension {n} outside [2, 8]")
    return solve_b(wahba_matrix(observations))


def spin_matrix(angle, n=3):
    """Rotation by ``angle`` in the plane of coordinates 2 and 3 (axis e_1)."""
    if n < 3:
        raise ValueError("the spin model needs n >= 3")
    s = np.eye(n)
    c, t = math.cos(angle), math.sin(angle)
    s[1, 1], s[1, 2], s[2, 1], s[2, 2] = c, -t, t, c
    return s


def geodesic_error(q1, q2):
    """Rotation angle of q1^T q2."""
    tr = np.trace(np.asarray(q1).T @ np.asarray(q2))
    n = np.asarray(q1).shape[0]
    if n == 3:
        return float(math.acos(min(1.0, max(-1.0, (tr - 1.0) / 2.0))))
    return float(np.linalg.norm(np.asarray(q1) - np.asarray(q2)))


# -- sampling ----------------------------------------------------------------

def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_vmf(mean, kappa, seed=None, size=None):
    """von Mises-Fisher samples on the unit sphere (Wood's rejection scheme)."""
    mu = np.asarray(mean, dtype=float)
    mu = mu / np.linalg.norm(mu)
    d = mu.shape[0]
    rng = _rng(seed)
    count = 1 if size is None else int(size)
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if math.isinf(kappa):
        out = np.tile(mu, (count, 1))
        return out[0] if size is None else out
    b = (d - 1.0) / (2.0 * kappa + math.sqrt(4.0 * kappa * kappa + (d - 1.0) ** 2))
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + (d - 1.0) * math.log(1.0 - x0 * x0)
    ws = np.empty(count)
    for i in range(count):
        while True:
            z = rng.beta((d - 1.0) / 2.0, (d - 1.0) / 2.0)
            w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
            if kappa * w + (d - 1.0) * math.log(1.0 - x0 * w) - c >= math.log(rng.uniform()):
                ws[i] = w
                break
    # tangent directions uniform on the sphere orthogonal to mu
    v = rng.standard_normal((count, d))
    v -= np.outer(v @ mu, mu)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    out = ws[:, None] * mu + np.sqrt(np.maximum(0.0, 1.0 - ws * ws))[:, None] * v
    out /= np.linalg.norm(out, axis=1, keepdims=True)
    return out[0] if size is None else out


def random_unit(rng, n):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def synthesize_scenario(n, T, kappa1, kappa2, q_true, omega_true=0.0, seed=None):
    """Directions at k = 0..T with y_k ~ vMF(Q(k) x_k, kappa1); spins ~ vM(omega, kappa2).

    The spin observations are indexed k = 0..T to match the objective's
    sum; ``kappa2 = None`` omits them.
    """
    q_true = np.asarray(q_true, dtype=float)
    if q_true.shape != (n, n):
        raise ValueError("q_true must be n x n")
    if omega_true and n < 3:
        raise ValueError("a nonzero spin needs n >= 3")
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(2**63))
    ss = np.random.SeedSequence(seed)
    dir_rng, noise_rng, spin_rng = (np.random.default_rng(s) for s in ss.spawn(3))
    dirs = []
    for k in range(T + 1):
        x = random_unit(dir_rng, n)
        qk = spin_matrix(k * omega_true, n) @ q_true if n >= 3 else q_true
        mean = qk @ x
        y = mean.copy() if math.isinf(kappa1) else sample_vmf(mean, kappa1, noise_rng)
        dirs.append(DirectionObservation(x, y / np.linalg.norm(y), kappa1, k))
    spins = []
    if kappa2 is not None:
        for k in range(T + 1):
            if math.isinf(kappa2):
                w = omega_true
            else:
                w = spin_rng.vonmises(omega_true, kappa2) if kappa2 > 0 else spin_rng.uniform(0, TWO_PI)
            spins.append(SpinObservation(float(w % TWO_PI), kappa2, k))
    return dirs, spins


# -- joint attitude / spin-rate search ------------------------------------------

class _JointObjective:
    def __init__(self, dir_obs, spin_obs):
        self.n = len(dir_obs[0].x) if dir_obs else 3
        if self.n != 3:
            raise ValueError("joint estimation is defined for n = 3")
        self.ks = np.array([o.k for o in dir_obs], dtype=float)
        self.xs = np.array([o.x for o in dir_obs]).reshape(-1, 3)
        self.ys = np.array([o.y for o in dir_obs]).reshape(-1, 3)
        self.w = _weights([o.kappa for o in dir_obs]) if dir_obs else np.zeros(0)
        self.omegas = np.array([o.omega for o in spin_obs])
        kap2 = np.array([o.kappa for o in spin_obs])
        self.spin_exact = bool(np.any(np.isinf(kap2)))
        self.kappa2 = _weights(kap2) if len(kap2) else kap2

    def b(self, omega):
        # <y, S(k w) Q x> = <S(k w)^T y x^T, Q>
        b = np.zeros((3, 3))
        for kk, x, y, w in zip(self.ks, self.xs, self.ys, self.w):
            b += w * np.outer(spin_matrix(kk * omega).T @ y, x)
        return b

    def spin_term(self, omega):
        if not len(self.omegas):
            return 0.0
        return float(np.sum(self.kappa2 * np.cos(self.omegas - omega)))

    def value(self, omega):
        if not len(self.ks):
            return self.spin_term(omega)
        return float(np.linalg.eigvalsh(pencil(self.b(omega)))[-1]) + self.spin_term(omega)


def _golden_max(f, lo, hi, iters):
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def joint_solve(dir_obs, spin_obs=(), grid_size=None, refine_iters=60) -> AttitudeEstimate:
    """Grid search over omega with an exact Wahba solve per grid point,
    followed by golden-section refinement around the best cell."""
    if not dir_obs and not spin_obs:
        raise ValueError("no observations")
    obj = _JointObjective(list(dir_obs), list(spin_obs))
    T = int(max([o.k for o in dir_obs] + [o.k for o in spin_obs] + [0]))
    if obj.spin_exact:
        # infinite kappa2: the spin term pins omega to the circular mean
        omega = math.atan2(np.sum(np.sin(obj.omegas)), np.sum(np.cos(obj.omegas))) % TWO_PI
    else:
        grid_size = 16 * (T + 1) if grid_size is None else int(grid_size)
        if grid_size < 3:
            raise ValueError("grid_size must be at least 3")
        grid = np.arange(grid_size) * (TWO_PI / grid_size)
        vals = np.array([obj.value(w) for w in grid])
        best = int(np.argmax(vals))
        h = TWO_PI / grid_size
        omega, _ = _golden_max(obj.value, grid[best] - h, grid[best] + h, refine_iters)
        if obj.value(omega) < vals[best]:
            omega = grid[best]
        omega %= TWO_PI
    if len(obj.ks):
        est = solve_b(obj.b(omega))
        q, gap, val = est.q_hat, est.eigengap, est.objective
    else:
        q, gap, val = np.eye(3), 0.0, 0.0
    return AttitudeEstimate(q, val + obj.spin_term(omega), gap, float(omega))


# -- CSV -------------------------------------------------------------------

def scenario_columns(n):
    return (["type", "k", "kappa", "omega"] + [f"x_{i + 1}" for i in range(n)]
            + [f"y_{i + 1}" for i in range(n)])


def _num(v):
    return repr(float(v)) if not math.isinf(v) else "inf"


def scenario_to_csv(dir_obs, spin_obs=()):
    n = len(dir_obs[0].x) if dir_obs else 3
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(scenario_columns(n))
    for o in dir_obs:
        writer.writerow(["dir", o.k, _num(o.kappa), ""] + [repr(float(v)) for v in o.x]
                        + [repr(float(v)) for v in o.y])
    for o in spin_obs:
        writer.writerow(["spin", o.k, _num(o.kappa), repr(float(o.omega))] + [""] * (2 * n))
    return buf.getvalue()


def _unit(v):
    # keep already-normalized input bit-exact
    nv = np.linalg.norm(v)
    return v if abs(nv - 1.0) <= 1e-12 else v / nv


def scenario_from_csv(text):
    """Inverse of scenario_to_csv; raises ValueError on malformed input."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty scenario file")
    header = rows[0]
    if header[:4] != ["type", "k", "kappa", "omega"] or (len(header) - 4) % 2:
        raise ValueError("unexpected scenario header")
    n = (len(header) - 4) // 2
    if header != scenario_columns(n):
        raise ValueError("unexpected scenario header")
    dirs, spins = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} fields")
        try:
            kind, k, kappa = row[0], int(row[1]), float(row[2])
            if kind == "dir":
                x = np.array([float(v) for v in row[4:4 + n]])
                y = np.array([float(v) for v in row[4 + n:]])
                dirs.append(DirectionObservation(_unit(x), _unit(y), kappa, k))
            elif kind == "spin":
                spins.append(SpinObservation(float(row[3]) % TWO_PI, kappa, k))
            else:
                raise ValueError(f"unknown row type {kind!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if not dirs and not spins:
        raise ValueError("scenario has no observations")
    return dirs, spins


def estimate_to_csv(est: AttitudeEstimate):
    n = est.q_hat.shape[0]
    cols = [f"q{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols + ["omega", "objective", "eigengap", "ambiguous"])
    omega = "" if est.omega_hat is None else repr(est.omega_hat)
    writer.writerow([repr(float(v)) for v in est.q_hat.reshape(-1)]
                    + [omega, repr(est.objective), repr(est.eigengap), int(est.ambiguous)])
    return buf.getvalue()
