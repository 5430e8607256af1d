"""Clifford algebra Cl(n), its even subalgebra, and the quadratic map onto SO(n).

Basis convention: the blade e_I (I a subset of {1..n}) has rank
``sum(2**(n - i) for i in I)``, so generator 1 is the most significant bit.
This matches the Kronecker factor order of the left/right multiplication
matrices. The even subalgebra Cl^0(n) is indexed by ``even_ranks(n)``: column
c of the selection matrix picks the unique even-cardinality rank whose low
n - 1 bits equal c, i.e. the block form (1/2)[I + Z; I - Z] with
Z = diag(1, -1)^{(x)(n-1)}.
"""
from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import kernels

MAX_N = 12

_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_J = np.array([[0.0, -1.0], [1.0, 0.0]])
_I2 = np.eye(2)


class DimensionError(ValueError):
    """Raised when a dimension or generator index is out of range."""


class NotARotationError(ValueError):
    """Raised when a matrix handed to a Spin lift is not in SO(n)."""


def _check_n(n, lo=2, hi=MAX_N):
    if not isinstance(n, (int, np.integer)) or not lo <= n <= hi:
        raise DimensionError(f"n must be an integer in [{lo}, {hi}], got {n!r}")
    return int(n)


def _kron(factors):
    return reduce(np.kron, factors, np.eye(1))


def popcount(v):
    return bin(int(v)).count("1")


def subset_rank(n, subset):
    """Rank of the blade e_I for a subset of {1..n} (1-based generators)."""
    rank = 0
    for i in set(subset):
        if not 1 <= i <= n:
            raise DimensionError(f"generator index {i} outside 1..{n}")
        rank |= 1 << (n - i)
    return rank


def rank_subset(n, rank):
    """Inverse of :func:`subset_rank`; returns the sorted subset."""
    return tuple(i for i in range(1, n + 1) if rank >> (n - i) & 1)


def even_ranks(n):
    """Ranks of the even basis blades, in Cl^0(n) coordinate order."""
    half = 1 << (n - 1)
    return np.array([c if popcount(c) % 2 == 0 else half + c
                     for c in range(half)], dtype=np.int64)


def even_index(n):
    """Map rank -> position in the Cl^0(n) coordinate vector (-1 if odd)."""
    index = -np.ones(1 << n, dtype=np.int64)
    index[even_ranks(n)] = np.arange(1 << (n - 1))
    return index


@dataclass(frozen=True)
class GeneratorMatrices:
    """Left/right multiplication by the generators, and the even selector."""

    n: int
    lam: np.ndarray  # (n, 2**n, 2**n)
    rho: np.ndarray  # (n, 2**n, 2**n)
    p_even: np.ndarray  # (2**n, 2**(n-1))

    def lambda_(self, i):
        return self.lam[i - 1]

    def rho_(self, i):
        return self.rho[i - 1]


_CACHE_LOCK = threading.Lock()
_GENERATORS: dict[int, GeneratorMatrices] = {}
_FAMILIES: dict[int, tuple] = {}


def generator_matrices(n) -> GeneratorMatrices:
    """Build lambda_i, rho_i (2**n x 2**n) and P_even (2**n x 2**(n-1))."""
    n = _check_n(n)
    with _CACHE_LOCK:
        if n in _GENERATORS:
            return _GENERATORS[n]
        lam = np.stack([_kron([_SIGMA_Z] * (i - 1) + [_J] + [_I2] * (n - i))
                        for i in range(1, n + 1)])
        rho = np.stack([_kron([_I2] * (i - 1) + [_J] + [_SIGMA_Z] * (n - i))
                        for i in range(1, n + 1)])
        p_even = np.zeros((1 << n, 1 << (n - 1)))
        p_even[even_ranks(n), np.arange(1 << (n - 1))] = 1.0
        for arr in (lam, rho, p_even):
            arr.flags.writeable = False
        gens = GeneratorMatrices(n, lam, rho, p_even)
        _GENERATORS[n] = gens
        return gens


def p_even_block_form(n):
    """(1/2)[I + Z; I - Z] with Z the (n-1)-fold Kronecker power of sigma_z."""
    z = _kron([_SIGMA_Z] * (n - 1))
    eye = np.eye(1 << (n - 1))
    return 0.5 * np.vstack([eye + z, eye - z])


@dataclass(frozen=True)
class SignedSymmetricMatrix:
    """Symmetric signed permutation: entry (r, perm[r]) equals signs[r]."""

    perm: np.ndarray
    signs: np.ndarray

    @property
    def dim(self):
        return len(self.perm)

    def dense(self):
        out = np.zeros((self.dim, self.dim))
        out[np.arange(self.dim), self.perm] = self.signs
        return out

    def apply(self, x):
        return self.signs * np.asarray(x)[..., self.perm]

    def quadratic_form(self, x):
        x = np.asarray(x)
        return np.sum(x * self.apply(x), axis=-1)

    @classmethod
    def from_dense(cls, m):
        m = np.asarray(m)
        rows, cols = np.nonzero(m)
        if len(rows) != m.shape[0] or not np.array_equal(rows, np.arange(m.shape[0])):
            raise ValueError("not a signed permutation matrix")
        signs = m[rows, cols]
        if not np.all(np.isin(signs, (-1, 1))) or not np.array_equal(m, m.T):
            raise ValueError("not a symmetric signed permutation matrix")
        return cls(cols.astype(np.int64), signs.astype(np.int8))

    def to_csv(self):
        return matrix_to_csv(self.dense())


def matrix_to_csv(m, fmt="{:.17g}"):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.atleast_2d(m):
        writer.writerow([fmt.format(v) if isinstance(v, float) or
                         isinstance(v, np.floating) else v for v in row])
    return buf.getvalue()


def a_family(n):
    """All A_ij as (perms, signs, dense) arrays of shapes (n, n, N) / (n, n, N, N).

    Built once per n from A_ij = -P_even^T lambda_i rho_j P_even; the cached
    arrays are read-only.
    """
    n = _check_n(n)
    with _CACHE_LOCK:
        cached = _FAMILIES.get(n)
    if cached is not None:
        return cached
    gens = generator_matrices(n)
    ranks = even_ranks(n)
    half = 1 << (n - 1)
    dense = np.empty((n, n, half, half))
    for i in range(n):
        for j in range(n):
            full = -gens.lam[i] @ gens.rho[j]
            dense[i, j] = full[np.ix_(ranks, ranks)]
    nz = np.nonzero(dense)
    perms = np.empty((n, n, half), dtype=np.int64)
    signs = np.empty((n, n, half), dtype=np.int8)
    perms[nz[0], nz[1], nz[2]] = nz[3]
    signs[nz[0], nz[1], nz[2]] = dense[nz].astype(np.int8)
    for arr in (dense, perms, signs):
        arr.flags.writeable = False
    family = (perms, signs, dense)
    with _CACHE_LOCK:
        _FAMILIES.setdefault(n, family)
        return _FAMILIES[n]


def a_matrix(n, i, j) -> SignedSymmetricMatrix:
    """A_ij for 1 <= i, j <= n as a signed symmetric permutation."""
    n = _check_n(n)
    if not (1 <= i <= n and 1 <= j <= n):
        raise DimensionError(f"indices ({i}, {j}) outside 1..{n}")
    perms, signs, _ = a_family(n)
    return SignedSymmetricMatrix(perms[i - 1, j - 1].copy(), signs[i - 1, j - 1].copy())


def pencil(y, n=None):
    """sum_ij Y_ij A_ij for one matrix Y or a stack of shape (..., n, n)."""
    y = np.asarray(y, dtype=float)
    n = y.shape[-1] if n is None else n
    dense = a_family(n)[2]
    return np.tensordot(y, dense, axes=([-2, -1], [0, 1]))


@dataclass(frozen=True, eq=False)
class CliffordEvenElement:
    """Element of Cl^0(n) in the even coordinate order of ``even_ranks``."""

    n: int
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.shape != (1 << (self.n - 1),):
            raise DimensionError(
                f"Cl^0({self.n}) coordinates need length {1 << (self.n - 1)}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def identity(cls, n):
        coords = np.zeros(1 << (n - 1))
        coords[0] = 1.0
        return cls(n, coords)

    @classmethod
    def basis(cls, n, subset):
        rank = subset_rank(n, subset)
        if popcount(rank) % 2:
            raise DimensionError("odd subsets are not in the even subalgebra")
        coords = np.zeros(1 << (n - 1))
        coords[even_index(n)[rank]] = 1.0
        return cls(n, coords)

    @classmethod
    def from_full(cls, n, full, atol=1e-12):
        full = np.asarray(full, dtype=float)
        odd = np.ones(1 << n, dtype=bool)
        odd[even_ranks(n)] = False
        if np.any(np.abs(full[odd]) > atol):
            raise ValueError("element has odd components")
        return cls(n, full[even_ranks(n)])

    def to_full(self):
        full = np.zeros(1 << self.n)
        full[even_ranks(self.n)] = self.coords
        return full

    def norm2(self):
        return float(self.coords @ self.coords)

    def __neg__(self):
        return CliffordEvenElement(self.n, -self.coords)

    def __mul__(self, other):
        return even_product(self, other)


def vector_element(u):
    """Embed u in R^n as sum u_i e_i in the full Cl(n) coordinates."""
    u = np.asarray(u, dtype=float)
    n = len(u)
    full = np.zeros(1 << n)
    full[[1 << (n - i) for i in range(1, n + 1)]] = u
    return full


def quad_map(x):
    """Q(x) with [Q(x)]_ij = <x, A_ij x>; accepts an element or a coords stack."""
    if isinstance(x, CliffordEvenElement):
        n, coords = x.n, x.coords
    else:
        coords = np.asarray(x, dtype=float)
        n = int(round(np.log2(coords.shape[-1]))) + 1
    perms, signs, _ = a_family(n)
    gathered = coords[..., perms]  # (..., n, n, N)
    return np.sum(signs * gathered * coords[..., None, None, :], axis=-1)


def full_product(x, y, n):
    return kernels.blade_product(np.ascontiguousarray(x, dtype=float),
                                 np.ascontiguousarray(y, dtype=float), n)


def even_product(x: CliffordEvenElement, y: CliffordEvenElement) -> CliffordEvenElement:
    """Algebra product xy of two even elements."""
    if x.n != y.n:
        raise DimensionError(f"dimension mismatch: Cl({x.n}) vs Cl({y.n})")
    full = full_product(x.to_full(), y.to_full(), x.n)
    return CliffordEvenElement(x.n, full[even_ranks(x.n)])


def conjugation_signs(n):
    """Sign of conj(e_I) = (-1)^|I| e_{i_k}...e_{i_1} for every rank."""
    k = np.array([popcount(r) for r in range(1 << n)])
    return np.where((k + k * (k - 1) // 2) % 2 == 1, -1.0, 1.0)


def conjugate(x: CliffordEvenElement) -> CliffordEvenElement:
    signs = conjugation_signs(x.n)[even_ranks(x.n)]
    return CliffordEvenElement(x.n, signs * x.coords)


def spin_from_vectors(vectors):
    """Product u_1 u_2 ... u_{2k} of an even number of vectors in R^n."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    count, n = vectors.shape
    if count % 2:
        raise ValueError("Spin elements need an even number of factors")
    full = np.zeros(1 << n)
    full[0] = 1.0
    for u in vectors:
        full = full_product(full, vector_element(u), n)
    return CliffordEvenElement.from_full(n, full)


def random_unit_vectors(rng, count, n):
    g = rng.standard_normal((count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def spin_sample(n, k=None, seed=None) -> CliffordEvenElement:
    """Product of 2k independent uniform unit vectors (k defaults to floor(n/2))."""
    n = _check_n(n)
    k = max(1, n // 2) if k is None else int(k)
    if not 1 <= k <= 2 * n:
        raise ValueError(f"k must lie in [1, {2 * n}], got {k}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return spin_from_vectors(random_unit_vectors(rng, 2 * k, n))


def check_rotation(x, tol):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise NotARotationError("expected a square matrix")
    n = x.shape[0]
    if (np.linalg.norm(x.T @ x - np.eye(n)) > tol
            or abs(np.linalg.det(x) - 1.0) > tol):
        raise NotARotationError("matrix is not in SO(n) within tolerance")
    return x


def reflection_factors(x, skip=1e-13):
    """Unit normals u_1..u_m (m even) of reflections with x = H_1 H_2 ... H_m."""
    m = np.array(x, dtype=float)
    n = m.shape[0]
    normals = []
    for k in range(n - 1):
        d = m[:, k].copy()
        d[k] -= 1.0
        nd = np.linalg.norm(d)
        if nd <= skip:
            continue
        u = d / nd
        m = m - 2.0 * np.outer(u, u @ m)
        normals.append(u)
    if m[n - 1, n - 1] < 0:
        u = np.zeros(n)
        u[n - 1] = 1.0
        normals.append(u)
    if len(normals) % 2:
        raise NotARotationError("odd number of reflections: det(x) = -1")
    return np.array(normals).reshape(-1, n)


def spin_lift(x, tol=1e-9) -> CliffordEvenElement:
    """A Spin(n) element mapping to the rotation x under Q."""
    x = check_rotation(x, tol)
    n = x.shape[0]
    _check_n(n)
    normals = reflection_factors(x)
    if len(normals) == 0:
        return CliffordEvenElement.identity(n)
    return spin_from_vectors(normals)


def equivariance_map(u, v, x: CliffordEvenElement, tol=1e-9) -> CliffordEvenElement:
    """Phi_(U,V)(x) = lift(U) x conj(lift(V)), so that U Q(x) V^T = Q(Phi x)."""
    lu = spin_lift(u, tol)
    lv = spin_lift(v, tol)
    return even_product(even_product(lu, x), conjugate(lv))
