"""Random orthogonal matrices and other seeded test inputs."""
import numpy as np


def as_generator(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_orthogonal(n, seed=None, size=None):
    """Haar-distributed O(n) via sign-corrected QR of a Gaussian matrix."""
    rng = as_generator(seed)
    shape = (n, n) if size is None else (size, n, n)
    g = rng.standard_normal(shape)
    q, r = np.linalg.qr(g)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    return q * d[..., None, :]


def haar_rotation(n, seed=None, size=None):
    """Haar-distributed SO(n): flip the last column when det = -1."""
    q = haar_orthogonal(n, seed, size)
    det = np.linalg.det(q)
    q[..., :, -1] *= np.where(det < 0, -1.0, 1.0)[..., None]
    return q


def reflection_matrix(n):
    """R = diag(1, ..., 1, -1)."""
    r = np.eye(n)
    r[-1, -1] = -1.0
    return r
