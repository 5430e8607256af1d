import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convso import kernels
from convso import _kernels_py as py

compiled = kernels.compiled_backend
needs_compiled = pytest.mark.skipif(compiled is None, reason="extension not built")


def test_backend_flag():
    assert kernels.BACKEND in ("compiled", "python")


@needs_compiled
@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_sign_tables_agree(n):
    s1, r1 = compiled.blade_sign_table(n)
    s2, r2 = py.blade_sign_table(n)
    assert np.array_equal(s1, s2)
    assert np.array_equal(r1, r2)


@needs_compiled
@pytest.mark.parametrize("n", [2, 4, 6])
def test_blade_product_agrees(n, rng):
    x = rng.standard_normal(1 << n)
    y = rng.standard_normal(1 << n)
    assert np.allclose(compiled.blade_product(x, y, n), py.blade_product(x, y, n),
                       atol=1e-12)


@needs_compiled
def test_jacobi_agrees(rng):
    m = rng.standard_normal((9, 9))
    m = m + m.T
    a = compiled.jacobi_eigh(np.ascontiguousarray(m))
    b = py.jacobi_eigh(m)
    assert a[2] == b[2]
    assert np.allclose(a[0], b[0], atol=1e-12)
    assert np.allclose(np.abs(a[1]), np.abs(b[1]), atol=1e-10)


def test_generator_relations():
    # e_i^2 = -1 and e_i e_j = -e_j e_i
    n = 4
    sign, rank = kernels.blade_sign_table(n)
    gens = [1 << (n - i) for i in range(1, n + 1)]
    for a in gens:
        assert sign[a, a] == -1.0 and rank[a, a] == 0
        for b in gens:
            if a != b:
                assert sign[a, b] == -sign[b, a]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_blade_product_associative(n, seed):
    r = np.random.default_rng(seed)
    x, y, z = (r.standard_normal(1 << n) for _ in range(3))
    lhs = kernels.blade_product(kernels.blade_product(x, y, n), z, n)
    rhs = kernels.blade_product(x, kernels.blade_product(y, z, n), n)
    assert np.allclose(lhs, rhs, atol=1e-9)


@pytest.mark.parametrize("impl", [py.jacobi_eigh] + ([compiled.jacobi_eigh] if compiled else []))
def test_jacobi_residuals(impl, rng):
    m = rng.standard_normal((12, 12))
    m = np.ascontiguousarray(m + m.T)
    vals, vecs, sweeps = impl(m)
    assert sweeps < 20
    assert np.allclose(vecs.T @ vecs, np.eye(12), atol=1e-12)
    assert np.linalg.norm(m @ vecs - vecs * vals) <= 1e-12 * np.linalg.norm(m)


def test_jacobi_diagonal_input_is_exact():
    for impl in [py.jacobi_eigh] + ([compiled.jacobi_eigh] if compiled else []):
        vals, vecs, sweeps = impl(np.diag([3.0, -1.0, 2.0]))
        assert sweeps == 0
        assert list(vals) == [3.0, -1.0, 2.0]


def test_blade_product_rejects_bad_length():
    with pytest.raises(ValueError):
        kernels.blade_product(np.zeros(3), np.zeros(3), 2)
