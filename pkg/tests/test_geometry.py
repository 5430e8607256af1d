import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convso import geometry as geo
from convso.clifford import NotARotationError
from convso.polytopes import vertices
from convso.sampling import haar_orthogonal, haar_rotation, reflection_matrix


def test_ssvd_examples():
    assert np.allclose(geo.special_svd(np.eye(4)).sigma_tilde, 1)
    assert np.allclose(geo.special_svd(reflection_matrix(4)).sigma_tilde, [1, 1, 1, -1])
    s = geo.special_svd(np.diag([1.0, 2.0, -3.0]))
    assert np.allclose(s.sigma_tilde, [3, 2, -1])
    assert np.allclose(np.abs(s.u), np.abs(s.u).round())


@pytest.mark.parametrize("n", range(2, 9))
def test_ssvd_invariants(n, rng):
    xs = rng.standard_normal((500, n, n))
    s = geo.special_svd(xs)
    assert np.max(np.abs(s.reconstruct() - xs)) <= 1e-10
    dets = np.linalg.det(s.u) * np.linalg.det(s.v)
    assert np.max(np.abs(dets - 1)) <= 1e-12
    st_ = s.sigma_tilde
    assert np.all(np.diff(st_[:, :-1], axis=1) <= 1e-12)
    assert np.all(st_[:, -2] >= np.abs(st_[:, -1]) - 1e-12)
    assert np.all(np.sign(st_[:, -1]) == np.sign(np.linalg.det(xs)))


def test_ssvd_rejects_nonfinite():
    with pytest.raises(ValueError):
        geo.special_svd(np.array([[np.nan, 0], [0, 1]]))


def test_member_conv_son_examples(rng):
    assert geo.member_conv_son(np.eye(3)).contains
    rep = geo.member_conv_son(reflection_matrix(4))
    assert rep.verdict == "outside" and rep.slack == pytest.approx(-2)
    avg = 0.5 * (haar_rotation(4, 1) + haar_rotation(4, 2))
    assert geo.member_conv_son(avg).verdict == "inside"


def test_member_polar_examples():
    for n in (3, 4, 5):
        assert geo.member_polar("son-polar", np.zeros((n, n))).slack == 1.0
        x = haar_rotation(n, n)
        assert geo.member_polar("son-polar", x / n).verdict == "boundary"
        r = reflection_matrix(n)
        # max <R, X> over SO(n) is n - 2, over O(n) it is n
        assert geo.member_polar("son-polar", r / (n - 2)).verdict == "boundary"
        assert geo.member_polar("son-polar", r / n).slack == pytest.approx(2 / n)
        assert geo.member_polar("son-polar", 1.01 * r / (n - 2)).verdict == "outside"
        assert geo.member_polar("on-polar", r / n).verdict == "boundary"
        assert geo.member_polar("son-minus-polar", r / n).verdict == "boundary"


def test_member_polar_rejects_conv_kind():
    with pytest.raises(ValueError):
        geo.member_polar("conv-son", np.eye(3))


@pytest.mark.parametrize("n", range(2, 9))
def test_support_identity_and_reflection(n):
    assert geo.support_conv_son(np.eye(n)).value == n
    r = geo.support_conv_son(reflection_matrix(n))
    assert r.value == pytest.approx(max(n - 2, 0) if n > 2 else 0.0, abs=1e-9)
    assert np.sum(reflection_matrix(n) * r.maximizer) == pytest.approx(r.value, abs=1e-6)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_support_maximizer_and_sampling(n, rng):
    rots = haar_rotation(n, rng, 20000)
    for _ in range(10):
        c = rng.standard_normal((n, n))
        s = geo.support_conv_son(c)
        x = s.maximizer
        assert np.allclose(x.T @ x, np.eye(n), atol=1e-9)
        assert np.linalg.det(x) == pytest.approx(1, abs=1e-9)
        assert np.sum(c * x) == pytest.approx(s.value, abs=1e-8)
        assert np.max(np.einsum("ij,kij->k", c, rots)) <= s.value + 1e-9


def test_support_degenerate_uses_jitter():
    s = geo.support_conv_son(reflection_matrix(5))
    assert s.jittered and s.eigengap < geo.JITTER_GAP
    assert np.allclose(s.maximizer.T @ s.maximizer, np.eye(5), atol=1e-6)


def test_support_conv_on(rng):
    assert geo.support_conv_on(np.eye(3)) == pytest.approx(3)
    assert geo.support_conv_on(reflection_matrix(4)) == pytest.approx(4)
    for _ in range(20):
        c = rng.standard_normal((4, 4))
        assert geo.support_conv_on(c) >= geo.support_conv_son(c).value - 1e-9
        best = np.max(np.einsum("ij,kij->k", c, haar_orthogonal(4, rng, 2000)))
        assert best <= geo.support_conv_on(c) + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_support_sublinear(n, seed):
    r = np.random.default_rng(seed)
    c1, c2 = r.standard_normal((2, n, n))
    h = geo.support_conv_son_value
    assert h(c1 + c2) <= h(c1) + h(c2) + 1e-8
    assert h(3.0 * c1) == pytest.approx(3.0 * h(c1))


@pytest.mark.parametrize("n", range(3, 9))
def test_scaling_laws(n, rng):
    r = reflection_matrix(n)
    x = haar_rotation(n, rng)
    t = (n - 2) / n
    assert geo.conv_son_slack((1 - 1e-8) * x) > 0
    assert geo.conv_son_slack((1 + 1e-8) * x) < 0
    assert geo.conv_son_slack((t - 1e-8) * r) > 0
    assert geo.conv_son_slack((t + 1e-8) * r) < 0


@pytest.mark.parametrize("n", [3, 4, 5])
def test_bipolar_sampling(n, rng):
    ys = rng.standard_normal((1000, n, n))
    ys /= geo.support_conv_son_value(ys)[:, None, None]
    xs = 0.3 * rng.standard_normal((4000, n, n))
    xs = xs[geo.conv_son_slack(xs) >= 0]
    assert len(xs) > 50
    assert np.max(np.einsum("aij,bij->ab", ys, xs)) <= 1 + 1e-8


def test_gauge_matches_ray_scaling(rng):
    for n in (3, 4):
        x = rng.standard_normal((n, n))
        g = geo.gauge_conv_son(x)
        assert abs(geo.conv_son_slack(x / g)) < 1e-12
    assert geo.gauge_conv_son(np.diag([1.0, 0.5])) == np.inf
    assert geo.gauge_conv_son(0.5 * haar_rotation(2, 1)) == pytest.approx(0.5)


@pytest.mark.parametrize("n", range(2, 9))
def test_horn(n, rng):
    assert geo.horn_check(np.eye(n)) == 0
    for x in haar_rotation(n, rng, 300):
        assert geo.horn_check(x) >= -1e-9
    for v in vertices("parity", n).vertices:
        d = geo.diag_sign_rotation(v)
        assert np.array_equal(np.diag(d), v)


def test_horn_rejects_non_rotation():
    with pytest.raises(NotARotationError):
        geo.horn_check(reflection_matrix(3))


def test_body_kind_parse():
    assert geo.BodyKind.parse("SON_POLAR") is geo.BodyKind.SON_POLAR
    with pytest.raises(ValueError):
        geo.BodyKind.parse("cube")
