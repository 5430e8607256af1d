import numpy as np
import pytest

from convso import geometry as geo
from convso import hull_reps as hr
from convso.sampling import haar_orthogonal, haar_rotation, reflection_matrix

from oracles import parse_sdpa


def test_son_polar_n2_block():
    # reference value: I - [[Y11+Y22, Y21-Y12], [Y21-Y12, -Y11-Y22]]
    y = np.array([[0.3, -0.7], [0.2, 0.4]])
    block = hr.evaluate_lmi(hr.son_polar_rep(2), y).blocks[0]
    expected = np.eye(2) - np.array([[y[0, 0] + y[1, 1], y[1, 0] - y[0, 1]],
                                     [y[1, 0] - y[0, 1], -y[0, 0] - y[1, 1]]])
    assert np.array_equal(block, expected)


@pytest.mark.parametrize("n", range(2, 9))
def test_size_accounting(n):
    half = 2 ** (n - 1)
    conv = hr.conv_son_rep(n).total_size
    assert conv == {2: 2, 3: 4}.get(n, half + 2 * n)
    assert hr.son_polar_rep(n).total_size == half
    assert hr.on_polar_rep(n).total_size == 2 ** n
    assert hr.conv_on_rep(n).total_size == 2 * n


def test_on_polar_n3_blocks():
    assert hr.on_polar_rep(3).sizes == (4, 4)


@pytest.mark.parametrize("n", range(2, 7))
def test_polar_examples(n):
    assert hr.evaluate_lmi(hr.son_polar_rep(n), np.zeros((n, n))).slack == 1.0
    x = haar_rotation(n, n)
    assert abs(hr.evaluate_lmi(hr.son_polar_rep(n), x / n).slack) < 1e-9
    assert abs(hr.evaluate_lmi(hr.on_polar_rep(n), np.eye(n) / n).slack) < 1e-9
    assert np.all(hr.evaluate_lmi(hr.on_polar_rep(n), np.zeros((n, n))).block_slacks == 1)


def test_conv_son_n3_at_identity():
    # reference value: the explicit 4x4 form at X = I is diag(0, 0, 4, 0)
    block = hr.evaluate_lmi(hr.conv_son_rep(3), np.eye(3)).blocks[0]
    assert np.array_equal(block, np.diag([0.0, 0.0, 4.0, 0.0]))


@pytest.mark.parametrize("n", range(2, 8))
def test_conv_son_examples(n):
    lmi = hr.conv_son_rep(n)
    assert abs(hr.evaluate_lmi(lmi, np.eye(n)).slack) < 1e-12
    if n >= 3:
        ev = hr.evaluate_lmi(lmi, reflection_matrix(n))
        assert ev.slack < -1
        assert ev.block_slacks[-1] == pytest.approx(-2)


def test_conv_son_n4_half_reflection_on_boundary():
    assert abs(hr.evaluate_lmi(hr.conv_son_rep(4), 0.5 * reflection_matrix(4)).slack) < 1e-9


def test_conv_so2_plane_form():
    lmi = hr.conv_son_rep(2)
    c, s = 0.6, 0.3
    x = np.array([[c, -s], [s, c]])
    ev = hr.evaluate_lmi(lmi, x)
    # reference value: [[1 + c, s], [s, 1 - c]]
    assert np.allclose(ev.blocks[0], [[1 + c, s], [s, 1 - c]])
    assert ev.equality_residual == 0 and ev.slack == 0
    off = hr.evaluate_lmi(lmi, np.diag([0.5, 0.3]))
    assert off.slack == pytest.approx(-0.2)


def test_conv_on_examples():
    lmi = hr.conv_on_rep(3)
    assert abs(hr.evaluate_lmi(lmi, haar_orthogonal(3, 4)).slack) < 1e-10
    assert abs(hr.evaluate_lmi(lmi, np.eye(3)).slack) < 1e-12
    assert hr.evaluate_lmi(lmi, np.zeros((3, 3))).slack == 1
    assert hr.evaluate_lmi(lmi, 1.01 * np.eye(3)).slack < 0
    with pytest.raises(ValueError):
        hr.conv_on_rep(0)


def test_evaluate_shape_check():
    with pytest.raises(ValueError):
        hr.evaluate_lmi(hr.conv_son_rep(3), np.eye(4))


@pytest.mark.parametrize("n", range(2, 7))
def test_membership_consistency(n, rng):
    xs = rng.standard_normal((3000, n, n)) * (0.7 / np.sqrt(n))
    a = hr.lmi_slack(hr.conv_son_rep(n), xs)
    b = geo.conv_son_slack(xs)
    band = (np.abs(a) > 1e-7) & (np.abs(b) > 1e-7)
    assert not np.any(band & ((a > 0) != (b > 0)))
    # vectorized and single evaluation agree
    assert a[0] == pytest.approx(hr.evaluate_lmi(hr.conv_son_rep(n), xs[0]).slack, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_duality_sampling(n, rng):
    lmi = hr.son_polar_rep(n)
    ys = rng.standard_normal((300, n, n))
    ys /= geo.support_conv_son_value(ys)[:, None, None]
    assert np.all(hr.lmi_slack(lmi, ys) >= -1e-12)
    xs = haar_rotation(n, rng, 3000)
    assert np.max(np.einsum("aij,bij->ab", ys, xs)) <= 1 + 1e-8


@pytest.mark.parametrize("n", [2, 3, 4])
def test_intersection_identity(n, rng):
    ys = rng.standard_normal((2000, n, n)) * 0.4
    both = hr.lmi_slack(hr.on_polar_rep(n), ys) >= 0
    a = hr.lmi_slack(hr.son_polar_rep(n), ys) >= 0
    b = hr.lmi_slack(hr.son_minus_polar_rep(n), ys) >= 0
    assert np.array_equal(both, a & b)
    # and the O(n) polar is the nuclear-norm ball
    nuc = np.sum(np.linalg.svd(ys, compute_uv=False), axis=1)
    margin = np.abs(nuc - 1) > 1e-9
    assert np.array_equal(both[margin], (nuc <= 1)[margin])


def test_lift_barycenter_and_explicit_n3():
    lift = hr.psd_lift_conv_son(3)
    assert lift.cone_size == 4
    assert np.array_equal(lift.output(np.eye(4) / 4), np.zeros((3, 3)))
    z = np.random.default_rng(0).standard_normal((4, 4))
    z = z + z.T
    # reference value: the conv SO(3) lift written out in Z coordinates
    expected = np.array([
        [z[0, 0] - z[1, 1] - z[2, 2] + z[3, 3], -2 * z[0, 2] - 2 * z[1, 3], -2 * z[0, 1] + 2 * z[2, 3]],
        [2 * z[0, 2] - 2 * z[1, 3], z[0, 0] + z[1, 1] - z[2, 2] - z[3, 3], -2 * z[0, 3] - 2 * z[1, 2]],
        [2 * z[0, 1] + 2 * z[2, 3], 2 * z[0, 3] - 2 * z[1, 2], z[0, 0] - z[1, 1] + z[2, 2] - z[3, 3]],
    ])
    assert np.allclose(lift.output(z), expected, atol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_lift_support_agrees(n, rng):
    lift = hr.psd_lift_conv_son(n)
    assert np.allclose(lift.output(np.eye(lift.cone_size) / lift.cone_size), 0)
    for _ in range(5):
        c = rng.standard_normal((n, n))
        z = lift.optimal_z(c)
        assert lift.feasible(z)
        x = lift.output(z)
        ref = geo.support_conv_son(c)
        assert np.sum(c * x) == pytest.approx(ref.value, abs=1e-8)
        assert lift.support(c) == pytest.approx(ref.value, abs=1e-8)
        assert np.allclose(x, ref.maximizer, atol=1e-6)


def test_nuclear_lift():
    lift = hr.nuclear_lift(3)
    assert lift.cone_size == 6
    eye = np.eye(3) / 3
    assert lift.feasible(eye, eye, eye)
    x, y = lift.certificate(np.zeros((3, 3)))
    assert lift.feasible(x, y, np.zeros((3, 3)))
    z = np.random.default_rng(1).standard_normal((3, 3))
    z *= 0.9 / np.sum(np.linalg.svd(z, compute_uv=False))
    assert lift.feasible(*lift.certificate(z), z)
    z *= 1.1 / 0.9
    assert lift.certificate(z) is None


def test_nuclear_lift_rejects_outside_points():
    # the cheapest PSD completion of Z has trace 2 * nuclear(Z) = 2.2 > 2
    lift = hr.nuclear_lift(2)
    z = np.diag([0.6, 0.5])
    x = y = np.abs(z)
    assert np.linalg.eigvalsh(lift.block(x, y, z))[0] >= -1e-12
    assert np.trace(x) + np.trace(y) == pytest.approx(2.2)
    assert not lift.feasible(x / 1.1, y / 1.1, z)


def test_sdpa_son_polar_n2():
    text = hr.sdpa_text(hr.son_polar_rep(2), np.zeros((2, 2)))
    m, sizes, c, mats = parse_sdpa(text)
    assert m == 4 and sizes == [2]
    assert np.array_equal(c, np.zeros(4))
    coeff_lines = [ln for ln in text.splitlines()[4:] if not ln.startswith("0 ")]
    assert len(coeff_lines) == 6


def test_sdpa_block_structure_on_polar_n3():
    text = hr.sdpa_text(hr.on_polar_rep(3), np.eye(3))
    assert text.splitlines()[2] == "4 4"
    assert text.splitlines()[3] == "1 0 0 0 1 0 0 0 1"


@pytest.mark.parametrize("body,n", [("conv-son", 2), ("conv-son", 3), ("conv-son", 4),
                                    ("on-polar", 3), ("conv-on", 2), ("son-minus-polar", 3)])
def test_sdpa_round_trip(body, n, tmp_path):
    lmi = hr.representation(body, n)
    obj = np.arange(n * n, dtype=float).reshape(n, n)
    path = tmp_path / "rep.dat-s"
    hr.export_sdpa(lmi, obj, path)
    m, sizes, c, mats = parse_sdpa(path.read_text())
    assert m == n * n and np.array_equal(c, obj.reshape(-1))
    for k, blk in enumerate(lmi.blocks, start=1):
        size = blk.size
        f0 = mats.get((0, k), np.zeros((size, size)))
        assert np.array_equal(f0, -blk.constant)
        for i in range(n):
            for j in range(n):
                fij = mats.get((i * n + j + 1, k), np.zeros((size, size)))
                assert np.array_equal(fij, -blk.coeff[i, j])
    if lmi.equalities:
        assert sizes[-1] == -2 * len(lmi.equalities)


def test_sdpa_deterministic(tmp_path):
    a = hr.sdpa_text(hr.conv_son_rep(5), np.eye(5))
    b = hr.sdpa_text(hr.conv_son_rep(5), np.eye(5))
    assert a == b


def test_sdpa_io_error(tmp_path):
    with pytest.raises(OSError):
        hr.export_sdpa(hr.conv_on_rep(2), np.eye(2), tmp_path / "missing" / "x.dat-s")


def test_block_csv():
    text = hr.lmi_to_csv(hr.conv_son_rep(4))
    assert text.count("# block") == 2
    assert hr.conv_son_rep(3).blocks[0].to_csv(np.eye(3)).splitlines()[2] == "0,0,4,0"


def test_reps_are_immutable():
    lmi = hr.conv_son_rep(4)
    with pytest.raises(ValueError):
        lmi.blocks[0].constant[0, 0] = 2.0
