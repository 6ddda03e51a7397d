import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import linalg_core as la
import reference_manifolds as refm
from errors import DomainMembershipError

SEEDS = st.integers(min_value=0, max_value=2**32 - 1)


def test_spd_validation():
    with pytest.raises(DomainMembershipError):
        refm.SpdPoint.from_matrix(np.diag([1.0, -1.0]))
    with pytest.raises(DomainMembershipError):
        refm.SpdPoint.from_matrix([[1.0, 0.5], [0.0, 1.0]])


def test_rotation_validation():
    with pytest.raises(DomainMembershipError):
        refm.RotationPoint.from_matrix(np.diag([1.0, 1.0, -1.0]))


@given(seed=SEEDS)
def test_spd_geodesic_closed_form(seed):
    rng = np.random.default_rng(seed)
    x, y = refm.random_spd(rng, 3), refm.random_spd(rng, 3)
    root, inv_root = la.hpd_sqrt(x.m), la.hpd_inv_sqrt(x.m)
    for t in (0.25, 0.5, 0.75):
        expected = root @ la.hpd_pow(inv_root @ y.m @ inv_root, t) @ root
        np.testing.assert_allclose(refm.spd_geodesic(x, y, t).m, expected, atol=1e-9)
    d = refm.spd_distance(x, y)
    assert refm.spd_distance(y, x) == pytest.approx(d, rel=1e-9)
    assert refm.spd_distance(x, refm.spd_geodesic(x, y, 0.5)) == pytest.approx(0.5 * d, rel=1e-9)


def test_spd_distance_of_scalars():
    a = refm.SpdPoint.from_matrix([[1.0]])
    b = refm.SpdPoint.from_matrix([[np.e ** 2]])
    assert refm.spd_distance(a, b) == pytest.approx(2.0)


@given(seed=SEEDS)
def test_so3_exp_log_roundtrip(seed):
    rng = np.random.default_rng(seed)
    r = refm.random_rotation(rng)
    np.testing.assert_allclose(refm.so3_exp(refm.so3_log(r)).r, r.r, atol=1e-10)
    np.testing.assert_allclose(refm.vee(refm.hat([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])


def test_so3_small_angle_and_pi():
    tiny = refm.so3_exp([1e-10, 0.0, 0.0])
    np.testing.assert_allclose(refm.so3_log(tiny), [1e-10, 0.0, 0.0], atol=1e-16)
    half_turn = refm.so3_exp([np.pi, 0.0, 0.0])
    with pytest.raises(DomainMembershipError):
        refm.so3_log(half_turn)


@given(seed=SEEDS)
def test_so3_geodesic(seed):
    rng = np.random.default_rng(seed)
    x, y = refm.random_rotation(rng), refm.random_rotation(rng)
    assert refm.so3_geodesic(x, y, 0.0) is x
    assert refm.so3_geodesic(x, y, 1.0) is y
    d = refm.so3_distance(x, y)
    mid = refm.so3_geodesic(x, y, 0.5)
    assert refm.so3_distance(x, mid) == pytest.approx(0.5 * d, rel=1e-8, abs=1e-12)
    assert refm.rotation_angle(refm.RotationPoint.identity()) == 0.0


def test_non_finite_points_are_rejected():
    with pytest.raises(DomainMembershipError):
        refm.SpdPoint.from_matrix([[np.nan]])
    with pytest.raises(DomainMembershipError):
        refm.SpdPoint.from_matrix([[np.inf, 0.0], [0.0, 1.0]])
    rotation = np.eye(3)
    rotation[0, 0] = np.nan
    with pytest.raises(DomainMembershipError):
        refm.RotationPoint.from_matrix(rotation)


@given(seed=SEEDS)
def test_spd_translate_contracts(seed):
    rng = np.random.default_rng(seed)
    x, y = refm.random_spd(rng, 3), refm.random_spd(rng, 3)
    np.testing.assert_allclose(refm.spd_translate(x, x).m, np.eye(3), atol=1e-10)
    np.testing.assert_allclose(refm.spd_translate_inv(x, refm.spd_translate(x, y)).m, y.m, atol=1e-10)

    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    g = q * rng.uniform(0.5, 2.0, size=3)
    moved_x = refm.SpdPoint.from_matrix(la.symmetric_part(g @ x.m @ g.T))
    moved_y = refm.SpdPoint.from_matrix(la.symmetric_part(g @ y.m @ g.T))
    assert refm.spd_distance(moved_x, moved_y) == pytest.approx(refm.spd_distance(x, y), rel=1e-7, abs=1e-9)


@given(seed=SEEDS)
def test_so3_translate_contracts(seed):
    rng = np.random.default_rng(seed)
    x, y, g = refm.random_rotation(rng), refm.random_rotation(rng), refm.random_rotation(rng)
    np.testing.assert_allclose(refm.so3_translate(x, x).r, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(refm.so3_translate_inv(x, refm.so3_translate(x, y)).r, y.r, atol=1e-12)
    moved_x, moved_y = refm.RotationPoint(g.r @ x.r), refm.RotationPoint(g.r @ y.r)
    assert refm.so3_distance(moved_x, moved_y) == pytest.approx(refm.so3_distance(x, y), rel=1e-8, abs=1e-12)


def test_so3_worked_values():
    quarter_turn = refm.so3_exp([0.0, 0.0, np.pi / 2])
    np.testing.assert_allclose(quarter_turn.r, [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]], atol=1e-14)
    eighth_turn = refm.so3_exp([0.0, 0.0, np.pi / 4])
    distance = refm.so3_distance(refm.RotationPoint.identity(), eighth_turn)
    assert distance == pytest.approx(np.sqrt(2.0) * np.pi / 4, rel=1e-10)
