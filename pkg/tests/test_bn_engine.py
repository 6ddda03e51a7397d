import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import ball
import bn_engine as bn
import reference_manifolds as refm
import siegel
from errors import ShapeError

SEEDS = st.integers(min_value=0, max_value=2**32 - 1)
PRECISE = bn.FrechetConfig(iterations=500)


def disk(value):
    return siegel.SiegelDiskPoint.from_matrix([[value]])


def test_alpha_curve():
    assert bn.alpha_curve(0.5, 0.5) == pytest.approx(0.535898, abs=1e-6)
    assert bn.alpha_curve(0.5, 0.0) == 0.0
    assert bn.alpha_curve(0.5, 1.0) == pytest.approx(1.0)
    for bad in (0.0, 1.0):
        with pytest.raises(ValueError):
            bn.alpha_curve(bad, 0.5)


def test_reference_domains_use_identity_reparameterization():
    assert bn.SpdDomain(2).alpha(0.7, 0.3) == 0.3
    assert bn.RotationDomain().alpha(0.7, 0.3) == 0.3
    assert bn.SiegelDiskDomain(1).alpha(0.5, 0.5) == pytest.approx(bn.alpha_curve(0.5, 0.5))


def test_sym_fill_roundtrip():
    assert bn.triangular_size(3) == 6
    a = np.arange(1.0, 7.0)
    s = bn.sym_fill(a, 3)
    np.testing.assert_allclose(s, s.T)
    np.testing.assert_allclose(bn.sym_unfill(s), a)


@given(seed=SEEDS)
def test_generic_almost_geodesic_matches_disk_closed_form(seed):
    rng = np.random.default_rng(seed)
    x, y = siegel.random_disk_point(rng, 2), siegel.random_disk_point(rng, 2)
    dom = bn.SiegelDiskDomain(2)
    for t in (0.0, 0.3, 1.0):
        np.testing.assert_allclose(
            bn.almost_geodesic(dom, x, y, t).m, siegel.sd_almost_geodesic(x, y, t).m, atol=1e-10
        )


@given(seed=SEEDS)
def test_generic_almost_geodesic_is_spd_geodesic(seed):
    rng = np.random.default_rng(seed)
    x, y = refm.random_spd(rng, 3), refm.random_spd(rng, 3)
    np.testing.assert_allclose(
        bn.almost_geodesic(bn.SpdDomain(3), x, y, 0.4).m, refm.spd_geodesic(x, y, 0.4).m, atol=1e-9
    )


def test_upper_half_domain_centering(rng):
    dom = bn.UpperHalfDomain(2)
    x = siegel.random_upper_half_point(rng, 2)
    y = siegel.random_upper_half_point(rng, 2)
    np.testing.assert_allclose(dom.center(x, x).z, 1j * np.eye(2), atol=1e-9)
    np.testing.assert_allclose(dom.bias(x, dom.center(x, y)).z, y.z, atol=1e-8)
    assert dom.distance(dom.center(x, y), dom.identity()) == pytest.approx(dom.distance(x, y), rel=1e-8)


def test_frechet_config_validation():
    with pytest.raises(ValueError):
        bn.FrechetConfig(iterations=0)


def test_frechet_trivial_inputs():
    dom = bn.SiegelDiskDomain(1)
    point = disk(0.3)
    result = bn.solve_frechet_mean(dom, [point])
    assert result.point is point
    assert result.objective_history == [0.0]
    with pytest.raises(ShapeError):
        bn.frechet_mean(dom, [])
    with pytest.raises(ShapeError):
        bn.frechet_mean(dom, [point, point], weights=[1.0])


def test_frechet_mean_of_two_disk_points_is_midpoint():
    mean = bn.frechet_mean(bn.SiegelDiskDomain(1), [disk(0.0), disk(0.5)], PRECISE)
    assert mean.m[0, 0].real == pytest.approx(2.0 - math.sqrt(3.0), abs=1e-3)
    assert abs(mean.m[0, 0].imag) < 1e-3


def test_frechet_mean_of_symmetric_pair_is_origin():
    result = bn.solve_frechet_mean(bn.SiegelDiskDomain(1), [disk(0.5), disk(-0.5)], PRECISE)
    assert abs(result.point.m[0, 0]) < 1e-3
    assert np.all(np.diff(result.objective_history) <= 0.0)


def test_frechet_mean_on_upper_half_space():
    points = [siegel.UpperHalfPoint.from_parts([[0.0]], [[1.0]]), siegel.UpperHalfPoint.from_parts([[0.0]], [[4.0]])]
    mean = bn.frechet_mean(bn.UpperHalfDomain(1), points, PRECISE)
    assert mean.z[0, 0] == pytest.approx(2j, abs=1e-3)


def test_frechet_mean_on_spd_is_geometric_mean():
    points = [refm.SpdPoint.from_matrix([[1.0]]), refm.SpdPoint.from_matrix([[9.0]])]
    mean = bn.frechet_mean(bn.SpdDomain(1), points, PRECISE)
    assert mean.m[0, 0] == pytest.approx(3.0, abs=1e-3)


def test_analytic_ball_gradient_matches_central_difference(rng):
    dom = bn.UnitBallDomain(2)
    points = [ball.random_ball_point(rng, 2, max_norm=0.7) for _ in range(4)]
    weights = np.ones(len(points))
    params = np.array([0.1, -0.2, 0.05, 0.15])
    central = bn.parameterized_gradient(dom, points, params, bn.FrechetConfig(), weights)
    analytic = bn.parameterized_gradient(
        dom, points, params, bn.FrechetConfig(gradient_mode=bn.GradientMode.ANALYTIC), weights
    )
    np.testing.assert_allclose(analytic, central, rtol=1e-5, atol=1e-7)


def test_analytic_gradient_unavailable_on_disk():
    dom = bn.SiegelDiskDomain(1)
    cfg = bn.FrechetConfig(gradient_mode=bn.GradientMode.ANALYTIC)
    with pytest.raises(NotImplementedError):
        bn.solve_frechet_mean(dom, [disk(0.1), disk(0.2)], cfg)


def test_ball_mean_with_analytic_gradient():
    dom = bn.UnitBallDomain(1)
    points = [ball.BallPoint(np.array([0.5])), ball.BallPoint(np.array([-0.5]))]
    cfg = bn.FrechetConfig(iterations=300, gradient_mode=bn.GradientMode.ANALYTIC)
    result = bn.solve_frechet_mean(dom, points, cfg)
    assert ball.norm(result.point.v) < 1e-3
    assert np.all(np.diff(result.objective_history) <= 0.0)


def test_bn_state_momentum_range():
    with pytest.raises(ValueError):
        bn.BNState.initial(bn.SiegelDiskDomain(1), momentum=1.5)


def test_bn_momentum_extremes(rng):
    dom = bn.SiegelDiskDomain(2)
    batch = [siegel.random_disk_point(rng, 2, max_norm=0.6) for _ in range(4)]
    start = siegel.random_disk_point(rng, 2, max_norm=0.6)
    batch_mean = bn.frechet_mean(dom, batch)

    _, moved = bn.bn_fit_batch(dom, bn.BNState(start, dom.identity(), 1.0), batch)
    np.testing.assert_array_equal(moved.running_mean.m, batch_mean.m)

    _, frozen = bn.bn_fit_batch(dom, bn.BNState(start, dom.identity(), 0.0), batch)
    np.testing.assert_array_equal(frozen.running_mean.m, start.m)


def test_bn_fit_then_apply_agree_at_full_momentum(rng):
    dom = bn.SiegelDiskDomain(2)
    batch = [siegel.random_disk_point(rng, 2, max_norm=0.6) for _ in range(4)]
    fitted, state = bn.bn_fit_batch(dom, bn.BNState.initial(dom, momentum=1.0), batch)
    applied = bn.bn_apply(dom, state, batch)
    for a, b in zip(fitted, applied):
        np.testing.assert_array_equal(a.m, b.m)


def test_single_point_batch_maps_to_origin(rng):
    dom = bn.SiegelDiskDomain(3)
    outputs, _ = bn.bn_fit_batch(dom, bn.BNState.initial(dom), [siegel.random_disk_point(rng, 3)])
    np.testing.assert_array_equal(outputs[0].m, 0.0)


def test_bn_output_is_centered_on_the_bias(rng):
    dom = bn.SiegelDiskDomain(1)
    batch = [disk(0.2), disk(0.4), disk(-0.1)]
    bias = disk(0.3)
    outputs, _ = bn.bn_fit_batch(dom, bn.BNState.initial(dom, bias=bias), batch, PRECISE)
    mean = bn.frechet_mean(dom, outputs, PRECISE)
    assert mean.m[0, 0].real == pytest.approx(0.3, abs=1e-3)


def test_empty_batch_rejected():
    dom = bn.SiegelDiskDomain(1)
    with pytest.raises(ShapeError):
        bn.bn_fit_batch(dom, bn.BNState.initial(dom), [])
