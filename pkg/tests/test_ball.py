import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import ball
from errors import BoundaryError, ShapeError

SEEDS = st.integers(min_value=0, max_value=2**32 - 1)
DIMS = st.sampled_from([1, 2, 8])


def test_point_validation():
    with pytest.raises(BoundaryError):
        ball.BallPoint.from_vector([0.6, 0.8])
    with pytest.raises(ShapeError):
        ball.ball_distance(ball.BallPoint.zero(1), ball.BallPoint.zero(2))


def test_inner_product_convention():
    assert ball.inner(np.array([1j]), np.array([1.0])) == 1j
    assert ball.inner(np.array([1.0]), np.array([1j])) == -1j


@given(seed=SEEDS, n=DIMS)
def test_automorphism_centers_and_inverts(seed, n):
    rng = np.random.default_rng(seed)
    x = ball.random_ball_point(rng, n)
    y = ball.random_ball_point(rng, n)
    np.testing.assert_allclose(ball.ball_automorphism(x, x).v, 0.0, atol=1e-12)
    back = ball.ball_automorphism_inv(x, ball.ball_automorphism(x, y))
    np.testing.assert_allclose(back.v, y.v, atol=1e-10)
    assert ball.norm(ball.ball_automorphism(x, y).v) == pytest.approx(
        ball.norm(ball.ball_automorphism(y, x).v), abs=1e-10
    )


@given(seed=SEEDS, n=DIMS)
def test_automorphisms_are_isometries(seed, n):
    rng = np.random.default_rng(seed)
    x, y, z = (ball.random_ball_point(rng, n) for _ in range(3))
    moved = ball.ball_distance(ball.ball_automorphism(z, x), ball.ball_automorphism(z, y))
    assert moved == pytest.approx(ball.ball_distance(x, y), rel=1e-10)


def test_one_dimensional_ball_is_poincare_disc():
    grid = [r * np.exp(1j * a) for r in (0.0, 0.3, 0.6, 0.9) for a in (0.0, 1.0, 2.5, 4.0)]
    for a in grid:
        for b in grid:
            d = ball.ball_distance(ball.BallPoint(np.array([a])), ball.BallPoint(np.array([b])))
            assert d == pytest.approx(ball.poincare_distance(a, b), abs=1e-12)


def test_poincare_distance_rejects_boundary():
    with pytest.raises(BoundaryError):
        ball.poincare_distance(1.0, 0.0)


def test_almost_geodesic(rng):
    x = ball.random_ball_point(rng, 3)
    y = ball.random_ball_point(rng, 3)
    assert ball.ball_almost_geodesic(x, y, 0.0) is x
    assert ball.ball_almost_geodesic(x, y, 1.0) is y
    total = ball.ball_distance(x, y)
    for t in (0.25, 0.5, 0.75):
        assert ball.ball_distance(x, ball.ball_almost_geodesic(x, y, t)) == pytest.approx(t * total, rel=1e-9)


def test_scalar_multiplication_range():
    x = ball.BallPoint(np.array([0.5j]))
    np.testing.assert_allclose(ball.ball_scalar_mul(0.5, x).v, [0.25j])
    with pytest.raises(ValueError):
        ball.ball_scalar_mul(-0.1, x)
