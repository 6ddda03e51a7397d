"""The complex unit ball B_n and the scalar Poincare disc."""
from dataclasses import dataclass

import numpy as np

from errors import BoundaryError, ShapeError
from siegel import geodesic_scale

BALL_MARGIN = 1e-7
NORM_CLAMP = 1.0 - 1e-14


def inner(a, b):
    """<a, b> = sum a_j conj(b_j)"""
    return complex(np.vdot(b, a))


def norm(v):
    return float(np.linalg.norm(v))


@dataclass(frozen=True)
class BallPoint:
    v: np.ndarray

    @classmethod
    def from_vector(cls, v, margin=BALL_MARGIN):
        v = np.asarray(v, dtype=np.complex128).reshape(-1)
        if v.size == 0:
            raise ShapeError("ball points need at least one coordinate")
        length = norm(v)
        if not np.isfinite(length) or length >= 1.0 - margin:
            raise BoundaryError(f"ball point has norm {length:.12f} >= 1 - {margin:.1e}")
        return cls(v)

    @classmethod
    def zero(cls, n):
        return cls(np.zeros(n, dtype=np.complex128))

    @property
    def n(self):
        return self.v.shape[0]


def _check_same_size(x, y):
    if x.n != y.n:
        raise ShapeError(f"ball points of different sizes {x.n} and {y.n}")


def _omega(x, z):
    """w_x(z) = (<z, x> / (1 + s)) x + s z with s = sqrt(1 - |x|^2)"""
    s = np.sqrt(1.0 - norm(x) ** 2)
    return (inner(z, x) / (1.0 + s)) * x + s * z


def ball_automorphism(x, y):
    """phi_x(y) = w_x((y - x) / (1 - <y, x>)); sends x to the origin"""
    _check_same_size(x, y)
    denominator = 1.0 - inner(y.v, x.v)
    if abs(denominator) <= 1e-15:
        raise BoundaryError("1 - <y, x> vanished; points are at the boundary")
    z = _omega(x.v, (y.v - x.v) / denominator)
    return BallPoint.from_vector(z, margin=0.0)


def ball_automorphism_inv(x, z):
    """phi_x^(-1) is phi_(-x)"""
    return ball_automorphism(BallPoint(-x.v), z)


def _kobayashi_from_norm(q):
    if q >= NORM_CLAMP:
        raise BoundaryError(f"automorphism image has norm {q:.15f} at the boundary")
    return 0.5 * float(np.log((1.0 + q) / (1.0 - q)))


def ball_distance(x, y):
    """(1/2) log((1 + |phi_x(y)|) / (1 - |phi_x(y)|))"""
    return _kobayashi_from_norm(norm(ball_automorphism(x, y).v))


def poincare_distance(a, b):
    """Poincare distance on the unit disc of C"""
    a, b = complex(a), complex(b)
    if abs(a) >= 1.0 or abs(b) >= 1.0:
        raise BoundaryError(f"Poincare distance needs |a|, |b| < 1, got {abs(a)}, {abs(b)}")
    m = abs((a - b) / (1.0 - a * b.conjugate()))
    return _kobayashi_from_norm(m)


def ball_scalar_mul(t, x):
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"scalar must lie in [0, 1], got {t}")
    return BallPoint(t * x.v)


def ball_almost_geodesic(x, y, t):
    """Almost geodesic with q = |.|; endpoints returned exactly"""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"curve parameter must lie in [0, 1], got {t}")
    if t == 0.0:
        return x
    if t == 1.0:
        return y
    z = ball_automorphism(x, y)
    q = norm(z.v)
    if q == 0.0:
        return x
    return ball_automorphism_inv(x, BallPoint(geodesic_scale(q, t) / q * z.v))


def random_ball_point(rng, n, max_norm=0.9):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    target = max_norm * (1.0 - rng.uniform(0.0, 1.0))
    return BallPoint.from_vector(v * (target / norm(v)))
