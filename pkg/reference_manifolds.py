"""SPD matrices and SO(3): domains with known geodesics, used as references
for the generic batch-normalization engine."""
from dataclasses import dataclass

import numpy as np

from errors import DomainMembershipError, ShapeError
from linalg_core import (
    as_matrix,
    frobenius,
    herm_eig,
    hpd_inv_sqrt,
    hpd_log,
    hpd_pow,
    hpd_sqrt,
    symmetric_part,
)

SPD_FLOOR = 1e-10
SYMMETRY_TOL = 1e-9
ORTHOGONALITY_TOL = 1e-8
# log on SO(3) is not unique at angle pi
MAX_ROTATION_ANGLE = np.pi - 1e-6


@dataclass(frozen=True)
class SpdPoint:
    m: np.ndarray

    @classmethod
    def from_matrix(cls, m):
        m = as_matrix(np.asarray(m, dtype=np.float64))
        residual = frobenius(m - m.T) / (1.0 + frobenius(m))
        if residual > SYMMETRY_TOL:
            raise DomainMembershipError(f"SPD point must be symmetric (residual {residual:.3e})")
        m = symmetric_part(m)
        smallest = float(herm_eig(m).eigenvalues[0])
        if smallest <= SPD_FLOOR:
            raise DomainMembershipError(f"SPD point has min eigenvalue {smallest:.3e}")
        return cls(m)

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    @property
    def n(self):
        return self.m.shape[0]


@dataclass(frozen=True)
class RotationPoint:
    r: np.ndarray

    @classmethod
    def from_matrix(cls, r):
        r = as_matrix(np.asarray(r, dtype=np.float64))
        if r.shape != (3, 3):
            raise ShapeError(f"rotations are 3 x 3, got {r.shape}")
        residual = frobenius(r.T @ r - np.eye(3))
        if residual > ORTHOGONALITY_TOL or np.linalg.det(r) <= 0.0:
            raise DomainMembershipError(f"matrix is not a rotation (orthogonality residual {residual:.3e})")
        return cls(r)

    @classmethod
    def identity(cls):
        return cls(np.eye(3))


# SPD, affine-invariant structure


def spd_translate(x, y):
    """x^(-1/2) y x^(-1/2)"""
    root = hpd_inv_sqrt(x.m)
    return SpdPoint.from_matrix(symmetric_part(root @ y.m @ root))


def spd_translate_inv(x, z):
    """x^(1/2) z x^(1/2)"""
    root = hpd_sqrt(x.m)
    return SpdPoint.from_matrix(symmetric_part(root @ z.m @ root))


def spd_distance(x, y):
    """||log(x^(-1/2) y x^(-1/2))||_F"""
    return frobenius(hpd_log(spd_translate(x, y).m))


def spd_scalar_mul(t, x):
    """t (x) x = exp(t log x) = x^t"""
    return SpdPoint.from_matrix(hpd_pow(x.m, t))


def spd_geodesic(x, y, t):
    """x^(1/2) (x^(-1/2) y x^(-1/2))^t x^(1/2)"""
    if t == 0.0:
        return x
    if t == 1.0:
        return y
    return spd_translate_inv(x, spd_scalar_mul(t, spd_translate(x, y)))


def random_spd(rng, n, low=0.5, high=2.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return SpdPoint.from_matrix(symmetric_part((q * rng.uniform(low, high, size=n)) @ q.T))


# SO(3)


def hat(w):
    wx, wy, wz = w
    return np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])


def vee(k):
    return np.array([k[2, 1], k[0, 2], k[1, 0]])


def so3_exp(w):
    """Rodrigues formula for exp(hat(w))"""
    w = np.asarray(w, dtype=np.float64).reshape(3)
    theta = float(np.linalg.norm(w))
    k = hat(w)
    if theta < 1e-8:
        # second-order series
        return RotationPoint(np.eye(3) + k + 0.5 * k @ k)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / theta ** 2
    return RotationPoint.from_matrix(np.eye(3) + a * k + b * k @ k)


def rotation_angle(r):
    sine = 0.5 * np.linalg.norm(vee(r.r - r.r.T))
    cosine = 0.5 * (np.trace(r.r) - 1.0)
    return float(np.arctan2(sine, cosine))


def so3_log(r):
    """Axis-angle vector w with exp(hat(w)) = r, for angles below pi - 1e-6"""
    theta = rotation_angle(r)
    if theta >= MAX_ROTATION_ANGLE:
        raise DomainMembershipError(f"rotation angle {theta:.9f} too close to pi for a unique log")
    skew = vee(r.r - r.r.T)
    if theta < 1e-8:
        return 0.5 * skew
    return theta / (2.0 * np.sin(theta)) * skew


def so3_translate(x, y):
    """x^T y, so that the translate of x by itself is the identity"""
    return RotationPoint(x.r.T @ y.r)


def so3_translate_inv(x, z):
    return RotationPoint(x.r @ z.r)


def so3_distance(x, y):
    """||log(x^T y)||_F = sqrt(2) |w|"""
    return float(np.sqrt(2.0) * np.linalg.norm(so3_log(so3_translate(x, y))))


def so3_scalar_mul(t, x):
    return so3_exp(t * so3_log(x))


def so3_geodesic(x, y, t):
    """x exp(t log(x^T y))"""
    if t == 0.0:
        return x
    if t == 1.0:
        return y
    return so3_translate_inv(x, so3_scalar_mul(t, so3_translate(x, y)))


def random_rotation(rng, max_angle=1.5):
    axis = rng.standard_normal(3)
    axis /= np.linalg.norm(axis)
    return so3_exp(axis * rng.uniform(0.0, max_angle))
