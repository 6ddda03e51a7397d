"""Siegel disk and Siegel upper half space.

Disk points are complex symmetric matrices ``x`` with spectral norm below 1.
Upper half space points are ``u + iv`` with ``u`` real symmetric and ``v``
real SPD. The two models are related by the matrix Cayley transform.
"""
import logging
import warnings
from dataclasses import dataclass

import numpy as np

from errors import (
    BoundaryError,
    DomainMembershipError,
    NaiveDistanceWarning,
    ShapeError,
    SingularMatrixError,
    SpectrumError,
)
from linalg_core import (
    as_matrix,
    dagger,
    frobenius,
    herm_eig,
    hermitian_part,
    hpd_inv_sqrt,
    hpd_sqrt,
    solve,
    solve_right,
    spectral_norm,
    symmetric_part,
)

logger = logging.getLogger(__name__)

# Domain configuration
DISK_MARGIN = 1e-7
SYMMETRY_TOL = 1e-9
UPPER_HALF_FLOOR = 1e-10
SYMPLECTIC_TOL = 1e-8
EIG_CLAMP = 1.0 - 1e-14
CROSS_RATIO_IMAG_TOL = 1e-8
NAIVE_PSD_TOL = 1e-6


def _symmetry_residual(m):
    return frobenius(m - m.T) / (1.0 + frobenius(m))


@dataclass(frozen=True)
class SiegelDiskPoint:
    """A point of the Siegel disk SD_n."""
    m: np.ndarray

    @classmethod
    def from_matrix(cls, m, margin=DISK_MARGIN):
        m = as_matrix(np.asarray(m, dtype=np.complex128))
        residual = _symmetry_residual(m)
        if residual > SYMMETRY_TOL:
            raise DomainMembershipError(
                f"Siegel disk point must be symmetric (residual {residual:.3e})"
            )
        m = symmetric_part(m)
        norm = spectral_norm(m)
        if norm >= 1.0 - margin:
            raise BoundaryError(
                f"Siegel disk point has spectral norm {norm:.12f} >= 1 - {margin:.1e}"
            )
        return cls(m)

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, n), dtype=np.complex128))

    @property
    def n(self):
        return self.m.shape[0]


@dataclass(frozen=True)
class UpperHalfPoint:
    """A point ``u + iv`` of the Siegel upper half space SH_n."""
    u: np.ndarray
    v: np.ndarray

    @classmethod
    def from_parts(cls, u, v):
        u = as_matrix(np.asarray(u, dtype=np.float64))
        v = as_matrix(np.asarray(v, dtype=np.float64))
        if u.shape != v.shape:
            raise ShapeError(f"real part {u.shape} and imaginary part {v.shape} differ")
        for name, part in (("real", u), ("imaginary", v)):
            residual = _symmetry_residual(part)
            if residual > SYMMETRY_TOL:
                raise DomainMembershipError(
                    f"{name} part must be symmetric (residual {residual:.3e})"
                )
        v = symmetric_part(v)
        smallest = float(herm_eig(v).eigenvalues[0])
        if smallest <= UPPER_HALF_FLOOR:
            raise DomainMembershipError(
                f"imaginary part must be SPD, min eigenvalue {smallest:.3e}"
            )
        return cls(symmetric_part(u), v)

    @classmethod
    def from_complex(cls, z):
        z = np.asarray(z, dtype=np.complex128)
        return cls.from_parts(z.real, z.imag)

    @classmethod
    def identity(cls, n):
        return cls(np.zeros((n, n)), np.eye(n))

    @property
    def n(self):
        return self.u.shape[0]

    @property
    def z(self):
        return self.u + 1j * self.v


def standard_symplectic_form(n):
    """The matrix e_2n = [[0, I], [-I, 0]]"""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def is_symplectic(g, tol=SYMPLECTIC_TOL):
    g = as_matrix(g)
    if g.shape[0] % 2:
        return False
    e = standard_symplectic_form(g.shape[0] // 2)
    return frobenius(g.T @ e @ g - e) <= tol


@dataclass(frozen=True)
class SymplecticMatrix:
    """A real 2n x 2n matrix of the symplectic group Sp_2n."""
    g: np.ndarray

    @classmethod
    def from_matrix(cls, g):
        g = as_matrix(np.asarray(g, dtype=np.float64))
        if not is_symplectic(g):
            raise DomainMembershipError("matrix does not preserve the symplectic form")
        return cls(g)

    @property
    def n(self):
        return self.g.shape[0] // 2

    def blocks(self):
        n = self.n
        return self.g[:n, :n], self.g[:n, n:], self.g[n:, :n], self.g[n:, n:]


# Disk geometry


def sd_contains(m, margin=DISK_MARGIN):
    """True iff ``m`` is finite, symmetric and has spectral norm below ``1 - margin``"""
    m = np.asarray(m, dtype=np.complex128)
    if not np.all(np.isfinite(m)):
        return False
    m = as_matrix(m)
    if _symmetry_residual(m) > SYMMETRY_TOL:
        return False
    return spectral_norm(symmetric_part(m)) < 1.0 - margin


def _complement(x):
    """The pair (I - x x^H, I - x^H x)"""
    eye = np.eye(x.shape[0], dtype=np.complex128)
    return eye - x @ dagger(x), eye - dagger(x) @ x


def _check_same_size(*points):
    sizes = {p.n for p in points}
    if len(sizes) != 1:
        raise ShapeError(f"points of different sizes {sorted(sizes)}")


def sd_automorphism(x, y):
    """phi_x(y) = (I-xx^H)^(-1/2) (y-x) (I-x^H y)^(-1) (I-x^H x)^(1/2); sends x to 0."""
    _check_same_size(x, y)
    xm, ym = x.m, y.m
    left, right = _complement(xm)
    eye = np.eye(xm.shape[0], dtype=np.complex128)
    core = solve_right(ym - xm, eye - dagger(xm) @ ym)
    z = hpd_inv_sqrt(left) @ core @ hpd_sqrt(right)
    return SiegelDiskPoint.from_matrix(symmetric_part(z), margin=0.0)


def sd_automorphism_inv(x, z):
    """Inverse of phi_x: (I-xx^H)^(1/2) (I+z x^H)^(-1) (z+x) (I-x^H x)^(-1/2)."""
    _check_same_size(x, z)
    xm, zm = x.m, z.m
    left, right = _complement(xm)
    eye = np.eye(xm.shape[0], dtype=np.complex128)
    core = solve(eye + zm @ dagger(xm), zm + xm)
    y = hpd_sqrt(left) @ core @ hpd_inv_sqrt(right)
    return SiegelDiskPoint.from_matrix(symmetric_part(y), margin=0.0)


def _kahler_from_eigenvalues(values):
    """sqrt(sum log^2((1 + sqrt r) / (1 - sqrt r))) over eigenvalues r of c"""
    values = np.asarray(values, dtype=np.float64)
    if np.any(values >= EIG_CLAMP):
        raise BoundaryError(
            f"cross-ratio eigenvalue {values.max():.15f} reached the boundary"
        )
    roots = np.sqrt(np.clip(values, 0.0, EIG_CLAMP))
    return float(np.sqrt(np.sum(np.log((1.0 + roots) / (1.0 - roots)) ** 2)))


def sd_distance_kahler(x, y):
    """Kahler distance from the eigenvalues of c = phi_x(y) phi_x(y)^H."""
    z = sd_automorphism(x, y).m
    c = hermitian_part(z @ dagger(z))
    return _kahler_from_eigenvalues(herm_eig(c).eigenvalues)


def complement_product(x, y):
    """(I-xx^H)^(1/2) (I-yx^H)^(-1) (I-yy^H) (I-xy^H)^(-1) (I-xx^H)^(1/2)"""
    _check_same_size(x, y)
    xm, ym = x.m, y.m
    eye = np.eye(xm.shape[0], dtype=np.complex128)
    root = hpd_sqrt(eye - xm @ dagger(xm))
    inner = solve(eye - ym @ dagger(xm), eye - ym @ dagger(ym))
    inner = solve_right(inner, eye - xm @ dagger(ym))
    return root @ inner @ root


def sd_distance_kahler_alt(x, y):
    """Kahler distance with c = I - complement_product(x, y)."""
    eye = np.eye(x.n, dtype=np.complex128)
    c = hermitian_part(eye - complement_product(x, y))
    return _kahler_from_eigenvalues(herm_eig(c).eigenvalues)


def naive_cross_ratio(x, y):
    """c = (y-x)(I-x^H y)^(-1)(y^H-x^H)(I-x y^H)^(-1)"""
    _check_same_size(x, y)
    xm, ym = x.m, y.m
    eye = np.eye(xm.shape[0], dtype=np.complex128)
    first = solve_right(ym - xm, eye - dagger(xm) @ ym)
    second = solve_right(dagger(ym) - dagger(xm), eye - xm @ dagger(ym))
    return first @ second


def sd_distance_naive(x, y):
    """Trace formula Tr log^2((I + c^(1/2))(I - c^(1/2))^(-1)) on the raw cross ratio.

    Numerically the weakest of the three forms; kept for cross-checks. The
    matrix c is not Hermitian but is similar to an HPD matrix, so its
    spectrum must be real and non-negative. A warning is issued otherwise.
    """
    c = naive_cross_ratio(x, y)
    values = np.linalg.eigvals(c)
    scale = max(1.0, float(np.max(np.abs(values))))
    if np.max(np.abs(values.imag)) > NAIVE_PSD_TOL * scale or np.min(values.real) < -NAIVE_PSD_TOL:
        warnings.warn(
            "naive cross ratio has a spectrum that is not real non-negative "
            f"(max |imag| {np.max(np.abs(values.imag)):.3e}, min real {np.min(values.real):.3e})",
            NaiveDistanceWarning,
            stacklevel=2,
        )
    return _kahler_from_eigenvalues(np.sort(values.real))


def _kobayashi_from_norm(q):
    if q >= EIG_CLAMP:
        raise BoundaryError(f"seminorm {q:.15f} reached the boundary")
    return 0.5 * float(np.log((1.0 + q) / (1.0 - q)))


def sd_distance_kobayashi(x, y):
    """(1/2) log((1 + |phi_x(y)|_2) / (1 - |phi_x(y)|_2))"""
    return _kobayashi_from_norm(spectral_norm(sd_automorphism(x, y).m))


def sd_scalar_mul(t, x):
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"scalar must lie in [0, 1], got {t}")
    return SiegelDiskPoint(t * x.m)


def geodesic_scale(q, t):
    """s(t) = ((1+q)^t - (1-q)^t) / ((1+q)^t + (1-q)^t), i.e. tanh(t artanh q)"""
    plus = (1.0 + q) ** t
    minus = (1.0 - q) ** t
    return (plus - minus) / (plus + minus)


def sd_almost_geodesic(x, y, t):
    """Almost geodesic joining x (t=0) and y (t=1) under the Kobayashi distance."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"curve parameter must lie in [0, 1], got {t}")
    if t == 0.0:
        return x
    if t == 1.0:
        return y
    z = sd_automorphism(x, y)
    q = spectral_norm(z.m)
    if q == 0.0:
        return x
    scaled = SiegelDiskPoint(geodesic_scale(q, t) / q * z.m)
    return sd_automorphism_inv(x, scaled)


# Cayley transform and the upper half space


def cayley(x):
    """(x - iI)(x + iI)^(-1), from SH_n to SD_n"""
    z = x.z
    eye = np.eye(x.n, dtype=np.complex128)
    return SiegelDiskPoint.from_matrix(solve_right(z - 1j * eye, z + 1j * eye), margin=0.0)


def cayley_inv(z):
    """i(I + z)(I - z)^(-1), from SD_n to SH_n"""
    eye = np.eye(z.n, dtype=np.complex128)
    try:
        x = 1j * solve_right(eye + z.m, eye - z.m)
    except SingularMatrixError as e:
        raise BoundaryError(f"inverse Cayley transform is singular near I: {e}") from e
    return UpperHalfPoint.from_complex(symmetric_part(x))


def cross_ratio(x, y):
    """R(x, y) = (x-y)(x-conj y)^(-1)(conj x-conj y)(conj x-y)^(-1)"""
    _check_same_size(x, y)
    a, b = x.z, y.z
    first = solve_right(a - b, a - np.conj(b))
    second = solve_right(np.conj(a) - np.conj(b), np.conj(a) - b)
    return first @ second


def sh_distance(x, y):
    """Distance on SH_n from the eigenvalues of the cross ratio R(x, y)."""
    values = np.linalg.eigvals(cross_ratio(x, y))
    if np.max(np.abs(values.imag)) > CROSS_RATIO_IMAG_TOL:
        raise SpectrumError(
            f"cross ratio has complex eigenvalues (max |imag| {np.max(np.abs(values.imag)):.3e})"
        )
    real = values.real
    if real.min() < -CROSS_RATIO_IMAG_TOL or real.max() >= 1.0:
        raise SpectrumError(
            f"cross ratio eigenvalues outside [0, 1): [{real.min():.3e}, {real.max():.15f}]"
        )
    return _kahler_from_eigenvalues(np.sort(real))


def sh_action(g, x):
    """Generalized linear fractional transformation g[x] = (ax + b)(cx + d)^(-1)"""
    if g.n != x.n:
        raise ShapeError(f"group element of size {g.n} cannot act on SH_{x.n}")
    a, b, c, d = g.blocks()
    z = x.z
    try:
        y = solve_right(a @ z + b, c @ z + d)
    except SingularMatrixError as e:
        raise BoundaryError(f"cx + d is singular: {e}") from e
    return UpperHalfPoint.from_complex(symmetric_part(y))


def sh_point_to_group(x):
    """The element [[v^(1/2), u v^(-1/2)], [0, v^(-1/2)]] sending iI to x"""
    root = hpd_sqrt(x.v)
    inv_root = hpd_inv_sqrt(x.v)
    g = np.block([[root, x.u @ inv_root], [np.zeros_like(root), inv_root]])
    return SymplecticMatrix.from_matrix(g)


def sh_group_inverse(g):
    """g^(-1) = -e g^T e for symplectic g"""
    e = standard_symplectic_form(g.n)
    return SymplecticMatrix.from_matrix(-e @ g.g.T @ e)


# Identities used by the verification suite


def lemma_push_through_residual(x):
    """Largest residual of (I-xx^H)^(-1)x = x(I-x^H x)^(-1) and its square-root form"""
    left, right = _complement(x.m)
    inverse_form = frobenius(solve(left, x.m) - solve_right(x.m, right))
    root_form = frobenius(hpd_sqrt(left) @ x.m - x.m @ hpd_sqrt(right))
    return max(inverse_form, root_form)


def lemma_complement_residual(x, y):
    """Frobenius residual of I - phi_x(y) phi_x(y)^H against complement_product(x, y)"""
    z = sd_automorphism(x, y).m
    eye = np.eye(x.n, dtype=np.complex128)
    return frobenius(eye - z @ dagger(z) - complement_product(x, y))


# Samplers


def random_complex_symmetric(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return symmetric_part(a)


def random_disk_point(rng, n, max_norm=0.8):
    """A disk point with spectral norm drawn uniformly from (0, max_norm]"""
    a = random_complex_symmetric(rng, n)
    target = max_norm * (1.0 - rng.uniform(0.0, 1.0))
    return SiegelDiskPoint.from_matrix(a * (target / spectral_norm(a)))


def random_upper_half_point(rng, n, spread=1.0):
    u = rng.standard_normal((n, n)) * spread
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    v = (q * rng.uniform(0.5, 2.0, size=n)) @ q.T
    return UpperHalfPoint.from_parts(symmetric_part(u), symmetric_part(v))
