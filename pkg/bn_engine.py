"""Batch normalization on complex domains.

A domain exposes centering (an automorphism sending a point to the identity
element), biasing (the inverse automorphism), scalar multiplication and a
distance. From those the engine builds almost geodesics, Frechet means and
the training/testing passes of the BN layer.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

import ball
import reference_manifolds as refm
import siegel
from errors import ComplexDomainError, FrechetError, ShapeError
from linalg_core import frobenius, hpd_log, spectral_norm, sym_exp

logger = logging.getLogger(__name__)

DEFAULT_MOMENTUM = 0.1
DEFAULT_FRECHET_ITERATIONS = 5


def alpha_curve(q_val, t):
    """Reparameterization solving the proportional-distance equation for seminorm q_val.

    alpha(t) = (1/q) ((1+q)^t - (1-q)^t) / ((1+q)^t + (1-q)^t)
    """
    if not 0.0 < q_val < 1.0:
        raise ValueError(f"seminorm value must lie in (0, 1), got {q_val}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"curve parameter must lie in [0, 1], got {t}")
    return siegel.geodesic_scale(q_val, t) / q_val


# Euclidean parameterizations


def sym_fill(a, n):
    """Symmetrized lower-triangular fill: (mat(a) + mat(a)^T) / 2"""
    mat = np.zeros((n, n))
    mat[np.tril_indices(n)] = a
    return (mat + mat.T) / 2


def sym_unfill(s):
    """Inverse of sym_fill on real symmetric matrices"""
    n = s.shape[0]
    lower = np.tril(np.asarray(s, dtype=np.float64)) * 2.0
    lower[np.diag_indices(n)] /= 2.0
    return lower[np.tril_indices(n)]


def triangular_size(n):
    return n * (n + 1) // 2


class NormalizedDomain(ABC):
    """Operations the BN engine needs from a domain."""

    name = "domain"
    # almost geodesics reparameterized by alpha_curve (Kobayashi-type distance)
    kobayashi = True

    @abstractmethod
    def identity(self):
        ...

    @abstractmethod
    def center(self, m, x):
        """phi_m(x)"""

    @abstractmethod
    def bias(self, g, x):
        """phi_g^(-1)(x)"""

    @abstractmethod
    def scalar_mul(self, t, x):
        ...

    @abstractmethod
    def distance(self, x, y):
        ...

    @abstractmethod
    def seminorm(self, x):
        ...

    def alpha(self, q_val, t):
        if not self.kobayashi:
            return t
        return alpha_curve(q_val, t)

    def almost_geodesic(self, x, y, t):
        return almost_geodesic(self, x, y, t)

    @abstractmethod
    def initial_params(self, points):
        ...

    @abstractmethod
    def from_params(self, params):
        ...

    def objective_gradient(self, params, points, weights):
        raise NotImplementedError(f"{self.name} has no analytic gradient")


class SiegelDiskDomain(NormalizedDomain):
    name = "siegel-disk"

    def __init__(self, n):
        self.n = n

    def identity(self):
        return siegel.SiegelDiskPoint.zero(self.n)

    def center(self, m, x):
        return siegel.sd_automorphism(m, x)

    def bias(self, g, x):
        return siegel.sd_automorphism_inv(g, x)

    def scalar_mul(self, t, x):
        return siegel.sd_scalar_mul(t, x)

    def distance(self, x, y):
        return siegel.sd_distance_kahler(x, y)

    def seminorm(self, x):
        return spectral_norm(x.m)

    def initial_params(self, points):
        # a = b = 0 maps to iI, i.e. the origin of the disk
        return np.zeros(2 * triangular_size(self.n))

    def from_params(self, params):
        k = triangular_size(self.n)
        u = sym_fill(params[:k], self.n)
        v = sym_exp(sym_fill(params[k:], self.n))
        return siegel.cayley(siegel.UpperHalfPoint.from_parts(u, v))


class UpperHalfDomain(NormalizedDomain):
    """Siegel upper half space with identity iI, centered through Sp_2n."""

    name = "siegel-upper-half"

    def __init__(self, n):
        self.n = n

    def identity(self):
        return siegel.UpperHalfPoint.identity(self.n)

    def center(self, m, x):
        g = siegel.sh_group_inverse(siegel.sh_point_to_group(m))
        return siegel.sh_action(g, x)

    def bias(self, g, x):
        return siegel.sh_action(siegel.sh_point_to_group(g), x)

    def scalar_mul(self, t, x):
        return siegel.cayley_inv(siegel.sd_scalar_mul(t, siegel.cayley(x)))

    def distance(self, x, y):
        return siegel.sh_distance(x, y)

    def seminorm(self, x):
        return spectral_norm(siegel.cayley(x).m)

    def initial_params(self, points):
        return np.zeros(2 * triangular_size(self.n))

    def from_params(self, params):
        k = triangular_size(self.n)
        u = sym_fill(params[:k], self.n)
        v = sym_exp(sym_fill(params[k:], self.n))
        return siegel.UpperHalfPoint.from_parts(u, v)


class UnitBallDomain(NormalizedDomain):
    name = "unit-ball"

    def __init__(self, n, margin=ball.BALL_MARGIN):
        self.n = n
        self.margin = margin

    def identity(self):
        return ball.BallPoint.zero(self.n)

    def center(self, m, x):
        return ball.ball_automorphism(m, x)

    def bias(self, g, x):
        return ball.ball_automorphism_inv(g, x)

    def scalar_mul(self, t, x):
        return ball.ball_scalar_mul(t, x)

    def distance(self, x, y):
        return ball.ball_distance(x, y)

    def seminorm(self, x):
        return ball.norm(x.v)

    def initial_params(self, points):
        first = points[0].v
        return np.concatenate([first.real, first.imag])

    def _vector(self, params):
        v = params[: self.n] + 1j * params[self.n:]
        length = ball.norm(v)
        if length >= 1.0 - self.margin:
            v = v * ((1.0 - self.margin) / length)
        return v

    def from_params(self, params):
        return ball.BallPoint(self._vector(params))

    def objective_gradient(self, params, points, weights):
        """Closed-form gradient of sum_j w_j d^2(x_j, z) in (Re z, Im z).

        Uses 1 - |phi_z(x)|^2 = (1-|z|^2)(1-|x|^2) / |1-<z,x>|^2. Valid
        where no renormalization into the ball was needed.
        """
        z = self._vector(params)
        grad = np.zeros(2 * self.n)
        a = 1.0 - ball.norm(z) ** 2
        grad_a = -2.0 * np.concatenate([z.real, z.imag])
        for weight, point in zip(weights, points):
            x = point.v
            b = 1.0 - ball.norm(x) ** 2
            w = 1.0 - ball.inner(z, x)
            wx = w * x
            c = abs(w) ** 2
            grad_c = np.concatenate([-2.0 * wx.real, -2.0 * wx.imag])
            s = a * b / c
            m = np.sqrt(max(1.0 - s, 0.0))
            if m < 1e-12:
                continue
            d = np.arctanh(m)
            grad_s = b * (grad_a * c - a * grad_c) / c ** 2
            grad += weight * (-(d / (m * s)) * grad_s)
        return grad


class SpdDomain(NormalizedDomain):
    name = "spd"
    kobayashi = False

    def __init__(self, n):
        self.n = n

    def identity(self):
        return refm.SpdPoint.identity(self.n)

    def center(self, m, x):
        return refm.spd_translate(m, x)

    def bias(self, g, x):
        return refm.spd_translate_inv(g, x)

    def scalar_mul(self, t, x):
        return refm.spd_scalar_mul(t, x)

    def distance(self, x, y):
        return refm.spd_distance(x, y)

    def seminorm(self, x):
        return frobenius(hpd_log(x.m))

    def initial_params(self, points):
        return sym_unfill(hpd_log(points[0].m))

    def from_params(self, params):
        return refm.SpdPoint.from_matrix(sym_exp(sym_fill(params, self.n)))


class RotationDomain(NormalizedDomain):
    name = "so3"
    kobayashi = False

    def identity(self):
        return refm.RotationPoint.identity()

    def center(self, m, x):
        return refm.so3_translate(m, x)

    def bias(self, g, x):
        return refm.so3_translate_inv(g, x)

    def scalar_mul(self, t, x):
        return refm.so3_scalar_mul(t, x)

    def distance(self, x, y):
        return refm.so3_distance(x, y)

    def seminorm(self, x):
        return float(np.sqrt(2.0) * np.linalg.norm(refm.so3_log(x)))

    def initial_params(self, points):
        return refm.so3_log(points[0])

    def from_params(self, params):
        return refm.so3_exp(params)


def almost_geodesic(dom, x, y, t):
    """phi_x^(-1)(alpha(t) (x) phi_x(y)); x for t = 0 and y for t = 1 exactly."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"curve parameter must lie in [0, 1], got {t}")
    if t == 0.0:
        return x
    if t == 1.0:
        return y
    z = dom.center(x, y)
    q = dom.seminorm(z)
    if q <= 1e-15:
        return x
    return dom.bias(x, dom.scalar_mul(dom.alpha(q, t), z))


# Frechet mean


class GradientMode(Enum):
    CENTRAL = "central-difference"
    ANALYTIC = "analytic-adjoint"


@dataclass(frozen=True)
class FrechetConfig:
    iterations: int = DEFAULT_FRECHET_ITERATIONS
    gradient_mode: GradientMode = GradientMode.CENTRAL
    fd_step: float = 1e-5
    tolerance: float = 1e-8
    # running average of squared gradients, per coordinate
    decay: float = 0.9
    epsilon: float = 1e-12
    initial_step: float = 0.5
    max_step: float = 4.0
    max_halvings: int = 40

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")


@dataclass
class FrechetResult:
    point: object
    objective_history: list = field(default_factory=list)
    gradient_norm: float = 0.0
    iterations: int = 0


def frechet_objective(dom, points, candidate, weights):
    """sum_j w_j d^2(x_j, candidate)"""
    return float(sum(w * dom.distance(x, candidate) ** 2 for w, x in zip(weights, points)))


def _objective_at(dom, points, params, weights):
    try:
        return frechet_objective(dom, points, dom.from_params(params), weights)
    except ComplexDomainError as e:
        logger.debug("objective undefined at parameters: %s", e)
        return np.inf


def parameterized_gradient(dom, points, params, cfg, weights):
    """Gradient of the parameterized Frechet objective in the configured mode"""
    if cfg.gradient_mode is GradientMode.ANALYTIC:
        return np.asarray(dom.objective_gradient(params, points, weights), dtype=np.float64)
    grad = np.empty_like(params, dtype=np.float64)
    h = cfg.fd_step
    for i in range(params.size):
        step = np.zeros_like(params)
        step[i] = h
        forward = _objective_at(dom, points, params + step, weights)
        backward = _objective_at(dom, points, params - step, weights)
        grad[i] = (forward - backward) / (2.0 * h)
    return grad


def solve_frechet_mean(dom, points, cfg=None, weights=None):
    """Minimize sum_j w_j d^2(x_j, x) over the domain's Euclidean parameterization.

    Descent direction is the gradient scaled per coordinate by a running RMS of
    past gradients. The step is halved until the objective does not increase,
    so the recorded objective history is non-increasing.
    """
    cfg = cfg or FrechetConfig()
    points = list(points)
    if not points:
        raise ShapeError("Frechet mean of an empty set")
    weights = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=np.float64)
    if weights.shape != (len(points),):
        raise ShapeError(f"{weights.shape[0]} weights for {len(points)} points")
    if len(points) == 1:
        return FrechetResult(point=points[0], objective_history=[0.0])

    params = np.asarray(dom.initial_params(points), dtype=np.float64)
    current = _objective_at(dom, points, params, weights)
    if not np.isfinite(current):
        raise FrechetError("objective is not finite at the initial iterate", dom.from_params(params), 0)
    history = [current]
    accumulator = np.zeros_like(params)
    step = cfg.initial_step
    grad_norm = np.inf
    iteration = 0
    for iteration in range(1, cfg.iterations + 1):
        grad = parameterized_gradient(dom, points, params, cfg, weights)
        if not np.all(np.isfinite(grad)):
            raise FrechetError(
                f"non-finite gradient at iteration {iteration}", dom.from_params(params), iteration
            )
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= cfg.tolerance:
            break
        accumulator = cfg.decay * accumulator + (1.0 - cfg.decay) * grad ** 2
        scale = np.sqrt(accumulator / (1.0 - cfg.decay ** iteration)) + cfg.epsilon
        direction = -grad / scale

        accepted = False
        for _ in range(cfg.max_halvings):
            trial = params + step * direction
            value = _objective_at(dom, points, trial, weights)
            if value <= current:
                accepted = True
                break
            step /= 2.0
        if not accepted:
            logger.debug("Frechet solver stalled at iteration %d (objective %.3e)", iteration, current)
            break
        params, current = trial, value
        history.append(current)
        step = min(step * 2.0, cfg.max_step)

    logger.debug(
        "Frechet mean on %s: %d iterations, objective %.6e, gradient norm %.3e",
        dom.name, iteration, current, grad_norm,
    )
    return FrechetResult(
        point=dom.from_params(params),
        objective_history=history,
        gradient_norm=grad_norm,
        iterations=iteration,
    )


def frechet_mean(dom, points, cfg=None, weights=None):
    return solve_frechet_mean(dom, points, cfg, weights).point


# BN layer


@dataclass(frozen=True)
class BNState:
    running_mean: object
    bias: object
    momentum: float = DEFAULT_MOMENTUM

    def __post_init__(self):
        if not 0.0 <= self.momentum <= 1.0:
            raise ValueError(f"momentum must lie in [0, 1], got {self.momentum}")

    @classmethod
    def initial(cls, dom, momentum=DEFAULT_MOMENTUM, bias=None):
        return cls(running_mean=dom.identity(), bias=bias if bias is not None else dom.identity(), momentum=momentum)


def bn_fit_batch(dom, state, batch, cfg=None):
    """Training pass: center on the batch mean, bias by g, move the running mean."""
    batch = list(batch)
    if not batch:
        raise ShapeError("cannot normalize an empty batch")
    batch_mean = frechet_mean(dom, batch, cfg)
    running = almost_geodesic(dom, state.running_mean, batch_mean, state.momentum)
    outputs = [dom.bias(state.bias, dom.center(batch_mean, x)) for x in batch]
    return outputs, replace(state, running_mean=running)


def bn_apply(dom, state, batch):
    """Testing pass: center on the running mean, bias by g"""
    return [dom.bias(state.bias, dom.center(state.running_mean, x)) for x in batch]
