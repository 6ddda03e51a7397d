"""Executable verification suites for the closed-form identities.

Each suite draws random instances from a seeded generator and returns one
CheckResult per property, carrying the worst measured error and the
tolerance it was held to.
"""
import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

import ball
import bn_engine
import linalg_core
import radar_pipeline
import reference_manifolds as refm
import siegel
from errors import ComplexDomainError

logger = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    status: str
    measured: float
    tolerance: float
    detail: str = ""

    @classmethod
    def at_most(cls, name, measured, tolerance, detail=""):
        """Pass when the measured error is finite and does not exceed the tolerance"""
        measured = float(measured)
        ok = math.isfinite(measured) and measured <= tolerance
        return cls(name, "pass" if ok else "fail", measured, tolerance, detail)

    @classmethod
    def at_least(cls, name, measured, threshold, detail=""):
        measured = float(measured)
        ok = math.isfinite(measured) and measured >= threshold
        return cls(name, "pass" if ok else "fail", measured, threshold, detail)

    @property
    def passed(self):
        return self.status == "pass"


@dataclass
class RunReport:
    command: str
    config: dict
    seed: int
    checks: list = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_json(self):
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "passed": self.passed,
            "wall_clock": round(self.wall_clock, 3),
            "checks": [asdict(c) for c in self.checks],
        }


REPORT_FIELDS = {
    "command": str,
    "config": dict,
    "seed": int,
    "passed": bool,
    "wall_clock": (int, float),
    "checks": list,
}
CHECK_FIELDS = {
    "name": str,
    "status": str,
    "measured": (int, float),
    "tolerance": (int, float),
    "detail": str,
}


def validate_report(data):
    """Return the list of schema violations of a report JSON object (empty if valid)"""
    problems = []
    for key, kind in REPORT_FIELDS.items():
        if key not in data:
            problems.append(f"missing field {key!r}")
        elif not isinstance(data[key], kind):
            problems.append(f"field {key!r} has type {type(data[key]).__name__}")
    for i, check in enumerate(data.get("checks", [])):
        for key, kind in CHECK_FIELDS.items():
            if key not in check or not isinstance(check[key], kind):
                problems.append(f"check {i} field {key!r} missing or mistyped")
        if check.get("status") not in ("pass", "fail"):
            problems.append(f"check {i} has status {check.get('status')!r}")
    return problems


def _relative(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _guarded(name, tolerance, compute):
    """Run one check; domain failures become a failed check with infinite error"""
    try:
        return compute()
    except ComplexDomainError as e:
        logger.warning("check %s raised: %s", name, e)
        return CheckResult(name, "fail", math.inf, tolerance, detail=str(e))


# Suites


def suite_linalg(rng, trials):
    def sqrt_compose():
        worst = 0.0
        for _ in range(trials):
            n = int(rng.integers(1, 9))
            g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            a = g @ g.conj().T + 0.1 * np.eye(n)
            root = linalg_core.hpd_sqrt(a)
            worst = max(worst, linalg_core.frobenius(root @ root - a) / linalg_core.frobenius(a))
        return CheckResult.at_most("hpd sqrt squared reproduces input", worst, 1e-9)

    def unitary_invariance():
        worst = 0.0
        for _ in range(trials):
            n = int(rng.integers(1, 6))
            a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            u, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
            v, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
            base = linalg_core.spectral_norm(a)
            worst = max(worst, _relative(linalg_core.spectral_norm(u @ a @ v), base))
        return CheckResult.at_most("spectral norm is unitarily invariant", worst, 1e-10)

    def gram_eigenvalues():
        worst = 0.0
        for _ in range(trials):
            n = int(rng.integers(1, 6))
            a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            eig = linalg_core.herm_eig(a.conj().T @ a).eigenvalues[::-1]
            sv = np.linalg.svd(a, compute_uv=False)
            worst = max(worst, float(np.max(np.abs(eig - sv ** 2))) / (1.0 + sv[0] ** 2))
        return CheckResult.at_most("Gram eigenvalues are squared singular values", worst, 1e-9)

    return [
        _guarded("hpd sqrt squared reproduces input", 1e-9, sqrt_compose),
        _guarded("spectral norm is unitarily invariant", 1e-10, unitary_invariance),
        _guarded("Gram eigenvalues are squared singular values", 1e-9, gram_eigenvalues),
    ]


def suite_siegel_distances(rng, trials):
    def equivalence():
        worst = 0.0
        for n in (1, 2, 3):
            for _ in range(trials):
                x = siegel.random_disk_point(rng, n)
                y = siegel.random_disk_point(rng, n)
                d = siegel.sd_distance_kahler(x, y)
                worst = max(
                    worst,
                    _relative(siegel.sd_distance_kahler_alt(x, y), d),
                    _relative(siegel.sd_distance_naive(x, y), d),
                )
        return CheckResult.at_most("three Kahler distance formulas agree", worst, 1e-8)

    def scalar_values():
        zero = siegel.SiegelDiskPoint.zero(1)
        half = siegel.SiegelDiskPoint.from_matrix([[0.5]])
        disk = abs(siegel.sd_distance_kahler(zero, half) ** 2 - math.log(3.0) ** 2)
        upper = abs(
            siegel.sh_distance(
                siegel.UpperHalfPoint.from_parts([[0.0]], [[1.0]]),
                siegel.UpperHalfPoint.from_parts([[0.0]], [[2.0]]),
            )
            - math.log(2.0)
        )
        return CheckResult.at_most("d_SD^2(0, 0.5) = log^2 3 and d_SH(i, 2i) = log 2", max(disk, upper), 1e-10)

    def kobayashi_scalar():
        worst = 0.0
        for _ in range(trials):
            x = siegel.random_disk_point(rng, 1)
            y = siegel.random_disk_point(rng, 1)
            worst = max(
                worst,
                abs(siegel.sd_distance_kobayashi(x, y) - 0.5 * siegel.sd_distance_kahler(x, y)),
            )
        return CheckResult.at_most("n=1 Kobayashi distance is half the Kahler distance", worst, 1e-10)

    return [
        _guarded("three Kahler distance formulas agree", 1e-8, equivalence),
        _guarded("d_SD^2(0, 0.5) = log^2 3 and d_SH(i, 2i) = log 2", 1e-10, scalar_values),
        _guarded("n=1 Kobayashi distance is half the Kahler distance", 1e-10, kobayashi_scalar),
    ]


def suite_isometry(rng, trials):
    def disk(distance, label):
        def run():
            worst = 0.0
            for n in (1, 2, 3):
                for _ in range(trials):
                    x, y, z = (siegel.random_disk_point(rng, n) for _ in range(3))
                    before = distance(x, y)
                    after = distance(siegel.sd_automorphism(z, x), siegel.sd_automorphism(z, y))
                    worst = max(worst, _relative(after, before))
            return CheckResult.at_most(label, worst, 1e-8)
        return run

    def unit_ball():
        worst = 0.0
        for n in (1, 2, 8):
            for _ in range(trials):
                x, y, z = (ball.random_ball_point(rng, n) for _ in range(3))
                before = ball.ball_distance(x, y)
                after = ball.ball_distance(ball.ball_automorphism(z, x), ball.ball_automorphism(z, y))
                worst = max(worst, _relative(after, before))
        return CheckResult.at_most("ball automorphisms are isometries", worst, 1e-10)

    kahler = "Siegel disk automorphisms preserve the Kahler distance"
    kobayashi = "Siegel disk automorphisms preserve the Kobayashi distance"
    return [
        _guarded(kahler, 1e-8, disk(lambda a, b: siegel.sd_distance_kahler(a, b), kahler)),
        _guarded(kobayashi, 1e-8, disk(lambda a, b: siegel.sd_distance_kobayashi(a, b), kobayashi)),
        _guarded("ball automorphisms are isometries", 1e-10, unit_ball),
    ]


def suite_automorphisms(rng, trials):
    def disk_roundtrip():
        worst = 0.0
        for n in (1, 2, 3):
            for _ in range(trials):
                x = siegel.random_disk_point(rng, n)
                y = siegel.random_disk_point(rng, n)
                back = siegel.sd_automorphism_inv(x, siegel.sd_automorphism(x, y))
                worst = max(worst, linalg_core.frobenius(back.m - y.m))
        return CheckResult.at_most("Siegel disk inverse automorphism roundtrip", worst, 1e-9)

    def ball_roundtrip():
        worst = 0.0
        symmetric = 0.0
        for n in (1, 2, 4, 8):
            for _ in range(trials):
                x = ball.random_ball_point(rng, n)
                y = ball.random_ball_point(rng, n)
                back = ball.ball_automorphism_inv(x, ball.ball_automorphism(x, y))
                worst = max(worst, ball.norm(back.v - y.v))
                symmetric = max(
                    symmetric,
                    abs(ball.norm(ball.ball_automorphism(x, y).v) - ball.norm(ball.ball_automorphism(y, x).v)),
                )
        return CheckResult.at_most("ball inverse automorphism roundtrip and |phi_x(y)| = |phi_y(x)|",
                                   max(worst, symmetric), 1e-10)

    def push_through():
        worst = 0.0
        for n in (1, 2, 3):
            for _ in range(trials):
                worst = max(worst, siegel.lemma_push_through_residual(siegel.random_disk_point(rng, n)))
        return CheckResult.at_most("(I-xx^H)^(-1) x = x (I-x^H x)^(-1)", worst, 1e-10)

    def complement():
        worst = 0.0
        for n in (2, 3):
            for _ in range(trials):
                x = siegel.random_disk_point(rng, n)
                y = siegel.random_disk_point(rng, n)
                worst = max(worst, siegel.lemma_complement_residual(x, y))
        return CheckResult.at_most("I - phi_x(y) phi_x(y)^H complement identity", worst, 1e-9)

    return [
        _guarded("Siegel disk inverse automorphism roundtrip", 1e-9, disk_roundtrip),
        _guarded("ball inverse automorphism roundtrip and |phi_x(y)| = |phi_y(x)|", 1e-10, ball_roundtrip),
        _guarded("(I-xx^H)^(-1) x = x (I-x^H x)^(-1)", 1e-10, push_through),
        _guarded("I - phi_x(y) phi_x(y)^H complement identity", 1e-9, complement),
    ]


def _proportional_distance_error(dom, x, y, distance_from_identity):
    """Worst |d(0, alpha(t) (x) phi_x(y)) - t d(0, phi_x(y))| over t in {1/4, 1/2, 3/4}"""
    z = dom.center(x, y)
    q = dom.seminorm(z)
    full = distance_from_identity(z)
    worst = 0.0
    for t in (0.25, 0.5, 0.75):
        moved = dom.scalar_mul(dom.alpha(q, t), z)
        worst = max(worst, abs(distance_from_identity(moved) - t * full) / max(1.0, full))
    return worst


def suite_almost_geodesics(rng, trials):
    pairs = max(1, trials // 2)

    def disk():
        worst, endpoints, delegate = 0.0, 0.0, 0.0
        for n in (1, 2, 3):
            dom = bn_engine.SiegelDiskDomain(n)
            origin = dom.identity()
            for _ in range(pairs):
                x = siegel.random_disk_point(rng, n)
                y = siegel.random_disk_point(rng, n)
                worst = max(worst, _proportional_distance_error(
                    dom, x, y, lambda p: siegel.sd_distance_kobayashi(origin, p)))
                endpoints = max(
                    endpoints,
                    linalg_core.frobenius(bn_engine.almost_geodesic(dom, x, y, 0.0).m - x.m),
                    linalg_core.frobenius(bn_engine.almost_geodesic(dom, x, y, 1.0).m - y.m),
                )
                delegate = max(delegate, linalg_core.frobenius(
                    bn_engine.almost_geodesic(dom, x, y, 0.3).m - siegel.sd_almost_geodesic(x, y, 0.3).m))
        return [
            CheckResult.at_most("Siegel disk proportional-distance equation", worst, 1e-8),
            CheckResult.at_most("Siegel disk almost geodesic endpoints", endpoints, 1e-10),
            CheckResult.at_most("generic almost geodesic matches the Siegel closed form", delegate, 1e-10),
        ]

    def unit_ball():
        worst, endpoints = 0.0, 0.0
        for n in (1, 2, 8):
            dom = bn_engine.UnitBallDomain(n)
            origin = dom.identity()
            for _ in range(pairs):
                x = ball.random_ball_point(rng, n)
                y = ball.random_ball_point(rng, n)
                worst = max(worst, _proportional_distance_error(
                    dom, x, y, lambda p: ball.ball_distance(origin, p)))
                endpoints = max(
                    endpoints,
                    ball.norm(ball.ball_almost_geodesic(x, y, 0.0).v - x.v),
                    ball.norm(ball.ball_almost_geodesic(x, y, 1.0).v - y.v),
                )
        return [
            CheckResult.at_most("unit ball proportional-distance equation", worst, 1e-8),
            CheckResult.at_most("unit ball almost geodesic endpoints", endpoints, 1e-10),
        ]

    results = []
    for name, run in (("Siegel disk almost geodesics", disk), ("unit ball almost geodesics", unit_ball)):
        try:
            results.extend(run())
        except ComplexDomainError as e:
            results.append(CheckResult(name, "fail", math.inf, 1e-8, detail=str(e)))
    return results


def suite_cayley(rng, trials):
    pairs = max(1, trials // 2)

    def isometry():
        worst = 0.0
        for n in (1, 2):
            for _ in range(pairs):
                x = siegel.random_upper_half_point(rng, n)
                y = siegel.random_upper_half_point(rng, n)
                d = siegel.sh_distance(x, y)
                worst = max(worst, _relative(siegel.sd_distance_kahler(siegel.cayley(x), siegel.cayley(y)), d))
        return CheckResult.at_most("Cayley transform is an isometry", worst, 1e-8)

    def roundtrip():
        worst = 0.0
        for n in (1, 2):
            for _ in range(pairs):
                x = siegel.random_upper_half_point(rng, n)
                back = siegel.cayley_inv(siegel.cayley(x))
                worst = max(worst, linalg_core.frobenius(back.z - x.z))
        return CheckResult.at_most("inverse Cayley transform roundtrip", worst, 1e-9)

    def symplectic():
        worst, recovered = 0.0, 0.0
        for n in (1, 2):
            identity = siegel.UpperHalfPoint.identity(n)
            for _ in range(pairs):
                x, y, h = (siegel.random_upper_half_point(rng, n) for _ in range(3))
                g = siegel.sh_point_to_group(h)
                recovered = max(recovered, linalg_core.frobenius(siegel.sh_action(g, identity).z - h.z))
                d = siegel.sh_distance(x, y)
                worst = max(worst, _relative(siegel.sh_distance(siegel.sh_action(g, x), siegel.sh_action(g, y)), d))
        return [
            CheckResult.at_most("symplectic action preserves the upper half space distance", worst, 1e-8),
            CheckResult.at_most("point-to-group element sends iI to the point", recovered, 1e-9),
        ]

    results = [
        _guarded("Cayley transform is an isometry", 1e-8, isometry),
        _guarded("inverse Cayley transform roundtrip", 1e-9, roundtrip),
    ]
    try:
        results.extend(symplectic())
    except ComplexDomainError as e:
        results.append(CheckResult("symplectic action", "fail", math.inf, 1e-8, detail=str(e)))
    return results


def suite_reference(rng, trials):
    pairs = max(1, trials // 2)

    def spd():
        dom = bn_engine.SpdDomain(3)
        worst, alpha = 0.0, 0.0
        origin = dom.identity()
        for _ in range(pairs):
            x = refm.random_spd(rng, 3)
            y = refm.random_spd(rng, 3)
            root = linalg_core.hpd_sqrt(x.m)
            inv_root = linalg_core.hpd_inv_sqrt(x.m)
            for t in (0.25, 0.5, 0.75):
                expected = root @ linalg_core.hpd_pow(inv_root @ y.m @ inv_root, t) @ root
                worst = max(worst, linalg_core.frobenius(bn_engine.almost_geodesic(dom, x, y, t).m - expected))
            alpha = max(alpha, _proportional_distance_error(dom, x, y, lambda p: refm.spd_distance(origin, p)))
        return [
            CheckResult.at_most("SPD almost geodesic is the affine-invariant geodesic", worst, 1e-9),
            CheckResult.at_most("SPD proportional-distance equation solved by alpha(t) = t", alpha, 1e-10),
        ]

    def rotations():
        dom = bn_engine.RotationDomain()
        worst, alpha = 0.0, 0.0
        origin = dom.identity()
        for _ in range(pairs):
            x = refm.random_rotation(rng)
            y = refm.random_rotation(rng)
            for t in (0.25, 0.5, 0.75):
                expected = x.r @ refm.so3_exp(t * refm.so3_log(refm.RotationPoint(x.r.T @ y.r))).r
                worst = max(worst, linalg_core.frobenius(bn_engine.almost_geodesic(dom, x, y, t).r - expected))
            alpha = max(alpha, _proportional_distance_error(dom, x, y, lambda p: refm.so3_distance(origin, p)))
        return [
            CheckResult.at_most("SO(3) almost geodesic is x exp(t log(x^T y))", worst, 1e-9),
            CheckResult.at_most("SO(3) proportional-distance equation solved by alpha(t) = t", alpha, 1e-10),
        ]

    results = []
    for name, run in (("SPD reference", spd), ("SO(3) reference", rotations)):
        try:
            results.extend(run())
        except ComplexDomainError as e:
            results.append(CheckResult(name, "fail", math.inf, 1e-9, detail=str(e)))
    return results


def suite_poincare(rng, trials):
    def grid():
        radii = np.linspace(0.0, 0.9, 10)
        angles = np.linspace(0.0, 2.0 * np.pi, 5, endpoint=False)
        points = [r * np.exp(1j * a) for r in radii for a in angles]
        worst = 0.0
        for a in points:
            for b in points:
                via_ball = ball.ball_distance(ball.BallPoint(np.array([a])), ball.BallPoint(np.array([b])))
                worst = max(worst, abs(via_ball - ball.poincare_distance(a, b)))
        return CheckResult.at_most("n=1 ball distance equals the Poincare distance (50 x 50 grid)", worst, 1e-12)

    return [_guarded("n=1 ball distance equals the Poincare distance (50 x 50 grid)", 1e-12, grid)]


def suite_frechet(rng, trials):
    precise = bn_engine.FrechetConfig(iterations=500)

    def symmetric_pair():
        dom = bn_engine.SiegelDiskDomain(1)
        points = [siegel.SiegelDiskPoint.from_matrix([[0.5]]), siegel.SiegelDiskPoint.from_matrix([[-0.5]])]
        result = bn_engine.solve_frechet_mean(dom, points, precise)
        return CheckResult.at_most("mean of {+0.5, -0.5} is the origin", linalg_core.spectral_norm(result.point.m), 1e-3)

    def geodesic_midpoint():
        dom = bn_engine.SiegelDiskDomain(1)
        points = [siegel.SiegelDiskPoint.zero(1), siegel.SiegelDiskPoint.from_matrix([[0.5]])]
        mean = bn_engine.frechet_mean(dom, points, precise)
        expected = (math.sqrt(3.0) - 1.0) / (math.sqrt(3.0) + 1.0)
        return CheckResult.at_most("mean of {0, 0.5} is the geodesic midpoint", abs(mean.m[0, 0] - expected), 1e-3)

    def centering_law():
        dom = bn_engine.SiegelDiskDomain(2)
        cfg = bn_engine.FrechetConfig(iterations=300)
        batch = [siegel.random_disk_point(rng, 2, max_norm=0.5) for _ in range(10)]
        first = bn_engine.solve_frechet_mean(dom, batch, cfg)
        centered = [dom.center(first.point, x) for x in batch]
        second = bn_engine.solve_frechet_mean(dom, centered, cfg)
        histories = first.objective_history + second.objective_history
        increase = max(
            max(np.diff(first.objective_history), default=0.0),
            max(np.diff(second.objective_history), default=0.0),
        )
        return [
            CheckResult.at_most("re-estimated mean of a centered batch is the origin",
                                dom.distance(dom.identity(), second.point), 1e-3),
            CheckResult.at_most("Frechet objective is non-increasing", max(increase, 0.0), 0.0,
                                detail=f"{len(histories)} iterates"),
        ]

    results = [
        _guarded("mean of {+0.5, -0.5} is the origin", 1e-3, symmetric_pair),
        _guarded("mean of {0, 0.5} is the geodesic midpoint", 1e-3, geodesic_midpoint),
    ]
    try:
        results.extend(centering_law())
    except ComplexDomainError as e:
        results.append(CheckResult("Frechet centering law", "fail", math.inf, 1e-3, detail=str(e)))
    return results


def suite_bn(rng, trials):
    def run():
        dom = bn_engine.SiegelDiskDomain(2)
        batch = [siegel.random_disk_point(rng, 2, max_norm=0.6) for _ in range(4)]
        start = siegel.random_disk_point(rng, 2, max_norm=0.6)
        batch_mean = bn_engine.frechet_mean(dom, batch)

        _, full = bn_engine.bn_fit_batch(dom, bn_engine.BNState(start, dom.identity(), 1.0), batch)
        _, frozen = bn_engine.bn_fit_batch(dom, bn_engine.BNState(start, dom.identity(), 0.0), batch)
        single = batch[0]
        outputs, _ = bn_engine.bn_fit_batch(dom, bn_engine.BNState.initial(dom), [single])
        fitted, state = bn_engine.bn_fit_batch(dom, bn_engine.BNState(start, dom.identity(), 1.0), batch)
        applied = bn_engine.bn_apply(dom, state, batch)
        return [
            CheckResult.at_most("momentum 1 sets the running mean to the batch mean",
                                linalg_core.frobenius(full.running_mean.m - batch_mean.m), 0.0),
            CheckResult.at_most("momentum 0 leaves the running mean unchanged",
                                linalg_core.frobenius(frozen.running_mean.m - start.m), 0.0),
            CheckResult.at_most("single-point batch maps to the identity element",
                                linalg_core.frobenius(outputs[0].m), 0.0),
            CheckResult.at_most("fit then apply agree at momentum 1",
                                max(linalg_core.frobenius(a.m - b.m) for a, b in zip(fitted, applied)), 0.0),
        ]

    try:
        return run()
    except ComplexDomainError as e:
        return [CheckResult("BN algorithm", "fail", math.inf, 0.0, detail=str(e))]


def suite_burg(rng, trials):
    def scalar_example():
        series = radar_pipeline.TimeSeries(samples=np.array([[1.0], [0.5], [0.5]], dtype=np.complex128))
        p0, reflections = radar_pipeline.burg_representation(series, 2)
        return [
            CheckResult.at_most("reflection example p0 = 0.5", abs(p0[0, 0] - 0.5), 1e-12),
            CheckResult.at_most("reflection example w1 = -0.948683",
                                abs(reflections[0][0, 0] - (-0.75 / math.sqrt(0.625))), 1e-6),
        ]

    def projection_fuzz():
        bad = 0
        for _ in range(trials):
            n = int(rng.integers(1, 4))
            r = int(rng.integers(1, 4))
            length = int(rng.integers(r + 2, 40))
            samples = radar_pipeline._complex_gaussian(rng, (length, n))
            feature = radar_pipeline.represent_series(radar_pipeline.TimeSeries(samples), r)
            bad += not radar_pipeline.feature_is_valid(feature)
        return CheckResult.at_most("projected representations satisfy the product invariants", bad, 0)

    try:
        return scalar_example() + [projection_fuzz()]
    except ComplexDomainError as e:
        return [CheckResult("reflection recursion", "fail", math.inf, 1e-6, detail=str(e))]


def suite_knn(rng, trials):
    def scalar():
        a = radar_pipeline.ProductFeature(
            p0=refm.SpdPoint.from_matrix([[1.0]]), w=(siegel.SiegelDiskPoint.zero(1),))
        b = radar_pipeline.ProductFeature(
            p0=refm.SpdPoint.from_matrix([[4.0]]), w=(siegel.SiegelDiskPoint.zero(1),))
        expected = math.sqrt(2.0) * math.log(4.0)
        return CheckResult.at_most("kNN distance of (1, 0) and (4, 0) at order 2",
                                   abs(radar_pipeline.knn_distance(a, b, 2) - expected), 1e-9)

    return [_guarded("kNN distance of (1, 0) and (4, 0) at order 2", 1e-9, scalar)]


def evaluate_knn(train, test, r, k=None, k_grid=radar_pipeline.DEFAULT_K_GRID, seed=0, train_labels=None):
    """Accuracy of geodesic kNN on a held-out set; k by 10-fold CV when not given"""
    labels = [f.label for f in train] if train_labels is None else list(train_labels)
    if k is None:
        gram = radar_pipeline.pairwise_knn_distances(train, train, r, symmetric=True)
        k, _ = radar_pipeline.select_k_by_cv(gram, labels, k_grid, seed=seed)
    cross = radar_pipeline.pairwise_knn_distances(test, train, r)
    predictions = [radar_pipeline.vote(cross[i], labels, k) for i in range(len(test))]
    accuracy = float(np.mean([p == f.label for p, f in zip(predictions, test)]))
    return accuracy, k, predictions


def suite_end_to_end(rng, trials, seed=0):
    def run():
        spec = radar_pipeline.DatasetSpec(classes=5, per_class=50, n=5, length=50, order=3, seed=seed)
        series = radar_pipeline.generate_dataset(spec)
        features = [radar_pipeline.represent_series(s, spec.order) for s in series]
        train = [f for i, f in enumerate(features) if i % spec.per_class < 40]
        test = [f for i, f in enumerate(features) if i % spec.per_class >= 40]
        accuracy, k, _ = evaluate_knn(train, test, spec.order, seed=seed)
        permuted = list(np.random.default_rng(seed).permutation([f.label for f in train]))
        chance_accuracy, _, _ = evaluate_knn(train, test, spec.order, k=k, train_labels=permuted)
        chance = 1.0 / spec.classes
        sigma = math.sqrt(chance * (1.0 - chance) / len(test))
        return [
            CheckResult.at_least("end-to-end kNN accuracy is at least twice chance", accuracy, 2.0 * chance,
                                 detail=f"k={k}"),
            CheckResult.at_most("label-permuted kNN accuracy is within 3 sigma of chance",
                                abs(chance_accuracy - chance), 3.0 * sigma),
        ]

    try:
        return run()
    except ComplexDomainError as e:
        return [CheckResult("end-to-end pipeline", "fail", math.inf, 0.0, detail=str(e))]


SUITES = {
    "linalg": suite_linalg,
    "siegel-distances": suite_siegel_distances,
    "isometry": suite_isometry,
    "automorphisms": suite_automorphisms,
    "almost-geodesics": suite_almost_geodesics,
    "cayley": suite_cayley,
    "reference": suite_reference,
    "poincare": suite_poincare,
    "frechet": suite_frechet,
    "bn": suite_bn,
    "burg": suite_burg,
    "knn": suite_knn,
    "end-to-end": suite_end_to_end,
}


def resolve_suites(selector):
    if selector in (None, "", "all"):
        return list(SUITES)
    names = [name.strip() for name in selector.split(",") if name.strip()]
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)} or 'all'")
    return names


def run_verification(selector="all", seed=0, trials=100):
    names = resolve_suites(selector)
    report = RunReport(command="verify", config={"suites": names, "trials": trials}, seed=seed)
    started = time.perf_counter()
    for index, name in enumerate(SUITES):
        if name not in names:
            continue
        rng = np.random.default_rng([seed, index])
        logger.info("running suite %s", name)
        if name == "end-to-end":
            report.checks.extend(suite_end_to_end(rng, trials, seed=seed))
        else:
            report.checks.extend(SUITES[name](rng, trials))
    report.wall_clock = time.perf_counter() - started
    return report
