"""Synthetic radar clutter: AR simulation, reflection-coefficient
representation, projection onto Sym+_n x SD_n^(r-1), BN and geodesic kNN."""
import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from sklearn.model_selection import KFold

import siegel
from bn_engine import BNState, FrechetConfig, SiegelDiskDomain, bn_apply, bn_fit_batch
from errors import (
    ComplexDomainError,
    DegenerateSeriesError,
    InvalidSpecError,
    NotPositiveDefiniteError,
    ShapeError,
)
from linalg_core import (
    dagger,
    herm_eig,
    hermitian_part,
    hpd_inv_sqrt,
    hpd_log,
    spectral_norm,
    symmetric_part,
)
from reference_manifolds import SpdPoint

logger = logging.getLogger(__name__)

# Pipeline configuration
EIGEN_FLOOR = 1e-4
DISK_MARGIN = 1e-7
BLOCK_FLOOR = 1e-3
STABILITY_BOUND = 0.9
DEFAULT_K_GRID = (1, 3, 5, 7, 9)
DEFAULT_FOLDS = 10


@dataclass(frozen=True)
class TimeSeries:
    """N complex n-vectors u_0 ... u_(N-1), stored as an (N, n) array."""
    samples: np.ndarray
    label: int = 0

    @property
    def n(self):
        return self.samples.shape[1]

    @property
    def length(self):
        return self.samples.shape[0]


@dataclass(frozen=True)
class ARClassSpec:
    b: np.ndarray
    coeffs: tuple
    noise_cov: np.ndarray
    class_id: int = 0

    @property
    def n(self):
        return self.noise_cov.shape[0]

    @property
    def order(self):
        return len(self.coeffs)


@dataclass(frozen=True)
class ProductFeature:
    """A point (p0, w_1, ..., w_(r-1)) of Sym+_n x SD_n^(r-1)."""
    p0: SpdPoint
    w: tuple
    label: int = 0
    clamp_count: int = field(default=0, compare=False)

    @property
    def n(self):
        return self.p0.n

    @property
    def order(self):
        return len(self.w) + 1


@dataclass(frozen=True)
class DatasetSpec:
    classes: int
    per_class: int
    n: int
    length: int
    order: int
    seed: int = 0
    size: int | None = None

    def __post_init__(self):
        for name in ("classes", "per_class", "n", "length", "order"):
            if getattr(self, name) < 1:
                raise InvalidSpecError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.length < self.order:
            raise InvalidSpecError(f"length {self.length} is shorter than the order {self.order}")
        if self.size is not None and self.size < self.classes:
            raise InvalidSpecError(f"size {self.size} cannot cover {self.classes} classes")

    def class_counts(self):
        """Samples per class; a total size is spread round-robin over classes"""
        if self.size is None:
            return [self.per_class] * self.classes
        base, extra = divmod(self.size, self.classes)
        return [base + (1 if c < extra else 0) for c in range(self.classes)]

    @property
    def total(self):
        return sum(self.class_counts())


def _complex_gaussian(rng, shape):
    """Standard complex Gaussian: E[z z^H] = I"""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _psd_sqrt(a):
    """Square root of a PSD matrix, zero eigenvalues allowed"""
    eig = herm_eig(a)
    return eig.reconstruct(np.sqrt(np.clip(eig.eigenvalues, 0.0, None)))


def clamp_eigenvalues(a, floor):
    """k max(d, floor) k^(-1) for the eigendecomposition a = k d k^(-1)"""
    eig = herm_eig(a)
    clamped = np.maximum(eig.eigenvalues, floor)
    out = eig.reconstruct(clamped)
    if np.isrealobj(a):
        out = out.real
    return hermitian_part(out), int(np.sum(eig.eigenvalues < floor))


def block_toeplitz(blocks):
    """Hermitian block-Toeplitz matrix with block (i, j) = B_(i-j), B_(-k) = B_k^H"""
    r = len(blocks)
    rows = []
    for i in range(r):
        row = []
        for j in range(r):
            row.append(blocks[i - j] if i >= j else dagger(blocks[j - i]))
        rows.append(row)
    return np.block(rows)


def make_class_spec(seed, n, r, class_id=0):
    """Seeded AR recipe for one clutter class.

    B_0 is HPD, B_k for k >= 1 are scaled random blocks, and the assembled
    block-Toeplitz matrix is eigenvalue-clamped at BLOCK_FLOOR. Each c_j has
    spectral norm at most 0.5 / r.
    """
    if n < 1 or r < 1:
        raise InvalidSpecError(f"class spec needs n, r >= 1, got n={n}, r={r}")
    rng = np.random.default_rng(seed)
    g = _complex_gaussian(rng, (n, n))
    blocks = [g @ dagger(g) / n + 0.5 * np.eye(n)]
    for k in range(1, r):
        blocks.append(_complex_gaussian(rng, (n, n)) * (0.5 / (k + 1)))
    b, _ = clamp_eigenvalues(block_toeplitz(blocks), BLOCK_FLOOR)

    coeffs = []
    for _ in range(r):
        c = _complex_gaussian(rng, (n, n))
        target = (0.5 / r) * rng.uniform(0.5, 1.0)
        coeffs.append(c * (target / spectral_norm(c)))

    h = _complex_gaussian(rng, (n, n))
    noise_cov = hermitian_part(h @ dagger(h) / n + 0.1 * np.eye(n))
    return ARClassSpec(b=b, coeffs=tuple(coeffs), noise_cov=noise_cov, class_id=class_id)


def validate_class_spec(spec):
    """Raise InvalidSpecError unless b is HPD and the AR recursion is stable"""
    smallest = float(herm_eig(spec.b).eigenvalues[0])
    if smallest <= 1e-8:
        raise InvalidSpecError(f"block-Toeplitz matrix is not HPD (min eigenvalue {smallest:.3e})")
    if spec.b.shape != (spec.order * spec.n, spec.order * spec.n):
        raise InvalidSpecError(f"b has shape {spec.b.shape}, expected {spec.order * spec.n} square")
    total = sum(spectral_norm(c) for c in spec.coeffs)
    if total > STABILITY_BOUND:
        raise InvalidSpecError(f"AR coefficients have summed spectral norm {total:.3f} > {STABILITY_BOUND}")


def simulate_series(spec, length, rng, label=None):
    """First r vectors from y = b^(1/2) x, the rest from u_t = -sum c_j u_(t-j) + v_t"""
    r, n = spec.order, spec.n
    if length < r:
        raise InvalidSpecError(f"series length {length} is shorter than the order {r}")
    samples = np.zeros((length, n), dtype=np.complex128)
    head = _psd_sqrt(spec.b) @ _complex_gaussian(rng, r * n)
    samples[:r] = head.reshape(r, n)
    noise_root = _psd_sqrt(spec.noise_cov)
    for t in range(r, length):
        v = noise_root @ _complex_gaussian(rng, n)
        samples[t] = v - sum(c @ samples[t - j - 1] for j, c in enumerate(spec.coeffs))
    return TimeSeries(samples=samples, label=spec.class_id if label is None else label)


def sample_stream(seed, class_id, index):
    """Per-sample generator keyed by (dataset seed, class id, sample index)"""
    return np.random.default_rng([seed, class_id, index])


def generate_dataset(dataset_spec):
    """All series of a dataset, class by class, deterministic in the seed"""
    series = []
    for class_id, count in enumerate(dataset_spec.class_counts()):
        spec = make_class_spec([dataset_spec.seed, class_id], dataset_spec.n, dataset_spec.order, class_id)
        validate_class_spec(spec)
        for index in range(count):
            rng = sample_stream(dataset_spec.seed, class_id, index)
            series.append(simulate_series(spec, dataset_spec.length, rng))
    logger.info("simulated %d series over %d classes", len(series), dataset_spec.classes)
    return series


def _gram(a, b):
    """sum_k a_k b_k^H over rows"""
    return a.T @ b.conj()


def _finite_gram(a, b, what):
    g = _gram(a, b)
    if not np.all(np.isfinite(g)):
        raise DegenerateSeriesError(f"{what} has non-finite entries; the series overflows")
    return g


def burg_representation(series, r):
    """Reflection-coefficient representation (p0, w_1, ..., w_(r-1)).

    p0 = (1/N) sum u_k u_k^H and, for i = 1 .. r-1,
    w_i = -(R^f)^(-1/2) R^fb ((R^b)^(-1/2))^H on the forward/backward errors.
    """
    u = np.asarray(series.samples, dtype=np.complex128)
    length = u.shape[0]
    if r < 1:
        raise InvalidSpecError(f"order must be >= 1, got {r}")
    if length < r + 1:
        raise DegenerateSeriesError(f"series of length {length} is too short for order {r}")
    p0 = _finite_gram(u, u, "sample covariance") / length
    forward = u.copy()
    backward = u.copy()
    reflections = []
    for i in range(1, r):
        f = forward[i:]
        bk = backward[i - 1 : length - 1]
        try:
            rf_inv = hpd_inv_sqrt(_finite_gram(f, f, f"forward error covariance at stage {i}"))
            rb_inv = hpd_inv_sqrt(_finite_gram(bk, bk, f"backward error covariance at stage {i}"))
        except NotPositiveDefiniteError as e:
            raise DegenerateSeriesError(f"error covariance at stage {i} is singular: {e}") from e
        w = -rf_inv @ _finite_gram(f, bk, f"cross covariance at stage {i}") @ dagger(rb_inv)
        new_forward = np.zeros_like(forward)
        new_backward = np.zeros_like(backward)
        new_forward[i:] = f + bk @ w.T
        new_backward[i:] = bk + f @ w.conj()
        forward, backward = new_forward, new_backward
        reflections.append(w)
    return p0, reflections


def project_feature(p0_c, reflections, eps=EIGEN_FLOOR, margin=DISK_MARGIN, label=0):
    """Map (p0, w_i) onto Sym+_n x SD_n^(r-1).

    p0 keeps its symmetrized real part with eigenvalues floored at eps; each
    w_i is symmetrized and rescaled to norm 1 - margin when it reaches the
    boundary. The number of clamp events is recorded on the feature.
    """
    p0_real = symmetric_part(np.real(p0_c))
    p0, clamps = clamp_eigenvalues(p0_real, eps)
    disk = []
    for w in reflections:
        w = symmetric_part(np.asarray(w, dtype=np.complex128))
        norm = spectral_norm(w)
        if norm >= 1.0 - margin:
            w = w * ((1.0 - margin) / norm)
            clamps += 1
        disk.append(siegel.SiegelDiskPoint.from_matrix(w, margin=0.0))
    if clamps:
        logger.debug("projection clamped %d components", clamps)
    return ProductFeature(p0=SpdPoint.from_matrix(p0), w=tuple(disk), label=label, clamp_count=clamps)


def represent_series(series, r, eps=EIGEN_FLOOR, margin=DISK_MARGIN):
    p0, reflections = burg_representation(series, r)
    return project_feature(p0, reflections, eps, margin, label=series.label)


def to_upper_half_feature(feature):
    """Sym+_n x SH_n^(r-1) representation through the inverse Cayley transform"""
    return feature.p0, tuple(siegel.cayley_inv(w) for w in feature.w)


def feature_is_valid(feature):
    """p0 is SPD and every w_i is a symmetric matrix of spectral norm below 1"""
    try:
        SpdPoint.from_matrix(feature.p0.m)
        return all(siegel.sd_contains(w.m, margin=0.0) for w in feature.w)
    except ComplexDomainError:
        return False


# kNN


def knn_distance(a, b, r):
    """d^2 = r ||log(a0^(-1/2) b0 a0^(-1/2))||^2 + sum_j ((r-j)/4) d_SD^2(a_j, b_j)"""
    if a.n != b.n or len(a.w) != r - 1 or len(b.w) != r - 1:
        raise ShapeError(f"features do not match order {r} and dimension {a.n}")
    root = hpd_inv_sqrt(a.p0.m)
    spd_term = np.linalg.norm(hpd_log(symmetric_part(root @ b.p0.m @ root)), "fro") ** 2
    total = r * spd_term
    for j, (x, y) in enumerate(zip(a.w, b.w), start=1):
        total += (r - j) / 4.0 * siegel.sd_distance_kahler(x, y) ** 2
    return float(np.sqrt(total))


def pairwise_knn_distances(rows, cols, r, symmetric=False):
    out = np.zeros((len(rows), len(cols)))
    for i, a in enumerate(rows):
        start = i + 1 if symmetric else 0
        for j in range(start, len(cols)):
            out[i, j] = knn_distance(a, cols[j], r)
            if symmetric:
                out[j, i] = out[i, j]
    return out


def vote(distances, labels, k):
    """Majority among the k nearest; ties by smallest summed distance, then lowest label"""
    if len(labels) == 0:
        raise ShapeError("empty training set")
    if not 1 <= k <= len(labels):
        raise ValueError(f"k must lie in [1, {len(labels)}], got {k}")
    order = np.argsort(distances, kind="stable")[:k]
    counts = Counter()
    sums = Counter()
    for idx in order:
        counts[labels[idx]] += 1
        sums[labels[idx]] += float(distances[idx])
    return min(counts, key=lambda label: (-counts[label], sums[label], label))


def knn_classify(train_features, train_labels, query, k, r):
    distances = np.array([knn_distance(query, f, r) for f in train_features])
    return vote(distances, list(train_labels), k)


def select_k_by_cv(distance_matrix, labels, k_grid=DEFAULT_K_GRID, folds=DEFAULT_FOLDS, seed=0):
    """Pick k by cross-validation on a precomputed train-train distance matrix"""
    labels = list(labels)
    count = len(labels)
    folds = max(2, min(folds, count))
    splits = list(KFold(n_splits=folds, shuffle=True, random_state=seed).split(np.arange(count)))
    best_k, best_accuracy = None, -1.0
    for k in k_grid:
        correct, seen = 0, 0
        for kept, held_out in splits:
            if k > len(kept):
                break
            kept_labels = [labels[i] for i in kept]
            for i in held_out:
                predicted = vote(distance_matrix[i, kept], kept_labels, k)
                correct += predicted == labels[i]
                seen += 1
        else:
            accuracy = correct / seen
            logger.debug("cross-validated accuracy %.4f for k=%d", accuracy, k)
            if accuracy > best_accuracy:
                best_k, best_accuracy = k, accuracy
    if best_k is None:
        raise ValueError(f"no k in {tuple(k_grid)} fits a training set of {count}")
    return best_k, best_accuracy


# BN on the disk slots


def bn_normalize_features(features, states=None, momentum=None, fit=True, cfg=None):
    """Slot-wise BN on the Siegel-disk components; p0 passes through.

    Returns the normalized features and the (updated) per-slot states.
    """
    features = list(features)
    if not features:
        return features, list(states or [])
    n, slots = features[0].n, len(features[0].w)
    dom = SiegelDiskDomain(n)
    if states is None:
        states = [BNState.initial(dom, momentum if momentum is not None else 0.1) for _ in range(slots)]
    elif momentum is not None:
        states = [BNState(s.running_mean, s.bias, momentum) for s in states]
    states = list(states)
    if len(states) != slots:
        raise ShapeError(f"{len(states)} BN states for {slots} disk slots")

    columns = []
    for slot in range(slots):
        batch = [f.w[slot] for f in features]
        if fit:
            normalized, states[slot] = bn_fit_batch(dom, states[slot], batch, cfg or FrechetConfig())
        else:
            normalized = bn_apply(dom, states[slot], batch)
        columns.append(normalized)

    out = []
    for i, f in enumerate(features):
        w = tuple(columns[slot][i] for slot in range(slots))
        out.append(ProductFeature(p0=f.p0, w=w, label=f.label, clamp_count=f.clamp_count))
    return out, states
