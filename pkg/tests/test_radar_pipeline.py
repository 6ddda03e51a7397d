import math

import numpy as np
import pytest

import radar_pipeline as rp
import siegel
from errors import DegenerateSeriesError, InvalidSpecError, ShapeError
from reference_manifolds import SpdPoint


def series(values, label=0):
    return rp.TimeSeries(samples=np.asarray(values, dtype=np.complex128).reshape(len(values), -1), label=label)


def feature(p0, w, label=0):
    return rp.ProductFeature(
        p0=SpdPoint.from_matrix([[p0]]), w=(siegel.SiegelDiskPoint.from_matrix([[w]]),), label=label
    )


def test_dataset_spec_validation():
    with pytest.raises(InvalidSpecError):
        rp.DatasetSpec(classes=0, per_class=5, n=2, length=10, order=2)
    with pytest.raises(InvalidSpecError):
        rp.DatasetSpec(classes=2, per_class=5, n=2, length=2, order=3)
    with pytest.raises(InvalidSpecError):
        rp.DatasetSpec(classes=4, per_class=5, n=2, length=10, order=2, size=3)


def test_total_size_spread_over_classes():
    spec = rp.DatasetSpec(classes=20, per_class=1, n=30, length=50, order=3, size=950)
    counts = spec.class_counts()
    assert spec.total == 950
    assert set(counts) == {47, 48}
    assert counts[:10] == [48] * 10


def test_class_spec_is_seeded_and_valid():
    first = rp.make_class_spec([7, 1], n=3, r=3)
    again = rp.make_class_spec([7, 1], n=3, r=3)
    np.testing.assert_array_equal(first.b, again.b)
    rp.validate_class_spec(first)
    assert first.b.shape == (9, 9)
    assert sum(np.linalg.norm(c, 2) for c in first.coeffs) <= 0.5 + 1e-12
    np.testing.assert_allclose(first.b, first.b.conj().T)


def test_block_toeplitz_layout():
    b0, b1 = np.eye(2), np.array([[0.0, 1j], [0.0, 0.0]])
    t = rp.block_toeplitz([b0, b1])
    np.testing.assert_array_equal(t[2:, :2], b1)
    np.testing.assert_array_equal(t[:2, 2:], b1.conj().T)


def test_generate_dataset_counts_and_determinism():
    spec = rp.DatasetSpec(classes=3, per_class=4, n=2, length=20, order=2, seed=7)
    first = rp.generate_dataset(spec)
    second = rp.generate_dataset(spec)
    assert len(first) == 12
    assert [s.label for s in first] == [0] * 4 + [1] * 4 + [2] * 4
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.samples, b.samples)
    assert first[0].samples.shape == (20, 2)


def test_reflection_example():
    p0, reflections = rp.burg_representation(series([1.0, 0.5, 0.5]), 2)
    assert p0[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert reflections[0][0, 0].real == pytest.approx(-0.948683, abs=1e-6)


def test_degenerate_series():
    with pytest.raises(DegenerateSeriesError):
        rp.burg_representation(series([1.0, 2.0]), 2)
    with pytest.raises(DegenerateSeriesError):
        rp.burg_representation(series([0.0] * 6), 2)


def test_geometric_series_is_clamped_into_the_disk():
    result = rp.represent_series(series([0.5 ** k for k in range(10)]), 2)
    assert result.clamp_count > 0
    assert rp.feature_is_valid(result)
    assert np.linalg.norm(result.w[0].m, 2) < 1.0


def test_represented_dataset_is_valid():
    spec = rp.DatasetSpec(classes=2, per_class=5, n=3, length=30, order=3, seed=1)
    features = [rp.represent_series(s, spec.order) for s in rp.generate_dataset(spec)]
    assert all(rp.feature_is_valid(f) for f in features)
    assert all(f.order == 3 and f.n == 3 for f in features)
    p0, slots = rp.to_upper_half_feature(features[0])
    assert len(slots) == 2
    np.testing.assert_allclose(siegel.cayley(slots[0]).m, features[0].w[0].m, atol=1e-9)


def test_knn_distance():
    a, b = feature(1.0, 0.0), feature(4.0, 0.0)
    assert rp.knn_distance(a, b, 2) == pytest.approx(math.sqrt(2.0) * math.log(4.0), abs=1e-9)
    c = feature(2.0, 0.3)
    assert rp.knn_distance(a, c, 2) == pytest.approx(rp.knn_distance(c, a, 2), rel=1e-10)
    assert rp.knn_distance(c, c, 2) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ShapeError):
        rp.knn_distance(a, b, 3)


def test_pairwise_distances():
    rows = [feature(1.0, 0.0), feature(2.0, 0.1), feature(3.0, -0.2)]
    gram = rp.pairwise_knn_distances(rows, rows, 2, symmetric=True)
    np.testing.assert_allclose(gram, gram.T)
    assert gram[0, 2] == pytest.approx(rp.knn_distance(rows[0], rows[2], 2))
    np.testing.assert_array_equal(np.diag(gram), 0.0)


def test_vote_tie_breaking():
    assert rp.vote(np.array([1.0, 1.0, 2.0, 2.0]), [0, 1, 0, 1], 2) == 0
    assert rp.vote(np.array([0.5, 3.0, 1.0, 1.0]), [0, 0, 1, 1], 4) == 1
    assert rp.vote(np.array([1.0, 2.0, 1.5]), [1, 0, 0], 3) == 0
    with pytest.raises(ValueError):
        rp.vote(np.array([1.0]), [0], 2)


def test_separable_clusters_classify_perfectly(rng):
    train = [feature(1.0 + 0.1 * rng.random(), 0.1 * rng.random(), 0) for _ in range(10)]
    train += [feature(20.0 + rng.random(), 0.5 + 0.1 * rng.random(), 1) for _ in range(10)]
    labels = [f.label for f in train]
    queries = [feature(1.05, 0.05, 0), feature(20.5, 0.55, 1)]
    for k in (1, 3, 5):
        assert [rp.knn_classify(train, labels, q, k, 2) for q in queries] == [0, 1]
    gram = rp.pairwise_knn_distances(train, train, 2, symmetric=True)
    best_k, accuracy = rp.select_k_by_cv(gram, labels, seed=3)
    assert best_k in rp.DEFAULT_K_GRID
    assert accuracy == 1.0
    assert rp.select_k_by_cv(gram, labels, seed=3) == (best_k, accuracy)


def test_bn_on_disk_slots():
    features = [feature(1.0, 0.2), feature(2.0, -0.1), feature(3.0, 0.4)]
    out, states = rp.bn_normalize_features(features, momentum=1.0)
    assert len(states) == 1
    assert all(a.p0 is b.p0 for a, b in zip(out, features))
    applied, _ = rp.bn_normalize_features(features, states, fit=False)
    for a, b in zip(out, applied):
        np.testing.assert_array_equal(a.w[0].m, b.w[0].m)

    single, _ = rp.bn_normalize_features([feature(1.0, 0.7)])
    np.testing.assert_array_equal(single[0].w[0].m, 0.0)
    with pytest.raises(ShapeError):
        rp.bn_normalize_features(features, states * 2)


def white_noise_spec(n, r, noise_scale=1.0):
    zeros = tuple(np.zeros((n, n), dtype=np.complex128) for _ in range(r))
    return rp.ARClassSpec(b=np.eye(r * n), coeffs=zeros, noise_cov=noise_scale * np.eye(n))


def test_white_noise_covariance_is_identity():
    length = 10_000
    s = rp.simulate_series(white_noise_spec(2, 2), length, np.random.default_rng(11))
    u = s.samples
    covariance = u.T @ u.conj() / length
    assert np.max(np.abs(covariance - np.eye(2))) <= 3.0 / math.sqrt(length)


def test_zero_noise_without_coefficients_is_silent_after_warmup():
    s = rp.simulate_series(white_noise_spec(2, 3, noise_scale=0.0), 20, np.random.default_rng(2))
    assert np.any(s.samples[:3] != 0.0)
    np.testing.assert_array_equal(s.samples[3:], 0.0)


def test_white_noise_has_small_reflections():
    s = rp.simulate_series(white_noise_spec(2, 3), 10_000, np.random.default_rng(5))
    _, reflections = rp.burg_representation(s, 3)
    assert len(reflections) == 2
    for w in reflections:
        assert np.linalg.norm(w, 2) <= 0.05


def test_overflowing_series_is_degenerate():
    huge = series([1e200 * (-1) ** k for k in range(10)])
    with pytest.raises(DegenerateSeriesError):
        rp.burg_representation(huge, 2)
