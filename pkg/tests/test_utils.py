import json

import numpy as np
import pytest

import siegel
import utils
from bn_engine import BNState, SiegelDiskDomain
from radar_pipeline import ProductFeature, TimeSeries
from reference_manifolds import SpdPoint


def test_matrix_encoding():
    a = np.array([[1 + 2j, 0.5], [-1j, 3.0]])
    encoded = utils.encode_matrix(a)
    assert encoded[0][0] == [1.0, 2.0]
    assert encoded[1][0] == [0.0, -1.0]
    np.testing.assert_array_equal(utils.decode_matrix(encoded), a)
    with pytest.raises(ValueError):
        utils.decode_matrix([[1.0, 2.0]])


def test_series_and_feature_json():
    ts = TimeSeries(samples=np.array([[1 + 1j, 2.0], [0.5j, -1.0]]), label=3)
    back = utils.series_from_json(json.loads(utils.dumps(utils.series_to_json(ts))))
    assert back.label == 3
    np.testing.assert_array_equal(back.samples, ts.samples)

    feature = ProductFeature(
        p0=SpdPoint.from_matrix([[2.0, 0.1], [0.1, 1.0]]),
        w=(siegel.SiegelDiskPoint.from_matrix([[0.1j, 0.2], [0.2, -0.3]]),),
        label=1,
        clamp_count=2,
    )
    data = json.loads(utils.dumps(utils.feature_to_json(feature, valid=True)))
    assert data["valid"] is True
    restored = utils.feature_from_json(data)
    assert restored.label == 1 and restored.clamp_count == 2
    np.testing.assert_array_equal(restored.p0.m, feature.p0.m)
    np.testing.assert_array_equal(restored.w[0].m, feature.w[0].m)


def test_state_json():
    dom = SiegelDiskDomain(1)
    states = [BNState(siegel.SiegelDiskPoint.from_matrix([[0.25]]), dom.identity(), 0.3)]
    data = json.loads(utils.dumps(utils.state_to_json(states)))
    assert data["kind"] == "bn-state" and data["format_version"] == utils.FORMAT_VERSION
    restored = utils.state_from_json(data)
    assert restored[0].momentum == 0.3
    np.testing.assert_array_equal(restored[0].running_mean.m, states[0].running_mean.m)


def test_format_checks():
    with pytest.raises(ValueError, match="format version"):
        utils.check_format({"format_version": 99, "kind": "dataset"}, "dataset")
    with pytest.raises(ValueError, match="expected a features file"):
        utils.check_format({"format_version": utils.FORMAT_VERSION, "kind": "dataset"}, "features")


def test_atomic_write(tmp_path):
    target = tmp_path / "out.json"
    utils.write_json_atomic(target, {"format_version": utils.FORMAT_VERSION, "kind": "dataset"})
    utils.write_json_atomic(target, {"format_version": utils.FORMAT_VERSION, "kind": "features"})
    assert utils.read_json(target, "features")["kind"] == "features"
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]


def test_export_report():
    report = {
        "command": "verify",
        "seed": 0,
        "passed": False,
        "config": {"suites": ["burg"]},
        "checks": [
            {"name": "a", "status": "pass", "measured": 1e-13, "tolerance": 1e-12, "detail": ""},
            {"name": "b", "status": "fail", "measured": 0.5, "tolerance": 1e-3, "detail": ""},
        ],
    }
    lines = utils.export_report(report, format="text").splitlines()
    assert lines[0].startswith("[PASS] a")
    assert lines[1] == "[FAIL] b: measured 5.000e-01 (tolerance 1.0e-03)"
    csv = utils.export_report(report, format="csv").splitlines()
    assert len(csv) == 3
    assert "name" in csv[0] and "command" in csv[0]
    assert json.loads(utils.export_report(report))["passed"] is False


def test_dumps_refuses_non_finite_numbers():
    with pytest.raises(ValueError):
        utils.dumps({"p0": [[[float("nan"), 0.0]]]})
    with pytest.raises(ValueError):
        utils.dumps({"w": float("inf")})
