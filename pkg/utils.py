import json
import os
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd

import siegel
from bn_engine import BNState
from radar_pipeline import ProductFeature, TimeSeries
from reference_manifolds import SpdPoint

FORMAT_VERSION = 1


def encode_matrix(a):
    """Complex matrix as a row-major array of rows of [re, im] pairs"""
    a = np.asarray(a, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def decode_matrix(rows):
    data = np.asarray(rows, dtype=np.float64)
    if data.ndim != 3 or data.shape[-1] != 2:
        raise ValueError(f"expected rows of [re, im] pairs, got shape {data.shape}")
    return data[..., 0] + 1j * data[..., 1]


def series_to_json(series):
    return {"label": int(series.label), "samples": encode_matrix(series.samples)}


def series_from_json(data):
    return TimeSeries(samples=decode_matrix(data["samples"]), label=int(data["label"]))


def feature_to_json(feature, valid=True):
    return {
        "label": int(feature.label),
        "p0": encode_matrix(feature.p0.m),
        "w": [encode_matrix(w.m) for w in feature.w],
        "valid": bool(valid),
        "clamp_count": int(feature.clamp_count),
    }


def feature_from_json(data):
    p0 = SpdPoint.from_matrix(decode_matrix(data["p0"]).real)
    w = tuple(siegel.SiegelDiskPoint.from_matrix(decode_matrix(m), margin=0.0) for m in data["w"])
    return ProductFeature(p0=p0, w=w, label=int(data["label"]), clamp_count=int(data.get("clamp_count", 0)))


def state_to_json(states):
    momentum = states[0].momentum if states else None
    return {
        "format_version": FORMAT_VERSION,
        "kind": "bn-state",
        "momentum": momentum,
        "slots": [
            {"running_mean": encode_matrix(s.running_mean.m), "bias": encode_matrix(s.bias.m)}
            for s in states
        ],
    }


def state_from_json(data):
    check_format(data, "bn-state")
    states = []
    for slot in data["slots"]:
        running = siegel.SiegelDiskPoint.from_matrix(decode_matrix(slot["running_mean"]), margin=0.0)
        bias = siegel.SiegelDiskPoint.from_matrix(decode_matrix(slot["bias"]), margin=0.0)
        states.append(BNState(running_mean=running, bias=bias, momentum=float(data["momentum"])))
    return states


def check_format(data, kind):
    """Validate the format-version and kind fields of a loaded file"""
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {version!r} (expected {FORMAT_VERSION})")
    if data.get("kind") != kind:
        raise ValueError(f"expected a {kind} file, got {data.get('kind')!r}")
    return data


def dumps(payload):
    """Compact JSON; NaN and infinities are not valid in the data files"""
    return json.dumps(payload, separators=(",", ":"), allow_nan=False)


def write_text_atomic(path, text):
    """Write the whole file to a temporary sibling, then rename over the target"""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path, payload):
    write_text_atomic(path, dumps(payload))


def read_json(path, kind=None):
    with open(path, encoding="utf-8") as handle:
        data = json.load(handle)
    if kind is not None:
        check_format(data, kind)
    return data


def format_check_line(check):
    """One human-readable line per verification check"""
    status = "PASS" if check["status"] == "pass" else "FAIL"
    return (
        f"[{status}] {check['name']}: measured {check['measured']:.3e} "
        f"(tolerance {check['tolerance']:.1e})"
    )


def export_report(report, format="json"):
    """Export a run report in various formats"""
    if format == "json":
        return json.dumps(report, indent=2, default=str)
    elif format == "csv":
        # one row per check, run-level fields repeated
        rows = []
        for check in report.get("checks", []):
            row = {key: value for key, value in report.items() if not isinstance(value, (dict, list))}
            row.update(check)
            rows.append(row)
        df = pd.DataFrame(rows)
        return df.to_csv(index=False)
    else:
        return "\n".join(format_check_line(c) for c in report.get("checks", []))
