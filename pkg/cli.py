"""siegelbn command line: simulate, represent, bn, knn, verify, history."""
import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

import database
import radar_pipeline
import utils
import verification
from bn_engine import DEFAULT_FRECHET_ITERATIONS, DEFAULT_MOMENTUM, FrechetConfig
from errors import ComplexDomainError, InvalidSpecError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3

DATASET_DEFAULTS = {"classes": 5, "n": 5, "length": 50, "order": 3, "per_class": 50, "seed": 0, "size": None}
KNN_METHOD = "knn-siegel"


# Dataset generation


def load_dataset_spec(args):
    """Defaults, overridden by a --spec JSON file, overridden by explicit flags"""
    fields = dict(DATASET_DEFAULTS)
    if args.spec:
        with open(args.spec, encoding="utf-8") as handle:
            from_file = json.load(handle)
        unknown = set(from_file) - set(fields)
        if unknown:
            raise InvalidSpecError(f"unknown dataset spec fields {sorted(unknown)}")
        fields.update(from_file)
    flags = {
        "classes": args.classes,
        "n": args.dim,
        "length": args.length,
        "order": args.order,
        "per_class": args.per_class,
        "seed": args.seed,
        "size": args.size,
    }
    fields.update({key: value for key, value in flags.items() if value is not None})
    try:
        return radar_pipeline.DatasetSpec(**fields)
    except TypeError as e:
        raise InvalidSpecError(f"malformed dataset spec: {e}") from e


def cmd_simulate(args):
    spec = load_dataset_spec(args)
    series = radar_pipeline.generate_dataset(spec)
    payload = {
        "format_version": utils.FORMAT_VERSION,
        "kind": "dataset",
        "seed": spec.seed,
        "spec": dataclasses.asdict(spec),
        "series": [utils.series_to_json(s) for s in series],
    }
    _emit(args.out, utils.dumps(payload))
    print(f"Simulated {len(series)} series ({spec.classes} classes, n={spec.n}, N={spec.length})", file=sys.stderr)
    return EXIT_OK, {"series": len(series), "spec": dataclasses.asdict(spec)}, spec.seed


# Representation


def cmd_represent(args):
    data = utils.read_json(args.data, "dataset")
    order = args.order if args.order is not None else int(data["spec"]["order"])
    features = []
    valid = []
    for item in data["series"]:
        feature = radar_pipeline.represent_series(utils.series_from_json(item), order)
        features.append(feature)
        valid.append(radar_pipeline.feature_is_valid(feature))
    clamps = sum(f.clamp_count for f in features)
    payload = _features_payload(features, valid, order, data.get("seed"))
    _emit(args.out, utils.dumps(payload))
    if not all(valid):
        logger.warning("%d of %d features failed the membership scan", valid.count(False), len(valid))
    print(f"Represented {len(features)} series at order {order}; {clamps} clamp events", file=sys.stderr)
    return EXIT_OK, {"features": len(features), "order": order, "clamp_events": clamps}, data.get("seed")


def _features_payload(features, valid, order, seed):
    return {
        "format_version": utils.FORMAT_VERSION,
        "kind": "features",
        "seed": seed,
        "order": order,
        "features": [utils.feature_to_json(f, v) for f, v in zip(features, valid)],
    }


def load_features(path):
    data = utils.read_json(path, "features")
    return [utils.feature_from_json(item) for item in data["features"]], data


# Batch normalization


def cmd_bn(args):
    features, data = load_features(args.features)
    cfg = FrechetConfig(iterations=args.iters)
    if args.mode == "apply":
        if not args.state:
            raise InvalidSpecError("apply mode needs --state")
        states = utils.state_from_json(utils.read_json(args.state))
        normalized, _ = radar_pipeline.bn_normalize_features(features, states, fit=False)
    else:
        batch_size = args.batch_size or len(features)
        if batch_size < 1:
            raise InvalidSpecError(f"batch size must be >= 1, got {batch_size}")
        states = None
        normalized = []
        for start in range(0, len(features), batch_size):
            batch = features[start : start + batch_size]
            out, states = radar_pipeline.bn_normalize_features(
                batch, states, momentum=args.momentum, fit=True, cfg=cfg
            )
            normalized.extend(out)
        if args.state:
            utils.write_json_atomic(args.state, utils.state_to_json(states or []))

    valid = [radar_pipeline.feature_is_valid(f) for f in normalized]
    payload = _features_payload(normalized, valid, data.get("order"), data.get("seed"))
    _emit(args.out, utils.dumps(payload))
    print(f"Normalized {len(normalized)} features ({args.mode})", file=sys.stderr)
    return EXIT_OK, {"mode": args.mode, "features": len(normalized), "momentum": args.momentum}, data.get("seed")


# kNN evaluation


def cmd_knn(args):
    train, train_data = load_features(args.train)
    test, _ = load_features(args.test)
    if not train or not test:
        raise InvalidSpecError("kNN needs non-empty train and test feature files")
    order = train[0].order
    labels = [f.label for f in train]
    if args.permute_labels:
        labels = [int(v) for v in np.random.default_rng(args.seed).permutation(labels)]
    k = None if args.cv else args.k
    accuracy, chosen_k, predictions = verification.evaluate_knn(
        train, test, order, k=k, seed=args.seed, train_labels=labels
    )
    report = pd.DataFrame(
        [{
            "dataset": Path(args.train).stem,
            "method": KNN_METHOD,
            "k": chosen_k,
            "accuracy": accuracy,
            "seed": args.seed,
        }]
    )
    _emit(args.out, report.to_csv(index=False, float_format="%.4f"))
    if args.confusion:
        confusion = pd.crosstab(
            pd.Series([f.label for f in test], name="actual"),
            pd.Series(predictions, name="predicted"),
        )
        utils.write_text_atomic(args.confusion, confusion.to_csv())
    logger.info("kNN accuracy %.4f with k=%d", accuracy, chosen_k)
    return EXIT_OK, {"accuracy": round(accuracy, 4), "k": chosen_k, "train_seed": train_data.get("seed")}, args.seed


# Verification


def cmd_verify(args):
    try:
        report = verification.run_verification(args.suite, seed=args.seed, trials=args.trials)
    except KeyError as e:
        raise InvalidSpecError(e.args[0]) from e
    data = report.to_json()
    print(utils.export_report(data, format="text"), file=sys.stderr)
    _emit(args.out, utils.export_report(data, format=args.format))
    failed = [c.name for c in report.checks if not c.passed]
    summary = f"{len(report.checks) - len(failed)}/{len(report.checks)} checks passed"
    print(summary, file=sys.stderr)
    code = EXIT_OK if report.passed else EXIT_CHECK_FAILED
    return code, {"suites": data["config"]["suites"], "failed": failed}, args.seed


def cmd_history(args):
    if not args.ledger:
        raise InvalidSpecError("history needs --ledger")
    runs = database.get_recent_runs(args.ledger, args.limit)
    if runs.empty:
        print("No runs recorded yet.")
    else:
        print(runs.to_string(index=False))
    return EXIT_OK, None, None


# Plumbing


def _emit(out, text):
    if out:
        utils.write_text_atomic(out, text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="siegelbn", description="Batch normalization on Siegel domains and radar clutter kNN."
    )
    parser.add_argument("--ledger", help="run ledger: SQLite path or postgresql:// URL")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic AR clutter dataset")
    p.add_argument("--spec", help="JSON file with dataset spec fields")
    p.add_argument("--classes", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--length", type=int)
    p.add_argument("--order", type=int)
    p.add_argument("--per-class", type=int)
    p.add_argument("--size", type=int, help="total series, spread round-robin over classes")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("represent", help="reflection-coefficient features of a dataset")
    p.add_argument("data")
    p.add_argument("--order", type=int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_represent)

    p = sub.add_parser("bn", help="batch-normalize the Siegel disk slots of a feature file")
    p.add_argument("features")
    p.add_argument("--mode", choices=("fit", "apply"), default="fit")
    p.add_argument("--state", help="BN state file (written by fit, read by apply)")
    p.add_argument("--momentum", type=float, default=DEFAULT_MOMENTUM)
    p.add_argument("--iters", type=int, default=DEFAULT_FRECHET_ITERATIONS)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_bn)

    p = sub.add_parser("knn", help="geodesic kNN accuracy on held-out features")
    p.add_argument("train")
    p.add_argument("test")
    choice = p.add_mutually_exclusive_group()
    choice.add_argument("--k", type=int, default=1)
    choice.add_argument("--cv", action="store_true", help="choose k by 10-fold cross-validation")
    p.add_argument("--permute-labels", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--confusion", help="write per-class confusion counts as CSV")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_knn)

    p = sub.add_parser("verify", help="run the identity verification suites")
    p.add_argument("--suite", default="all", help=f"comma list of {', '.join(verification.SUITES)} or 'all'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--format", choices=("json", "csv", "text"), default="json", help="report format for stdout or --out")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("history", help="recent runs from the ledger")
    p.add_argument("--limit", type=int, default=20)
    p.set_defaults(handler=cmd_history)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    details, seed = None, getattr(args, "seed", None)
    try:
        code, details, seed = args.handler(args)
    except ComplexDomainError as e:
        print(f"Numerical domain error: {str(e)}", file=sys.stderr)
        code = EXIT_DOMAIN
        details = {"error": str(e)}
    except (InvalidSpecError, ValueError, OSError) as e:
        print(f"Error: {str(e)}", file=sys.stderr)
        code = EXIT_USAGE
        details = {"error": str(e)}

    if args.ledger and args.command != "history":
        database.log_run(args.ledger, args.command, details, code, seed)
    return code


if __name__ == "__main__":
    sys.exit(main())
