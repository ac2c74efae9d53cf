"""Command-line front end: run propagation, evaluate results, sweep
parameters, run calibration baselines, and generate synthetic fixtures.

Exit codes: 0 success, 1 usage error, 2 data error, 3 configuration error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import calibration, evaluation, io, synthetic
from .model import (
    REJECT_CLASS,
    ConfigError,
    DataError,
    DetectionRecord,
    RunConfig,
    ValidationError,
    validate_detection_set,
)
from .propagation import run_propagation

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CONFIG = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_threshold_pair(text: str) -> tuple[str, float]:
    cls, sep, value = text.partition("=")
    if not sep or not cls:
        raise argparse.ArgumentTypeError(
            f"expected CLASS=VALUE, got {text!r}"
        )
    try:
        return cls, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold value in {text!r}")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--detections", required=True, help="detections JSON file")
    p.add_argument("--features", required=True, help="feature file (binary or text)")
    p.add_argument("--k", type=int, default=25,
                   help="clusters per class for representative selection (default 25)")
    p.add_argument("--hf-threshold", action="append", default=[],
                   type=_parse_threshold_pair, metavar="CLASS=VAL",
                   help="per-class seed confidence threshold (repeatable)")
    p.add_argument("--hf-threshold-default", type=float, default=0.5,
                   help="seed threshold for classes without an explicit one "
                        "(default 0.50)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--normalize-features", action="store_true",
                   help="L2-normalize features before distance computations "
                        "(artifact convention, off by default)")
    p.add_argument("--reject-below", type=float, default=None,
                   help="route boxes below this confidence into a reject class "
                        "(artifact convention, off by default)")
    p.add_argument("--verbose", action="store_true", help="print per-round progress")


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        hf_thresholds=dict(args.hf_threshold),
        hf_threshold_default=args.hf_threshold_default,
        k=args.k,
        rng_seed=args.seed,
        feature_normalize=args.normalize_features,
        reject_below=args.reject_below,
    )


def _load_run_inputs(args) -> tuple[list[DetectionRecord], object]:
    records = io.load_detections(args.detections)
    features = io.load_features(args.features)
    report = validate_detection_set(records, features)
    if not report.ok:
        raise ValidationError(report)
    return records, features


def cmd_run(args) -> int:
    records, features = _load_run_inputs(args)
    config = _config_from_args(args)

    def on_round(log, pool):
        if args.verbose:
            print(f"round {log.round_index} [{log.stage}]: "
                  f"candidates={log.num_candidates} "
                  f"representatives={log.num_representatives} "
                  f"accepted={log.accepted}")

    pool, audit = run_propagation(records, features, config, on_round=on_round)
    io.write_results(records, pool, args.output)
    if args.audit_out:
        io.write_audit(audit, args.audit_out)
    if args.verbose:
        print(f"wrote {len(records)} boxes to {args.output}")
    return EXIT_OK


def _eval_results(results, gts, iou_threshold, audit=None):
    preds = [(r, r.final_class) for r in results if r.final_class != REJECT_CLASS]
    match = evaluation.match_to_ground_truth(preds, gts, iou_threshold)
    stage_errors = None
    if audit is not None:
        stage_errors = evaluation.stage_error_rates(audit, match.verdicts)
    return match, stage_errors


def cmd_eval(args) -> int:
    results = io.read_results(args.results)
    gts = io.load_ground_truth(args.ground_truth)
    audit = io.read_audit(args.audit) if args.audit else None
    match, stage_errors = _eval_results(results, gts, args.iou, audit)
    print(evaluation.metrics_report(match, stage_errors))
    return EXIT_OK


def _run_and_score(records, features, config, gts, iou_threshold) -> tuple:
    pool, audit = run_propagation(records, features, config)
    final = {}
    for cls, members in pool.confirmed.items():
        for box_id in members:
            final[box_id] = cls
    preds = [(rec, final[rec.box_id]) for rec in records
             if final[rec.box_id] != REJECT_CLASS]
    match = evaluation.match_to_ground_truth(preds, gts, iou_threshold)
    return match, audit


def cmd_sweep(args) -> int:
    records, features = _load_run_inputs(args)
    gts = io.load_ground_truth(args.ground_truth)
    rows = []
    for raw in args.values.split(","):
        raw = raw.strip()
        if not raw:
            continue
        config = _config_from_args(args)
        if args.parameter == "k":
            value: float | int = int(raw)
            config.k = value
        else:
            value = float(raw)
            config.hf_threshold_default = value
            config.hf_thresholds = {}
        match, _ = _run_and_score(records, features, config, gts, args.iou)
        _, _, f = evaluation.precision_recall_f(match.tp, match.fp, match.fn)
        rows.append((value, match.tp, match.fp, match.fn, 100.0 * f))
    name = args.parameter
    print(f"{name:>12}  {'tp':>6} {'fp':>6} {'fn':>6}  {'f_score':>8}")
    for value, tp, fp, fn, f in rows:
        print(f"{value!s:>12}  {tp:>6} {fp:>6} {fn:>6}  {f:>7.2f}%")
    return EXIT_OK


def _split_images(image_ids: list[str], split: float, seed: int) -> tuple[set, set]:
    """Deterministic image-level split: first ``split`` fraction fits the
    calibrator, the rest evaluates."""
    ordered = sorted(set(image_ids))
    rng = np.random.default_rng(np.random.Philox(seed))
    perm = rng.permutation(len(ordered))
    n_fit = int(round(split * len(ordered)))
    fit = {ordered[i] for i in perm[:n_fit]}
    rest = {ordered[i] for i in perm[n_fit:]}
    return fit, rest


def cmd_baseline(args) -> int:
    records = io.load_detections(args.detections)
    gts = io.load_ground_truth(args.ground_truth)
    fit_images, eval_images = _split_images(
        [r.image_id for r in records], args.split, args.seed
    )
    eval_records = [r for r in records if r.image_id in eval_images]
    eval_gts = [g for g in gts if g.image_id in eval_images]

    if args.method == "threshold":
        kept = calibration.threshold_filter(eval_records, args.threshold)
    else:
        if not fit_images:
            raise ConfigError(
                "calibrator baselines need a nonzero --split to fit on"
            )
        fit_records = [r for r in records if r.image_id in fit_images]
        fit_gts = [g for g in gts if g.image_id in fit_images]
        fit_match = evaluation.match_to_ground_truth(
            [(r, r.class_label) for r in fit_records], fit_gts, args.iou
        )
        scores = [r.confidence for r in fit_records]
        correct = [fit_match.verdicts[r.box_id] == "tp" for r in fit_records]
        if args.method == "hb":
            model = calibration.fit_histogram_binning(scores, correct, args.bins)
        elif args.method == "platt":
            model = calibration.fit_platt(scores, correct)
        else:
            model = calibration.fit_beta(scores, correct)
        calibrated = model.apply([r.confidence for r in eval_records])
        kept = [r for r, s in zip(eval_records, calibrated) if s > args.threshold]
        if args.verbose:
            print(f"fitted {model.kind} on {len(fit_records)} boxes "
                  f"from {len(fit_images)} images: {model.dumps()}")

    match = evaluation.match_to_ground_truth(
        [(r, r.class_label) for r in kept], eval_gts, args.iou
    )
    print(evaluation.metrics_report(match))
    return EXIT_OK


def cmd_gen_fixture(args) -> int:
    means = synthetic.line_means(args.num_classes, args.separation, args.dim)
    inst = synthetic.generate_cluster_instance(
        num_classes=args.num_classes,
        seeds_per_class=args.seeds_per_class,
        candidates_per_class=args.candidates_per_class,
        cluster_means=means,
        cluster_stddev=args.stddev,
        hf_threshold=args.hf_threshold,
        label_scramble_rate=args.scramble,
        rng_seed=args.seed,
        num_images=args.num_images,
    )
    import os

    os.makedirs(args.out_dir, exist_ok=True)
    io.write_detections(inst.records, os.path.join(args.out_dir, "detections.json"))
    io.write_features_binary(inst.features, os.path.join(args.out_dir, "features.tsbf"))
    io.write_ground_truth(inst.ground_truth,
                          os.path.join(args.out_dir, "ground_truth.json"))
    io.dump_json(inst.oracle_labels, os.path.join(args.out_dir, "oracle_labels.json"))
    print(f"wrote fixture ({len(inst.records)} boxes, dim {args.dim}) to {args.out_dir}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="boxprop",
                     description="Label propagation for detection boxes via exact "
                                 "min-cost matching, plus evaluation and baselines.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="propagate labels and write results",
                           parents=[], description=cmd_run.__doc__)
    _add_run_flags(p_run)
    p_run.add_argument("--output", required=True, help="results JSON path")
    p_run.add_argument("--audit-out", default=None, help="audit JSON path")
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser("eval", help="score a results file against ground truth")
    p_eval.add_argument("--results", required=True)
    p_eval.add_argument("--ground-truth", required=True)
    p_eval.add_argument("--audit", default=None,
                        help="audit JSON; adds per-stage error rates")
    p_eval.add_argument("--iou", type=float, default=0.5,
                        help="IoU matching threshold (default 0.5, artifact convention)")
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="run + eval over a parameter grid")
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--ground-truth", required=True)
    p_sweep.add_argument("--parameter", required=True, choices=["hf-threshold", "k"])
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated list, e.g. 15,20,25,30")
    p_sweep.add_argument("--iou", type=float, default=0.5)
    p_sweep.set_defaults(func=cmd_sweep)

    p_base = sub.add_parser("baseline",
                            help="threshold or calibration baseline with an "
                                 "image-level fit/eval split")
    p_base.add_argument("--method", required=True,
                        choices=["threshold", "hb", "platt", "beta"])
    p_base.add_argument("--detections", required=True)
    p_base.add_argument("--ground-truth", required=True)
    p_base.add_argument("--split", type=float, default=0.2,
                        help="fraction of images used to fit calibrators "
                             "(default 0.2)")
    p_base.add_argument("--threshold", type=float, default=0.5,
                        help="score cut after calibration (default 0.50)")
    p_base.add_argument("--bins", type=int, default=calibration.DEFAULT_BINS,
                        help="histogram-binning bin count (default 10, "
                             "artifact convention)")
    p_base.add_argument("--iou", type=float, default=0.5)
    p_base.add_argument("--seed", type=int, default=0, help="split RNG seed")
    p_base.add_argument("--verbose", action="store_true")
    p_base.set_defaults(func=cmd_baseline)

    p_gen = sub.add_parser("gen-fixture", help="write a synthetic instance")
    p_gen.add_argument("--out-dir", required=True)
    p_gen.add_argument("--num-classes", type=int, default=2)
    p_gen.add_argument("--seeds-per-class", type=int, default=20)
    p_gen.add_argument("--candidates-per-class", type=int, default=200)
    p_gen.add_argument("--separation", type=float, default=10.0,
                       help="distance between adjacent cluster means")
    p_gen.add_argument("--stddev", type=float, default=1.0)
    p_gen.add_argument("--dim", type=int, default=8)
    p_gen.add_argument("--scramble", type=float, default=0.0,
                       help="fraction of candidates with scrambled predicted labels")
    p_gen.add_argument("--hf-threshold", type=float, default=0.5,
                       help="confidence anchor separating seeds from candidates")
    p_gen.add_argument("--num-images", type=int, default=1)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.set_defaults(func=cmd_gen_fixture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"boxprop: invalid data:\n{exc.report.format()}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"boxprop: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"boxprop: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_DATA
    except ConfigError as exc:
        print(f"boxprop: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
