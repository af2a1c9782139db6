"""Command line interface.

Exit codes: 0 success, 2 invalid input or flags, 3 I/O failure, 4 degenerate
data (for example a zero-width threshold range).
"""
from __future__ import annotations

import argparse
import itertools
import logging
import sys
from collections import OrderedDict
from pathlib import Path

import numpy as np

from . import __version__, classic
from .benchmark import delta_mos, value_disagreements
from .core import TiePolicy
from .evaluation import INDICATORS, IndicatorConfig, calibrate, evaluate_grouped, evaluate_metric
from .exceptions import DegenerateDataError, PWRCError
from .harness import (
    SplitSpec,
    load_dataset,
    make_synthetic_dataset,
    parse_grid,
    read_run_config,
    run_protocol,
    synthesize_panel,
    write_dataset,
)
from .indicator import ActivationConfig, pwrc
from .reporting import atomic_write_text, csv_text, curve_csv_text, curves_svg_text, format_value

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_DEGENERATE = 4

logger = logging.getLogger("pwrc")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _float_or_auto(text):
    if text.strip().lower() == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}") from None


def _grid(text):
    try:
        return parse_grid(text)
    except PWRCError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_data(p):
    p.add_argument("--scores", required=True, help="subjective CSV (id,score,stddev,group,polarity)")
    p.add_argument("--preds", required=True, help="prediction CSV (id,<metric>,...)")
    p.add_argument("--polarity", required=True, help="metric polarity CSV (metric,polarity)")


def _add_indicator(p):
    p.add_argument("--config", help="run-config file of key = value lines")
    p.add_argument("--c1", type=_float_or_auto, help="activation steepness or 'auto' (default 0.175)")
    p.add_argument("--tie-policy", choices=["strict", "stable"], help="tie handling (default strict)")
    p.add_argument("--uniform-weights", action="store_true", default=None, help="constant pair weights")
    p.add_argument("--constant-activation", action="store_true", default=None, help="activation fixed at 1")
    p.add_argument("--threshold", type=float, help="sensory threshold for the PWRC column (default 0)")
    p.add_argument("--tmin", type=_float_or_auto, help="AUC lower bound or 'auto'")
    p.add_argument("--tmax", type=_float_or_auto, help="AUC upper bound or 'auto'")
    p.add_argument("--samples", type=int, help="AUC quadrature samples (default 101)")
    p.add_argument("--grid", type=_grid, help="plot grid lo:hi:count (default 0:100:20)")
    p.add_argument("--raw-scale", action="store_true", default=None, help="push benchmark on raw scores")
    p.add_argument("--image-wise", action="store_true", default=None, help="average over content groups")
    p.add_argument("--porcelain", action="store_true", help="tab-separated machine-readable output")


def build_parser():
    parser = _Parser(prog="pwrc", description="Perceptually weighted rank correlation toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="verb", metavar="VERB", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("eval", help="all indicators per metric on the full dataset")
    _add_data(p)
    _add_indicator(p)

    p = sub.add_parser("curve", help="SA-ST curves as CSV and an overlay SVG")
    _add_data(p)
    _add_indicator(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--metric", action="append", help="restrict to this metric (repeatable)")

    p = sub.add_parser("auc", help="confidence-aware AUC per metric")
    _add_data(p)
    _add_indicator(p)

    p = sub.add_parser("compare", help="disagreements between indicator rankings")
    _add_data(p)
    _add_indicator(p)
    p.add_argument("--out", help="write the disagreement matrix CSV here")

    p = sub.add_parser("split-run", help="random split protocol with median aggregation")
    _add_data(p)
    _add_indicator(p)
    p.add_argument("--ratio", type=float, help="training share (default 0.8)")
    p.add_argument("--trials", type=int, help="number of random splits (default 1000)")
    p.add_argument("--seed", type=int, help="split seed (default 0)")
    p.add_argument("--unit", choices=["group", "item"], help="split unit (default group)")
    p.add_argument("--jobs", type=int, help="worker threads (default 1)")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("synth", help="synthetic experiments")
    p.add_argument("--scores", type=_float_list, help="comma-separated subjective scores")
    p.add_argument("--n", type=int, help="number of items (must match --scores)")
    p.add_argument("--enumerate-permutations", action="store_true",
                   help="tabulate indicators over every predicted ranking")
    p.add_argument("--activation", choices=["constant", "soft"], default="constant")
    p.add_argument("--c1", type=float, default=ActivationConfig().c1)
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--stddevs", type=_float_list, help="comma-separated opinion stddevs (panel mode)")
    p.add_argument("--subjects", type=int, help="simulated subjects per image (panel mode)")
    p.add_argument("--dataset", help="write a synthetic dataset (scores/predictions/polarity CSV) here")
    p.add_argument("--groups", type=int, default=30)
    p.add_argument("--per-group", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the table to this CSV instead of standard output")
    p.add_argument("--porcelain", action="store_true")
    return parser


# ----------------------------------------------------------------- helpers


def _settings(args):
    """Merge command-line flags over the optional run-config file."""
    cfg = read_run_config(args.config) if getattr(args, "config", None) else {}

    def pick(flag, key, convert, default):
        value = getattr(args, flag, None)
        if value is not None:
            return value
        if key in cfg:
            try:
                return convert(cfg[key])
            except (ValueError, argparse.ArgumentTypeError, PWRCError) as exc:
                raise PWRCError(f"{args.config}: bad value for {key}: {exc}") from None
        return default

    def as_bool(text):
        low = str(text).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {text!r}")

    def bound(value):
        return None if value == "auto" else value

    indicator = IndicatorConfig(
        c1=pick("c1", "c1", _float_or_auto, ActivationConfig().c1),
        activation="constant" if pick("constant_activation", "constant_activation", as_bool, False) else "soft",
        weights="uniform" if pick("uniform_weights", "uniform_weights", as_bool, False) else "importance",
        tie_policy=pick("tie_policy", "tie_policy", TiePolicy.parse, TiePolicy.STRICT),
        threshold=pick("threshold", "threshold", float, 0.0),
        t_min=bound(pick("tmin", "tmin", _float_or_auto, "auto")),
        t_max=bound(pick("tmax", "tmax", _float_or_auto, "auto")),
        auc_samples=pick("samples", "samples", int, 101),
        curve_grid=pick("grid", "grid", parse_grid, (0.0, 100.0, 20)),
        raw_scale=pick("raw_scale", "raw_scale", as_bool, False),
    )
    image_wise = pick("image_wise", "image_wise", as_bool, False)
    split = None
    if args.verb == "split-run":
        split = SplitSpec(
            train_ratio=pick("ratio", "ratio", float, 0.8),
            trials=pick("trials", "trials", int, 1000),
            seed=pick("seed", "seed", int, 0),
            unit=pick("unit", "unit", str, "group"),
        )
    jobs = pick("jobs", "jobs", int, 1)
    return indicator, split, image_wise, jobs


def _emit_table(header, rows, porcelain, out=None):
    if porcelain:
        text = csv_text(header, rows, delimiter="\t")
    else:
        cells = [list(header)] + [
            [f"{v:.4f}" if isinstance(v, (float, np.floating)) else format_value(v) for v in row]
            for row in rows
        ]
        widths = [max(len(r[k]) for r in cells) for k in range(len(header))]
        text = "\n".join(
            "  ".join(c.ljust(w) if k == 0 else c.rjust(w) for k, (c, w) in enumerate(zip(r, widths)))
            for r in cells
        ) + "\n"
    (out or sys.stdout).write(text)


def _evaluate_all(args, indicator, image_wise, with_curve=False):
    scores, preds = load_dataset(args.scores, args.preds, args.polarity)
    calibration = calibrate(scores, indicator)
    evaluate = evaluate_grouped if image_wise else evaluate_metric
    results = OrderedDict(
        (name, evaluate(scores, pred, calibration, indicator, with_curve=with_curve))
        for name, pred in preds.items()
    )
    return calibration, results


# ---------------------------------------------------------------- commands


def cmd_eval(args):
    indicator, _, image_wise, _ = _settings(args)
    _, results = _evaluate_all(args, indicator, image_wise)
    rows = [[m, ev.srcc, ev.krcc, ev.pwrc, ev.auc_ca, ev.dmos] for m, ev in results.items()]
    _emit_table(["metric", "SRCC", "KRCC", "PWRC", "AUCca", "dMOS"], rows, args.porcelain)
    return EXIT_OK


def cmd_curve(args):
    indicator, _, image_wise, _ = _settings(args)
    _, results = _evaluate_all(args, indicator, image_wise, with_curve=True)
    if args.metric:
        unknown = [m for m in args.metric if m not in results]
        if unknown:
            raise PWRCError(f"unknown metric(s): {unknown}")
        results = OrderedDict((m, results[m]) for m in args.metric)
    curves = OrderedDict((m, ev.curve) for m, ev in results.items())
    out = Path(args.out)
    texts = {out / f"curve_{m}.csv": curve_csv_text(c) for m, c in curves.items()}
    texts[out / "curves.svg"] = curves_svg_text(curves)
    for path, text in texts.items():
        atomic_write_text(path, text)
    rows = [[str(p)] for p in texts]
    _emit_table(["written"], rows, args.porcelain)
    return EXIT_OK


def cmd_auc(args):
    indicator, _, image_wise, _ = _settings(args)
    calibration, results = _evaluate_all(args, indicator, image_wise)
    rows = [[m, calibration.t_min, calibration.t_max, ev.auc_ca] for m, ev in results.items()]
    _emit_table(["metric", "tmin", "tmax", "AUCca"], rows, args.porcelain)
    return EXIT_OK


def _matrix(results):
    columns = OrderedDict(
        (ind, {m: ev.as_row()[ind] for m, ev in results.items()}) for ind in INDICATORS
    )
    names = list(columns)
    return names, [[a] + [value_disagreements(columns[a], columns[b]) for b in names] for a in names]


def cmd_compare(args):
    indicator, _, image_wise, _ = _settings(args)
    _, results = _evaluate_all(args, indicator, image_wise)
    names, rows = _matrix(results)
    header = ["indicator"] + names
    if args.out:
        atomic_write_text(args.out, csv_text(header, rows))
    _emit_table(header, rows, args.porcelain)
    return EXIT_OK


def cmd_split_run(args):
    indicator, split, image_wise, jobs = _settings(args)
    scores, preds = load_dataset(args.scores, args.preds, args.polarity)
    result = run_protocol(scores, preds, split, indicator, n_jobs=jobs, image_wise=image_wise)
    out = Path(args.out)
    metrics = list(result.medians)
    trial_rows = [
        [tr.trial_index, m] + [tr.per_metric[m].as_row()[c] for c in INDICATORS]
        for tr in result.trials
        for m in metrics
    ]
    median_rows = [[m] + [result.medians[m][c] for c in INDICATORS] for m in metrics]
    texts = OrderedDict()
    texts[out / "trials.csv"] = csv_text(["trial", "metric", *INDICATORS], trial_rows)
    texts[out / "medians.csv"] = csv_text(["metric", *INDICATORS], median_rows)
    texts[out / "disagreements.csv"] = csv_text(
        ["indicator", "disagreements"], list(result.disagreements.items())
    )
    for m, curve in result.curves.items():
        texts[out / f"curve_{m}.csv"] = curve_csv_text(curve)
    texts[out / "curves.svg"] = curves_svg_text(result.curves)
    for path, text in texts.items():
        atomic_write_text(path, text)
    _emit_table(["metric", *INDICATORS], median_rows, args.porcelain)
    return EXIT_OK


def _permutation_table(x, activation, c1, threshold):
    """Indicators for every predicted ranking of ``x`` (canonical order)."""
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    if np.unique(x).size != n:
        raise PWRCError("synthetic scores must be distinct")
    xhat = (x - x[0]) / (x[-1] - x[0]) * 100.0
    config = ActivationConfig(c1, activation)
    p = np.arange(1, n + 1)
    rows = []
    for perm in itertools.permutations(range(1, n + 1)):
        q = np.array(perm)
        rows.append([
            " ".join(map(str, perm)),
            classic.mistaken_pair_count(p, q),
            classic.spearman_rho(p, q),
            classic.kendall_tau(p, q),
            pwrc(xhat, p, q, threshold, config),
            delta_mos(x, q).mean,
        ])
    return ["q", "L", "SRCC", "KRCC", "PWRC", "dMOS"], rows


def cmd_synth(args):
    if args.dataset:
        scores, preds = make_synthetic_dataset(args.groups, args.per_group, seed=args.seed)
        paths = write_dataset(args.dataset, scores, preds)
        _emit_table(["written"], [[str(p)] for p in paths.values()], args.porcelain)
        return EXIT_OK
    if args.scores is None:
        raise PWRCError("synth needs --scores, or --dataset DIR")
    if args.n is not None and args.n != len(args.scores):
        raise PWRCError(f"--n {args.n} does not match {len(args.scores)} scores")
    if args.enumerate_permutations:
        if len(args.scores) > 8:
            raise PWRCError("permutation enumeration is limited to 8 items")
        header, rows = _permutation_table(args.scores, args.activation, args.c1, args.threshold)
    elif args.stddevs is not None:
        if args.subjects is None:
            raise PWRCError("panel mode needs --subjects")
        panel = synthesize_panel(args.scores, args.stddevs, args.subjects, args.seed)
        header = ["image", "true_score", "stddev", "mos", "sample_std"]
        rows = [
            [k, t, s, m, d]
            for k, (t, s, m, d) in enumerate(zip(panel.true_scores, panel.stddevs, panel.mos, panel.sample_std))
        ]
    else:
        raise PWRCError("synth needs --enumerate-permutations, --stddevs or --dataset")
    if args.out:
        atomic_write_text(args.out, csv_text(header, rows))
    else:
        _emit_table(header, rows, args.porcelain)
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "curve": cmd_curve,
    "auc": cmd_auc,
    "compare": cmd_compare,
    "split-run": cmd_split_run,
    "synth": cmd_synth,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.verb](args)
    except DegenerateDataError as exc:
        print(f"pwrc: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except PWRCError as exc:
        print(f"pwrc: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"pwrc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
