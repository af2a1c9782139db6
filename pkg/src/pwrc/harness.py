"""Dataset ingestion, random split protocol and synthetic data.

Splits use numpy's PCG64 generator seeded with ``SeedSequence(seed,
spawn_key=(trial,))``.  Each trial's stream depends only on the run seed and
the trial index, so trials can run in any order or in parallel and still
reproduce the same partitions on every platform numpy supports.
"""
from __future__ import annotations

import csv
import logging
import math
import warnings
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .benchmark import value_disagreements
from .core import PredictionPolarity, PredictionSet, ScorePolarity, ScoreSet
from .evaluation import (
    INDICATORS,
    Calibration,
    IndicatorConfig,
    calibrate,
    evaluate_grouped,
    evaluate_metric,
)
from .exceptions import AlignmentError, DegenerateDataError, ValidationError
from .indicator import SaStCurve

__all__ = [
    "SplitUnit",
    "SplitSpec",
    "Split",
    "TrialResult",
    "ProtocolResult",
    "SyntheticPanel",
    "SkippedTrialWarning",
    "load_dataset",
    "load_scores",
    "load_predictions",
    "load_polarity_map",
    "generate_splits",
    "run_protocol",
    "synthesize_panel",
    "make_synthetic_dataset",
    "write_dataset",
    "read_run_config",
    "parse_grid",
    "trial_rng",
]

logger = logging.getLogger(__name__)

SCORE_COLUMNS = ("id", "score", "stddev", "group", "polarity")


class SkippedTrialWarning(RuntimeWarning):
    """A split left fewer than two test items and was not evaluated."""


class SplitUnit(str, Enum):
    BY_GROUP = "group"
    BY_ITEM = "item"


@dataclass(frozen=True)
class SplitSpec:
    train_ratio: float = 0.8
    trials: int = 1000
    seed: int = 0
    unit: SplitUnit = SplitUnit.BY_GROUP

    def __post_init__(self):
        object.__setattr__(self, "unit", SplitUnit(self.unit))
        if not 0.0 < self.train_ratio < 1.0:
            raise ValidationError(f"train_ratio must lie in (0, 1), got {self.train_ratio}")
        if int(self.trials) < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "seed", int(self.seed))


class Split(tuple):
    """``(train, test)`` tuple of group ids."""

    __slots__ = ()

    def __new__(cls, train, test):
        return super().__new__(cls, (tuple(train), tuple(test)))

    @property
    def train(self):
        return self[0]

    @property
    def test(self):
        return self[1]


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    per_metric: dict


@dataclass(frozen=True)
class ProtocolResult:
    trials: list
    medians: dict
    disagreements: dict
    calibration: Calibration
    skipped: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)

    @property
    def effective_trials(self):
        return len(self.trials)


@dataclass(frozen=True)
class SyntheticPanel:
    """Simulated subjects' opinion scores, one row per image."""

    true_scores: np.ndarray
    stddevs: np.ndarray
    drawn_opinions: np.ndarray

    @property
    def mos(self):
        return self.drawn_opinions.mean(axis=1)

    @property
    def sample_std(self):
        ddof = 1 if self.drawn_opinions.shape[1] > 1 else 0
        return self.drawn_opinions.std(axis=1, ddof=ddof)


# ---------------------------------------------------------------- ingestion


def _read_rows(path):
    path = Path(path)
    with open(path, newline="", encoding="utf-8-sig") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    return path, header, rows[1:]


def _number(path, line, column, text):
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(f"{path}: row {line}, column {column!r}: not a number: {text!r}") from None
    if not math.isfinite(value):
        raise ValidationError(f"{path}: row {line}, column {column!r}: non-finite value {text!r}")
    return value


def load_scores(path) -> ScoreSet:
    """Read the ``id,score,stddev,group,polarity`` subjective CSV."""
    path, header, rows = _read_rows(path)
    if tuple(header) != SCORE_COLUMNS:
        raise ValidationError(f"{path}: header must be {','.join(SCORE_COLUMNS)}, got {','.join(header)}")
    ids, scores, stddevs, groups = [], [], [], []
    polarity = None
    seen = {}
    for k, row in enumerate(rows, start=2):
        if len(row) != len(SCORE_COLUMNS):
            raise ValidationError(f"{path}: row {k}: expected {len(SCORE_COLUMNS)} cells, got {len(row)}")
        rid, score, sd, group, pol = (c.strip() for c in row)
        if rid in seen:
            raise ValidationError(f"{path}: row {k}: duplicate id {rid!r} (first on row {seen[rid]})")
        seen[rid] = k
        try:
            pol = ScorePolarity.parse(pol)
        except ValidationError as exc:
            raise ValidationError(f"{path}: row {k}, column 'polarity': {exc}") from None
        if polarity is None:
            polarity = pol
        elif pol is not polarity:
            raise ValidationError(f"{path}: row {k}: polarity {pol.value} differs from {polarity.value}")
        sd_value = _number(path, k, "stddev", sd)
        if sd_value < 0:
            raise ValidationError(f"{path}: row {k}, column 'stddev': negative value {sd!r}")
        ids.append(rid)
        scores.append(_number(path, k, "score", score))
        stddevs.append(sd_value)
        groups.append(group)
    if not ids:
        raise ValidationError(f"{path}: no data rows")
    return ScoreSet(ids, scores, stddevs, groups, polarity)


def load_polarity_map(path) -> dict:
    """Read the ``metric,polarity`` sidecar."""
    path, header, rows = _read_rows(path)
    if header != ["metric", "polarity"]:
        raise ValidationError(f"{path}: header must be metric,polarity, got {','.join(header)}")
    out = OrderedDict()
    for k, row in enumerate(rows, start=2):
        if len(row) != 2:
            raise ValidationError(f"{path}: row {k}: expected 2 cells, got {len(row)}")
        name, pol = (c.strip() for c in row)
        if name in out:
            raise ValidationError(f"{path}: row {k}: duplicate metric {name!r}")
        try:
            out[name] = PredictionPolarity.parse(pol)
        except ValidationError as exc:
            raise ValidationError(f"{path}: row {k}, column 'polarity': {exc}") from None
    return out


def load_predictions(path, scores: ScoreSet, polarity: Mapping[str, PredictionPolarity]) -> dict:
    """Read an ``id,<metric>,...`` table and align it to ``scores``."""
    path, header, rows = _read_rows(path)
    if len(header) < 2 or header[0] != "id":
        raise ValidationError(f"{path}: header must start with 'id' followed by metric names")
    metrics = header[1:]
    if len(set(metrics)) != len(metrics):
        raise ValidationError(f"{path}: duplicate metric columns")
    missing_pol = [m for m in metrics if m not in polarity]
    if missing_pol:
        raise ValidationError(f"{path}: no polarity declared for metrics {missing_pol}")
    known = set(scores.ids)
    values = {}
    for k, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ValidationError(f"{path}: row {k}: expected {len(header)} cells, got {len(row)}")
        rid = row[0].strip()
        if rid in values:
            raise ValidationError(f"{path}: row {k}: duplicate id {rid!r}")
        if rid not in known:
            raise AlignmentError(f"{path}: row {k}: id {rid!r} has no subjective score")
        values[rid] = [_number(path, k, m, c.strip()) for m, c in zip(metrics, row[1:])]
    missing = [i for i in scores.ids if i not in values]
    if missing:
        raise AlignmentError(f"{path}: missing predictions for id(s) {missing[:10]}")
    table = np.array([values[i] for i in scores.ids])
    return OrderedDict(
        (m, PredictionSet(scores.ids, table[:, j], polarity[m], m)) for j, m in enumerate(metrics)
    )


def load_dataset(subjective_csv, predictions_csv, polarity_csv):
    """Load scores and predictions; rows follow the subjective file's order.

    Returns
    -------
    (ScoreSet, dict of metric name -> PredictionSet)
    """
    scores = load_scores(subjective_csv)
    polarity = load_polarity_map(polarity_csv)
    return scores, load_predictions(predictions_csv, scores, polarity)


# ------------------------------------------------------------------- splits


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(trial),))))


def _unique(seq):
    return list(OrderedDict.fromkeys(seq))


def train_count(n_units: int, ratio: float) -> int:
    """``round(ratio * n)`` (halves up) clamped to ``[1, n - 1]``."""
    return min(max(int(math.floor(ratio * n_units + 0.5)), 1), n_units - 1)


def generate_splits(groups: Sequence[str], spec: SplitSpec) -> list:
    """Disjoint train/test partitions of the distinct ``groups``, one per trial.

    Both partitions list ids in their first-appearance order.
    """
    units = _unique(str(g) for g in groups)
    n = len(units)
    if n < 2:
        raise ValidationError(f"need at least 2 split units, got {n}")
    k = train_count(n, spec.train_ratio)
    splits = []
    for t in range(spec.trials):
        perm = trial_rng(spec.seed, t).permutation(n)
        train_idx = np.sort(perm[:k])
        test_idx = np.sort(perm[k:])
        splits.append(Split([units[i] for i in train_idx], [units[i] for i in test_idx]))
    return splits


# ----------------------------------------------------------------- protocol


def _select(prediction: PredictionSet, ids):
    pos = {i: k for k, i in enumerate(prediction.ids)}
    try:
        idx = [pos[i] for i in ids]
    except KeyError as exc:
        raise AlignmentError(f"prediction {prediction.name!r} has no value for id {exc.args[0]!r}") from None
    return prediction.take(idx)


def _run_trial(t, split, scores, predictions, calibration, config, unit, image_wise, with_curves):
    test = set(split.test)
    keys = scores.groups if unit is SplitUnit.BY_GROUP else scores.ids
    idx = [k for k, g in enumerate(keys) if g in test]
    if len(idx) < 2:
        return t, None
    sub = scores.take(idx)
    evaluate = evaluate_grouped if image_wise else evaluate_metric
    per = OrderedDict()
    for name, pred in predictions.items():
        per[name] = evaluate(sub, _select(pred, sub.ids), calibration, config, with_curve=with_curves)
    return t, TrialResult(t, per)


def run_protocol(
    scores: ScoreSet,
    predictions,
    spec: SplitSpec = SplitSpec(),
    config: IndicatorConfig = IndicatorConfig(),
    n_jobs: int = 1,
    trial_predictions: Optional[Sequence[Mapping[str, PredictionSet]]] = None,
    image_wise: bool = False,
    with_curves: bool = True,
) -> ProtocolResult:
    """Evaluate every metric on the test partition of each random split.

    Normalization constants, activation steepness and the AUC range are
    fitted once on the whole database.  Medians are taken per indicator over
    the evaluated trials; each indicator's metric ordering is then compared
    with the ordering by median push benchmark.

    Parameters
    ----------
    scores : ScoreSet
        Whole database.
    predictions : mapping of metric name -> PredictionSet
        One global prediction table, evaluated on each trial's test items.
    spec : SplitSpec
    config : IndicatorConfig
    n_jobs : int
        Worker threads; results do not depend on it.
    trial_predictions : sequence of mappings, optional
        Per-trial predictions for metrics retrained on each split.  Entry
        ``t`` replaces ``predictions`` for trial ``t``.
    image_wise : bool
        Average indicators over content groups inside each test partition.
    with_curves : bool
        Also collect median SA-ST curves on the plotting grid.
    """
    if trial_predictions is not None and len(trial_predictions) < spec.trials:
        raise ValidationError(
            f"{len(trial_predictions)} per-trial prediction tables for {spec.trials} trials"
        )
    if not predictions and trial_predictions is None:
        raise ValidationError("no metrics to evaluate")
    calibration = calibrate(scores, config)
    units = scores.groups if spec.unit is SplitUnit.BY_GROUP else scores.ids
    splits = generate_splits(units, spec)

    def job(t):
        preds = trial_predictions[t] if trial_predictions is not None else predictions
        return _run_trial(t, splits[t], scores, preds, calibration, config, spec.unit, image_wise, with_curves)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(job, range(spec.trials)))
    else:
        outcomes = [job(t) for t in range(spec.trials)]

    trials = [res for _, res in outcomes if res is not None]
    skipped = [t for t, res in outcomes if res is None]
    if skipped:
        warnings.warn(
            f"{len(skipped)} trial(s) had fewer than 2 test items and were skipped",
            SkippedTrialWarning,
            stacklevel=2,
        )
    if not trials:
        raise DegenerateDataError("every trial was skipped; no test partition has 2 items")

    metrics = list(trials[0].per_metric)
    for tr in trials:
        if list(tr.per_metric) != metrics:
            raise ValidationError(f"trial {tr.trial_index} covers different metrics than trial {trials[0].trial_index}")

    medians = OrderedDict()
    curves = OrderedDict()
    for m in metrics:
        evs = [tr.per_metric[m] for tr in trials]
        medians[m] = OrderedDict(
            (col, float(np.median([ev.as_row()[col] for ev in evs]))) for col in INDICATORS
        )
        if with_curves:
            stack = np.array([ev.curve.accuracies for ev in evs])
            curves[m] = SaStCurve(calibration.curve_grid, np.median(stack, axis=0), calibration.activation.c1)

    bench = {m: medians[m]["dMOS"] for m in metrics}
    disagreements = OrderedDict(
        (ind, value_disagreements({m: medians[m][ind] for m in metrics}, bench))
        for ind in INDICATORS
        if ind != "dMOS"
    )
    logger.info("protocol: %d effective trials, %d skipped", len(trials), len(skipped))
    return ProtocolResult(trials, medians, disagreements, calibration, skipped, curves)


# ---------------------------------------------------------------- synthetic


def synthesize_panel(true_scores, stddevs, subjects_per_image: int, seed: int = 0) -> SyntheticPanel:
    """Draw ``subjects_per_image`` Gaussian opinion scores per image."""
    mu = np.asarray(true_scores, dtype=float)
    sd = np.asarray(stddevs, dtype=float)
    if mu.shape != sd.shape or mu.ndim != 1:
        raise ValidationError("true_scores and stddevs must be 1-D with equal lengths")
    if np.any(sd < 0):
        raise ValidationError("stddevs must be >= 0")
    if subjects_per_image < 1:
        raise ValidationError("subjects_per_image must be >= 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    draws = mu[:, None] + sd[:, None] * rng.standard_normal((mu.size, int(subjects_per_image)))
    return SyntheticPanel(mu, sd, draws)


def make_synthetic_dataset(n_groups: int = 30, items_per_group: int = 5, subjects: int = 25, seed: int = 0):
    """A small labelled database with four metrics of differing quality.

    ``fidelity`` tracks the truth closely, ``coarse`` is noisier,
    ``top_blind`` degrades on high-quality items and ``distortion`` is a
    lower-is-better score.  Scores are rounded to 4 decimals, predictions
    to 6.

    Returns
    -------
    (ScoreSet, dict of metric name -> PredictionSet)
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    n = n_groups * items_per_group
    truth = rng.uniform(5.0, 95.0, n)
    sigma = rng.uniform(4.0, 12.0, n)
    panel = synthesize_panel(truth, sigma, subjects, seed=int(rng.integers(2**63)))
    ids = [f"g{g:02d}_i{i}" for g in range(n_groups) for i in range(items_per_group)]
    groups = [f"g{g:02d}" for g in range(n_groups) for _ in range(items_per_group)]
    scores = ScoreSet(ids, np.round(panel.mos, 4), np.round(panel.sample_std, 4), groups, ScorePolarity.MOS)
    metric_values = OrderedDict(
        fidelity=(truth + rng.normal(0.0, 5.0, n), "higher"),
        coarse=(truth + rng.normal(0.0, 15.0, n), "higher"),
        top_blind=(truth + rng.normal(0.0, 1.0, n) * (2.0 + 0.3 * truth), "higher"),
        distortion=(100.0 - truth + rng.normal(0.0, 8.0, n), "lower"),
    )
    preds = OrderedDict(
        (name, PredictionSet(ids, np.round(v, 6), pol, name)) for name, (v, pol) in metric_values.items()
    )
    return scores, preds


def write_dataset(directory, scores: ScoreSet, predictions) -> dict:
    """Write the three canonical CSVs; returns their paths."""
    from .reporting import csv_text, atomic_write_text

    directory = Path(directory)
    paths = {
        "scores": directory / "scores.csv",
        "predictions": directory / "predictions.csv",
        "polarity": directory / "polarity.csv",
    }
    atomic_write_text(paths["scores"], csv_text(
        SCORE_COLUMNS,
        ((i, s, d, g, scores.polarity.value)
         for i, s, d, g in zip(scores.ids, scores.scores, scores.stddevs, scores.groups)),
    ))
    names = list(predictions)
    atomic_write_text(paths["predictions"], csv_text(
        ["id"] + names,
        ([i] + [predictions[m].values[k] for m in names] for k, i in enumerate(scores.ids)),
    ))
    atomic_write_text(paths["polarity"], csv_text(
        ["metric", "polarity"], ((m, predictions[m].polarity.value) for m in names)
    ))
    return paths


# ------------------------------------------------------------------- config


def parse_grid(text: str):
    """``"lo:hi:count"`` -> ``(lo, hi, count)``."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValidationError(f"grid must look like lo:hi:count, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValidationError(f"grid must look like lo:hi:count, got {text!r}") from None
    if count < 2 or not hi > lo:
        raise ValidationError(f"grid needs lo < hi and count >= 2, got {text!r}")
    return lo, hi, count


def read_run_config(path) -> dict:
    """Parse a plain ``key = value`` run file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for k, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else (":" if ":" in line.split()[0] else None)
            if sep is None:
                raise ValidationError(f"{path}: line {k}: expected key = value")
            key, value = line.split(sep, 1)
            key = key.strip().lower().replace("-", "_")
            if not key:
                raise ValidationError(f"{path}: line {k}: empty key")
            out[key] = value.strip()
    return out
