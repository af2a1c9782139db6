"""Evaluate one metric against subjective scores with every indicator.

:class:`IndicatorConfig` holds user settings; :func:`calibrate` turns them
into database-level constants (normalization pool, activation steepness,
integration range) that are then reused for every subset evaluated.
"""
from __future__ import annotations

import warnings
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from . import classic
from .benchmark import SingletonGroupWarning, delta_mos, grouped_mean
from .core import (
    PredictionSet,
    ScorePolarity,
    ScoreSet,
    TiePolicy,
    ground_truth_pairing,
    normalize,
    rank_transform,
)
from .exceptions import DegenerateDataError, ValidationError
from .indicator import (
    DEFAULT_C1,
    ActivationConfig,
    ActivationMode,
    SaStCurve,
    WeightMode,
    auc_ca,
    derive_c1,
    pwrc,
    sa_st_curve,
    threshold_grid,
    threshold_range,
)

__all__ = [
    "INDICATORS",
    "IndicatorConfig",
    "Calibration",
    "MetricEvaluation",
    "calibrate",
    "evaluate_metric",
    "evaluate_grouped",
]

#: indicator columns reported per metric, in output order
INDICATORS = ("SRCC", "KRCC", "AUCca", "dMOS")


@dataclass(frozen=True)
class IndicatorConfig:
    """User-facing settings for an evaluation run.

    ``c1="auto"`` derives the steepness from the pool's mean normalized
    standard deviation.  ``t_min``/``t_max`` default to twice the smallest
    and largest normalized standard deviation.  ``threshold`` is the single
    sensory threshold at which the scalar PWRC column is reported.
    """

    c1: Union[float, str] = DEFAULT_C1
    activation: ActivationMode = ActivationMode.SOFT
    weights: WeightMode = WeightMode.IMPORTANCE
    tie_policy: TiePolicy = TiePolicy.STRICT
    threshold: float = 0.0
    t_min: Optional[float] = None
    t_max: Optional[float] = None
    auc_samples: int = 101
    curve_grid: tuple = (0.0, 100.0, 20)
    raw_scale: bool = False
    clamp: bool = True

    def __post_init__(self):
        object.__setattr__(self, "activation", ActivationMode(self.activation))
        object.__setattr__(self, "weights", WeightMode(self.weights))
        object.__setattr__(self, "tie_policy", TiePolicy.parse(self.tie_policy))
        if self.tie_policy is TiePolicy.AVERAGE:
            raise ValidationError("PWRC needs untied ranks; tie policy must be strict or stable")
        if self.auc_samples < 2:
            raise ValidationError("auc_samples must be at least 2")
        lo, hi, count = self.curve_grid
        object.__setattr__(self, "curve_grid", (float(lo), float(hi), int(count)))

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class Calibration:
    """Database-level constants shared by every subset evaluation."""

    pool: ScoreSet
    activation: ActivationConfig
    t_min: float
    t_max: float
    auc_grid: np.ndarray = field(repr=False)
    curve_grid: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class MetricEvaluation:
    srcc: float
    krcc: float
    pwrc: float
    auc_ca: float
    dmos: float
    curve: Optional[SaStCurve] = None

    def as_row(self):
        return OrderedDict(SRCC=self.srcc, KRCC=self.krcc, AUCca=self.auc_ca, dMOS=self.dmos)


def calibrate(pool: ScoreSet, config: IndicatorConfig = IndicatorConfig()) -> Calibration:
    """Fit normalization, steepness and integration range on a score pool."""
    fitted = normalize(pool)
    if config.c1 == "auto":
        c1 = derive_c1(float(np.mean(fitted.stddevs)))
    else:
        c1 = float(config.c1)
    lo, hi = threshold_range(fitted.stddevs)
    t_min = lo if config.t_min is None else float(config.t_min)
    t_max = hi if config.t_max is None else float(config.t_max)
    if t_min == t_max:
        raise DegenerateDataError(
            f"zero-width threshold range [{t_min}, {t_max}]; give t_min and t_max explicitly"
        )
    if t_min > t_max:
        raise ValidationError(f"inverted threshold range [{t_min}, {t_max}]")
    return Calibration(
        pool=pool,
        activation=ActivationConfig(c1, config.activation),
        t_min=t_min,
        t_max=t_max,
        auc_grid=threshold_grid(t_min, t_max, config.auc_samples),
        curve_grid=threshold_grid(*config.curve_grid),
    )


def _oriented_subjective(scores: ScoreSet):
    if scores.polarity is ScorePolarity.DMOS:
        return -scores.scores
    return np.array(scores.scores)


def evaluate_metric(scores: ScoreSet, prediction: PredictionSet, calibration: Calibration,
                    config: IndicatorConfig = IndicatorConfig(), with_curve: bool = False) -> MetricEvaluation:
    """Every indicator for one metric on one subset of the database.

    SRCC uses mid-ranks of the raw values; KRCC, PWRC and AUC use the ranks
    produced under ``config.tie_policy``.  With ``with_curve`` the SA-ST
    curve on the plotting grid is attached.
    """
    return _evaluate(scores, prediction, calibration, config, with_curve)[0]


def _evaluate(scores, prediction, calibration, config, with_curve):
    pair = ground_truth_pairing(scores, prediction, calibration.pool, config.tie_policy, config.clamp)
    act = calibration.activation
    srcc = classic.spearman_rho(
        rank_transform(_oriented_subjective(scores), TiePolicy.AVERAGE),
        rank_transform(prediction.oriented(), TiePolicy.AVERAGE),
    )
    krcc = classic.kendall_tau(pair.p, pair.q)
    value = pwrc(pair.xhat, pair.p, pair.q, config.threshold, act, config.weights)
    auc_curve = sa_st_curve(pair.xhat, pair.p, pair.q, calibration.auc_grid, act, config.weights)
    auc = auc_ca(auc_curve, calibration.t_min, calibration.t_max)
    # raw DMOS is negated so a positive push always means better images
    push_scores = _oriented_subjective(scores)[pair.order] if config.raw_scale else pair.xhat
    dmos = delta_mos(push_scores, pair.q).mean
    curve = None
    if with_curve:
        curve = sa_st_curve(pair.xhat, pair.p, pair.q, calibration.curve_grid, act, config.weights)
    return MetricEvaluation(srcc, krcc, value, auc, dmos, curve), auc_curve


def evaluate_grouped(scores: ScoreSet, prediction: PredictionSet, calibration: Calibration,
                     config: IndicatorConfig = IndicatorConfig(), with_curve: bool = False) -> MetricEvaluation:
    """Image-wise averaged indicators for enhancement-style data.

    Each content group (one raw image and its enhanced versions) is
    evaluated on its own and the results are averaged with equal weight per
    group.  The averaged AUC integrates the averaged SA-ST curve.  Groups
    with a single item are skipped with a :class:`SingletonGroupWarning`.
    """
    members = OrderedDict()
    for pos, g in enumerate(scores.groups):
        members.setdefault(g, []).append(pos)
    skipped = [g for g, idx in members.items() if len(idx) < 2]
    if skipped:
        warnings.warn(
            f"skipped {len(skipped)} group(s) with fewer than 2 items: {skipped[:10]}",
            SingletonGroupWarning,
            stacklevel=2,
        )
    usable = OrderedDict((g, idx) for g, idx in members.items() if len(idx) >= 2)
    if not usable:
        raise DegenerateDataError("no content group has at least 2 items")

    per = {}
    auc_curves = []
    plot_curves = []
    act = calibration.activation
    for g, idx in usable.items():
        sub_scores = scores.take(idx)
        sub_pred = prediction.take(idx)
        ev, auc_curve = _evaluate(sub_scores, sub_pred, calibration, config, with_curve)
        per[g] = ev
        auc_curves.append(auc_curve.accuracies)
        if with_curve:
            plot_curves.append(ev.curve.accuracies)

    keys = sorted(per)
    order = [list(usable).index(k) for k in keys]
    mean_auc_curve = SaStCurve(calibration.auc_grid, np.mean([auc_curves[i] for i in order], axis=0), act.c1)
    curve = None
    if with_curve:
        curve = SaStCurve(calibration.curve_grid, np.mean([plot_curves[i] for i in order], axis=0), act.c1)
    return MetricEvaluation(
        srcc=grouped_mean({g: per[g].srcc for g in keys}).mean,
        krcc=grouped_mean({g: per[g].krcc for g in keys}).mean,
        pwrc=grouped_mean({g: per[g].pwrc for g in keys}).mean,
        auc_ca=auc_ca(mean_auc_curve, calibration.t_min, calibration.t_max),
        dmos=grouped_mean({g: per[g].dmos for g in keys}).mean,
        curve=curve,
    )
