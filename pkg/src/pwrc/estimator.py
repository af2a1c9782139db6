"""scikit-learn style wrappers around normalization and PWRC scoring.

``ScoreNormalizer`` is a transformer: ``fit`` learns the scale and bias from a
pool of subjective scores and ``transform`` maps any scores through them.

``PWRCScorer`` is fitted on a pool of subjective scores (and their standard
deviations) and then scores predictions against subsets of that pool, the
way a database is fitted once and evaluated on many test splits.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_consistent_length, check_is_fitted, column_or_1d

from .core import PredictionSet, ScoreSet, TiePolicy, ground_truth_pairing, normalize
from .evaluation import Calibration, IndicatorConfig, evaluate_metric
from .exceptions import DegenerateDataError, ValidationError
from .indicator import (
    DEFAULT_C1,
    ActivationConfig,
    ActivationMode,
    WeightMode,
    auc_ca,
    derive_c1,
    pwrc,
    sa_st_curve,
    threshold_grid,
    threshold_range,
)

__all__ = ["ScoreNormalizer", "PWRCScorer"]


def _vector(values, name):
    try:
        arr = column_or_1d(np.asarray(values, dtype=float))
    except ValueError as exc:
        raise ValidationError(f"{name}: {exc}") from None
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


class ScoreNormalizer(TransformerMixin, BaseEstimator):
    """Map MOS/DMOS onto ``[0, 100]`` with higher meaning better.

    Parameters
    ----------
    polarity : {"mos", "dmos"}
    clamp : bool
        Clip transformed values outside the fitted pool to ``[0, 100]``.
    """

    def __init__(self, polarity="mos", clamp=True):
        self.polarity = polarity
        self.clamp = clamp

    def fit(self, X, y=None):
        x = _vector(X, "X")
        pool = ScoreSet.from_arrays(x, polarity=self.polarity)
        fitted = normalize(pool)
        self.pool_ = pool
        self.omega_ = fitted.omega
        self.epsilon_ = fitted.epsilon
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "omega_")
        x = _vector(X, "X")
        return normalize(ScoreSet.from_arrays(x, polarity=self.polarity), self.pool_, self.clamp).scores.copy()

    def transform_std(self, stddevs):
        """Scale standard deviations by the fitted factor (no bias)."""
        check_is_fitted(self, "omega_")
        return self.omega_ * _vector(stddevs, "stddevs") * 100.0


class PWRCScorer(BaseEstimator):
    """Rank-correlation scorer fitted on a database's subjective scores.

    Parameters
    ----------
    polarity : {"mos", "dmos"}
        Polarity of the subjective scores.
    c1 : float or "auto"
        Activation steepness; ``"auto"`` derives it from the mean normalized
        standard deviation of the fitted pool.
    activation : {"soft", "constant"}
    weights : {"importance", "uniform"}
    tie_policy : {"strict", "stable"}
    t_min, t_max : float, optional
        AUC integration bounds; default to twice the smallest and largest
        normalized standard deviation of the pool.
    n_samples : int
        Number of uniform thresholds used for the AUC quadrature.
    prediction_polarity : {"higher", "lower"}
    clamp : bool
    """

    def __init__(self, polarity="mos", c1=DEFAULT_C1, activation="soft", weights="importance",
                 tie_policy="strict", t_min=None, t_max=None, n_samples=101,
                 prediction_polarity="higher", clamp=True):
        self.polarity = polarity
        self.c1 = c1
        self.activation = activation
        self.weights = weights
        self.tie_policy = tie_policy
        self.t_min = t_min
        self.t_max = t_max
        self.n_samples = n_samples
        self.prediction_polarity = prediction_polarity
        self.clamp = clamp

    def fit(self, y, stddev=None):
        y = _vector(y, "y")
        sd = np.zeros_like(y) if stddev is None else _vector(stddev, "stddev")
        check_consistent_length(y, sd)
        pool = ScoreSet.from_arrays(y, sd, polarity=self.polarity)
        fitted = normalize(pool)
        self.pool_ = pool
        self.omega_ = fitted.omega
        self.epsilon_ = fitted.epsilon
        if self.c1 == "auto":
            c1 = derive_c1(float(np.mean(fitted.stddevs)))
        else:
            c1 = float(self.c1)
        self.config_ = ActivationConfig(c1, ActivationMode(self.activation))
        lo, hi = threshold_range(fitted.stddevs)
        self.t_min_ = lo if self.t_min is None else float(self.t_min)
        self.t_max_ = hi if self.t_max is None else float(self.t_max)
        self.policy_ = TiePolicy.parse(self.tie_policy)
        self.weights_ = WeightMode(self.weights)
        return self

    def auc_grid(self):
        check_is_fitted(self, "config_")
        if self.t_min_ == self.t_max_:
            raise DegenerateDataError(
                f"zero-width threshold range [{self.t_min_}, {self.t_max_}]; set t_min/t_max explicitly"
            )
        return threshold_grid(self.t_min_, self.t_max_, self.n_samples)

    def _pair(self, y_true, y_pred, stddev=None):
        check_is_fitted(self, "config_")
        y_true = _vector(y_true, "y_true")
        y_pred = _vector(y_pred, "y_pred")
        check_consistent_length(y_true, y_pred)
        scores = ScoreSet.from_arrays(y_true, stddev, polarity=self.polarity)
        pred = PredictionSet.from_arrays(y_pred, ids=scores.ids, polarity=self.prediction_polarity)
        return ground_truth_pairing(scores, pred, self.pool_, self.policy_, self.clamp)

    def pwrc(self, y_true, y_pred, threshold=0.0):
        """PWRC at a single sensory threshold."""
        pair = self._pair(y_true, y_pred)
        return pwrc(pair.xhat, pair.p, pair.q, threshold, self.config_, self.weights_)

    def curve(self, y_true, y_pred, thresholds=None):
        """SA-ST curve; defaults to the AUC grid on ``[t_min_, t_max_]``."""
        pair = self._pair(y_true, y_pred)
        if thresholds is None:
            thresholds = self.auc_grid()
        return sa_st_curve(pair.xhat, pair.p, pair.q, thresholds, self.config_, self.weights_)

    def auc(self, y_true, y_pred):
        return auc_ca(self.curve(y_true, y_pred), self.t_min_, self.t_max_)

    def score(self, y_true, y_pred):
        """Confidence-aware AUC of ``y_pred`` against ``y_true``."""
        return self.auc(y_true, y_pred)

    def report(self, y_true, y_pred, threshold=0.0, raw_scale=False):
        """SRCC, KRCC, PWRC at ``threshold``, AUC and the push benchmark."""
        check_is_fitted(self, "config_")
        y_true = _vector(y_true, "y_true")
        y_pred = _vector(y_pred, "y_pred")
        check_consistent_length(y_true, y_pred)
        scores = ScoreSet.from_arrays(y_true, polarity=self.polarity)
        pred = PredictionSet.from_arrays(y_pred, ids=scores.ids, polarity=self.prediction_polarity)
        config = IndicatorConfig(
            c1=self.config_.c1, activation=self.config_.mode, weights=self.weights_,
            tie_policy=self.policy_, threshold=threshold, t_min=self.t_min_, t_max=self.t_max_,
            auc_samples=self.n_samples, raw_scale=raw_scale, clamp=self.clamp,
        )
        calibration = Calibration(
            self.pool_, self.config_, self.t_min_, self.t_max_, self.auc_grid(),
            threshold_grid(*config.curve_grid),
        )
        ev = evaluate_metric(scores, pred, calibration, config)
        return {"SRCC": ev.srcc, "KRCC": ev.krcc, "PWRC": ev.pwrc, "AUCca": ev.auc_ca, "dMOS": ev.dmos}
