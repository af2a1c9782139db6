"""Perceptually weighted rank correlation (PWRC), SA-ST curves and AUC.

A PWRC value is the sum over ordered pairs ``i != j`` of three factors:

* a soft activation of the subjective score gap against a sensory
  threshold ``T`` (pairs closer than ``T`` barely count),
* a sign detector that is ``-1`` for discordant pairs,
* an importance weight that grows with the pair's rank deviation and its
  quality level, normalized to sum to one.

All three factors are symmetric in ``(i, j)`` so every unordered pair is
counted twice with half the weight.  The literal ordered-pair form is kept.

Inputs are expected in canonical orientation (see
:func:`pwrc.core.ground_truth_pairing`): ``p == [1..n]`` and the normalized
subjective scores sorted ascending.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit

from .core import NormalizedScoreSet, as_rank_array
from .exceptions import DegenerateDataError, TiedRanksError, ValidationError

__all__ = [
    "DEFAULT_C1",
    "ActivationMode",
    "WeightMode",
    "ActivationConfig",
    "ImportanceWeights",
    "SaStCurve",
    "derive_c1",
    "activation",
    "activation_matrix",
    "detection",
    "detection_matrix",
    "importance_weights",
    "uniform_weights",
    "pwrc",
    "sa_st_curve",
    "auc_ca",
    "threshold_range",
    "threshold_grid",
]

#: steepness derived from the cross-database mean normalized stddev 8.577
DEFAULT_C1 = 0.175


class ActivationMode(str, Enum):
    SOFT = "soft"
    CONSTANT = "constant"


class WeightMode(str, Enum):
    IMPORTANCE = "importance"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class ActivationConfig:
    c1: float = DEFAULT_C1
    mode: ActivationMode = ActivationMode.SOFT

    def __post_init__(self):
        object.__setattr__(self, "mode", ActivationMode(self.mode))
        if not (np.isfinite(self.c1) and self.c1 > 0):
            raise ValidationError(f"c1 must be finite and positive, got {self.c1}")

    @classmethod
    def constant(cls):
        return cls(mode=ActivationMode.CONSTANT)


@dataclass(frozen=True)
class ImportanceWeights:
    """Normalized pair weights with their rank-deviation and level terms.

    All three arrays are ``n x n``; the diagonal is zero in ``w`` and ignored
    in the other two.
    """

    w: np.ndarray
    d_term: np.ndarray
    l_term: np.ndarray


@dataclass(frozen=True)
class SaStCurve:
    """Sorting accuracy sampled over ascending sensory thresholds."""

    thresholds: np.ndarray
    accuracies: np.ndarray
    c1: float

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=float)
        s = np.asarray(self.accuracies, dtype=float)
        if t.ndim != 1 or t.shape != s.shape:
            raise ValidationError("thresholds and accuracies must be 1-D with equal lengths")
        if t.size < 2:
            raise ValidationError("a curve needs at least 2 samples")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("thresholds must be strictly increasing")
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "accuracies", s)


def derive_c1(mean_normalized_stddev: float) -> float:
    """Activation steepness from the mean normalized standard deviation.

    Solving ``1 / (1 + exp(-2 * c1 * sigma)) = 0.95`` gives
    ``ln(19) / (2 * sigma)``; the rounded ``3 / (2 * sigma)`` is returned
    so that ``sigma = 8.577`` reproduces the customary ``0.175``.
    """
    sigma = float(mean_normalized_stddev)
    if not (np.isfinite(sigma) and sigma > 0):
        raise ValidationError(f"mean normalized stddev must be positive, got {sigma}")
    return 3.0 / (2.0 * sigma)


def activation(xi: float, xj: float, threshold: float, config: ActivationConfig = ActivationConfig()) -> float:
    if config.mode is ActivationMode.CONSTANT:
        return 1.0
    return float(expit(config.c1 * (abs(xi - xj) - threshold)))


def _scores(xhat):
    if isinstance(xhat, NormalizedScoreSet):
        return xhat.scores
    arr = np.asarray(xhat, dtype=float)
    if arr.ndim != 1:
        raise ValidationError("normalized scores must be one-dimensional")
    return arr


def activation_matrix(xhat, threshold: float, config: ActivationConfig = ActivationConfig()):
    """Activation of every ordered pair; the diagonal is meaningless."""
    x = _scores(xhat)
    n = x.shape[0]
    if config.mode is ActivationMode.CONSTANT:
        return np.ones((n, n))
    gaps = np.abs(x[:, None] - x[None, :])
    return expit(config.c1 * (gaps - threshold))


def detection(pi: int, pj: int, qi: int, qj: int) -> int:
    """``sgn(pi - pj) * sgn(qi - qj)``; equal ranks are rejected."""
    if pi == pj or qi == qj:
        raise TiedRanksError("detection is undefined for equal ranks")
    return (1 if pi > pj else -1) * (1 if qi > qj else -1)


def detection_matrix(p, q):
    p = np.asarray(as_rank_array(p), dtype=float)
    q = np.asarray(as_rank_array(q), dtype=float)
    return np.sign(p[:, None] - p[None, :]) * np.sign(q[:, None] - q[None, :])


def _canonical(p, q):
    p = as_rank_array(p)
    q = as_rank_array(q)
    if p.shape != q.shape:
        raise ValidationError(f"rank vectors differ in length: {p.shape[0]} vs {q.shape[0]}")
    n = p.shape[0]
    if n < 2:
        raise ValidationError(f"need at least 2 items, got {n}")
    if not np.array_equal(p, np.arange(1, n + 1)):
        raise ValidationError("p must be the canonical ground truth [1..n]; use ground_truth_pairing")
    if not np.array_equal(np.sort(q), np.arange(1, n + 1)):
        raise TiedRanksError("q must be an untied permutation of 1..n")
    return p, q, n


def importance_weights(p, q) -> ImportanceWeights:
    """Pair weights ``exp(d) + exp(l) - 2`` normalized over ordered pairs.

    ``d`` is the mean absolute rank deviation of the two items scaled into
    ``[0, 1]``; ``l`` is the higher ground-truth rank of the pair scaled into
    ``[0, 1]``.
    """
    p, q, n = _canonical(p, q)
    idx = np.arange(1, n + 1)
    dev = np.abs(idx - q).astype(float)
    d_term = (dev[:, None] + dev[None, :]) / (2 * n - 2)
    l_term = (np.maximum(idx[:, None], idx[None, :]) - 1) / (n - 1)
    raw = np.exp(d_term) + np.exp(l_term) - 2.0
    np.fill_diagonal(raw, 0.0)
    return ImportanceWeights(raw / np.sum(raw), d_term, l_term)


def uniform_weights(n: int) -> np.ndarray:
    """Equal weights summing to one; with constant activation PWRC becomes tau.

    Each unordered pair carries ``2 / (n**2 - n)``, split evenly between its
    two orientations.
    """
    w = np.full((n, n), 1.0 / (n * n - n))
    np.fill_diagonal(w, 0.0)
    return w


def _weights(p, q, weights):
    mode = WeightMode(weights)
    if mode is WeightMode.UNIFORM:
        _, _, n = _canonical(p, q)
        return uniform_weights(n)
    return importance_weights(p, q).w


def pwrc(xhat, p, q, threshold: float = 0.0, config: ActivationConfig = ActivationConfig(),
         weights=WeightMode.IMPORTANCE) -> float:
    """Perceptually weighted rank correlation at one sensory threshold.

    Parameters
    ----------
    xhat : NormalizedScoreSet or array-like
        Normalized subjective scores in canonical (ascending) order.
    p, q : RankVector or array-like
        Canonical ground truth ``[1..n]`` and the prediction's ranks.
    threshold : float
        Sensory threshold in normalized score units.
    config : ActivationConfig
    weights : {"importance", "uniform"}
        ``"uniform"`` together with constant activation gives Kendall's tau.

    Returns
    -------
    float in ``[-1, 1]``
    """
    if threshold < 0:
        raise ValidationError(f"threshold must be >= 0, got {threshold}")
    x = _scores(xhat)
    p_arr, q_arr, n = _canonical(p, q)
    if x.shape[0] != n:
        raise ValidationError(f"{x.shape[0]} scores for {n} ranks")
    dm = detection_matrix(p_arr, q_arr) * _weights(p_arr, q_arr, weights)
    return float(np.sum(activation_matrix(x, threshold, config) * dm))


def sa_st_curve(xhat, p, q, thresholds, config: ActivationConfig = ActivationConfig(),
                weights=WeightMode.IMPORTANCE) -> SaStCurve:
    """PWRC evaluated on every threshold of an ascending grid."""
    t = np.asarray(thresholds, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValidationError("empty threshold list")
    if t.size < 2:
        raise ValidationError("an SA-ST curve needs at least 2 thresholds")
    if np.any(t < 0):
        raise ValidationError("thresholds must be >= 0")
    x = _scores(xhat)
    p_arr, q_arr, n = _canonical(p, q)
    if x.shape[0] != n:
        raise ValidationError(f"{x.shape[0]} scores for {n} ranks")
    dm = detection_matrix(p_arr, q_arr) * _weights(p_arr, q_arr, weights)
    if config.mode is ActivationMode.CONSTANT:
        s = float(np.sum(dm))
        return SaStCurve(t, np.full(t.shape, s), config.c1)
    gaps = np.abs(x[:, None] - x[None, :])
    acc = np.array([float(np.sum(expit(config.c1 * (gaps - tk)) * dm)) for tk in t])
    return SaStCurve(t, acc, config.c1)


def _interp(curve, t):
    return float(np.interp(t, curve.thresholds, curve.accuracies))


def auc_ca(curve: SaStCurve, t_min: float, t_max: float) -> float:
    """Trapezoidal area under an SA-ST curve between two thresholds.

    Endpoints that fall between samples are linearly interpolated.
    """
    t_min = float(t_min)
    t_max = float(t_max)
    if not t_min < t_max:
        if t_min == t_max:
            raise DegenerateDataError(f"zero-width threshold range [{t_min}, {t_max}]")
        raise ValidationError(f"inverted threshold range [{t_min}, {t_max}]")
    lo, hi = curve.thresholds[0], curve.thresholds[-1]
    if t_min < lo or t_max > hi:
        raise ValidationError(
            f"range [{t_min}, {t_max}] exceeds the sampled thresholds [{lo}, {hi}]"
        )
    inner = (curve.thresholds > t_min) & (curve.thresholds < t_max)
    t = np.concatenate(([t_min], curve.thresholds[inner], [t_max]))
    s = np.concatenate(([_interp(curve, t_min)], curve.accuracies[inner], [_interp(curve, t_max)]))
    return float(np.trapezoid(s, t))


def threshold_range(stddevs):
    """``(2 * min, 2 * max)`` of normalized standard deviations.

    A zero-width result is returned as is; :func:`auc_ca` refuses it.
    """
    s = np.asarray(stddevs, dtype=float).ravel()
    if s.size == 0:
        raise ValidationError("no standard deviations given")
    if np.any(~np.isfinite(s)) or np.any(s < 0):
        raise ValidationError("standard deviations must be finite and >= 0")
    return 2.0 * float(s.min()), 2.0 * float(s.max())


def threshold_grid(lo: float, hi: float, count: int):
    """``count`` evenly spaced thresholds on ``[lo, hi]`` inclusive."""
    if count < 2:
        raise ValidationError("a threshold grid needs at least 2 points")
    if not hi > lo:
        raise ValidationError(f"grid bounds must satisfy lo < hi, got {lo}:{hi}")
    return np.linspace(lo, hi, int(count))
