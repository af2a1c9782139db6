"""Shared data types, score normalization and rank transformation.

Every indicator in the package consumes the objects defined here.  Scores are
normalized onto a common ``[0, 100]`` higher-is-better scale, and both the
subjective scores and the metric predictions are converted to integer ranks
where rank 1 is the worst item and rank ``n`` the best.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .exceptions import (
    AlignmentError,
    DegenerateDataError,
    TiedRanksError,
    ValidationError,
)

__all__ = [
    "ScorePolarity",
    "PredictionPolarity",
    "TiePolicy",
    "ScoreSet",
    "NormalizedScoreSet",
    "PredictionSet",
    "RankVector",
    "Pairing",
    "PoolRangeWarning",
    "normalize",
    "rank_transform",
    "ground_truth_pairing",
    "as_rank_array",
]


class _Token(str, Enum):
    @classmethod
    def parse(cls, token):
        if isinstance(token, cls):
            return token
        key = str(token).strip().lower()
        for member in cls:
            if key == member.value or key in member.aliases():
                return member
        valid = ", ".join(m.value for m in cls)
        raise ValidationError(f"unknown {cls.__name__} token {token!r} (expected one of: {valid})")

    def aliases(self):
        return ()


class ScorePolarity(_Token):
    MOS = "mos"
    DMOS = "dmos"


class PredictionPolarity(_Token):
    HIGHER = "higher"
    LOWER = "lower"

    def aliases(self):
        if self is PredictionPolarity.HIGHER:
            return ("higherisbetter", "higher_is_better", "+", "up")
        return ("lowerisbetter", "lower_is_better", "-", "down")


class TiePolicy(_Token):
    STRICT = "strict"
    STABLE = "stable"
    AVERAGE = "average"

    def aliases(self):
        return {"stable": ("stableorder", "stable_order")}.get(self.value, ())


class PoolRangeWarning(RuntimeWarning):
    """A score fell outside the pool used to fit the normalization."""


def _readonly(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_finite(arr, what):
    if arr.ndim != 1:
        raise ValidationError(f"{what} must be one-dimensional, got shape {arr.shape}")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise ValidationError(f"{what} contains non-finite values at positions {bad.tolist()}")


@dataclass(frozen=True)
class ScoreSet:
    """Per-image subjective data on the source scale.

    Build one with :meth:`from_arrays` unless every field is already at hand.
    """

    ids: tuple
    scores: np.ndarray
    stddevs: np.ndarray
    groups: tuple
    polarity: ScorePolarity = ScorePolarity.MOS

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "groups", tuple(str(g) for g in self.groups))
        object.__setattr__(self, "scores", _readonly(self.scores))
        object.__setattr__(self, "stddevs", _readonly(self.stddevs))
        object.__setattr__(self, "polarity", ScorePolarity.parse(self.polarity))
        n = len(self.ids)
        if not (len(self.scores) == len(self.stddevs) == len(self.groups) == n):
            raise ValidationError(
                "ids, scores, stddevs and groups must have equal lengths "
                f"(got {n}, {len(self.scores)}, {len(self.stddevs)}, {len(self.groups)})"
            )
        _check_finite(self.scores, "scores")
        _check_finite(self.stddevs, "stddevs")
        negative = np.flatnonzero(self.stddevs < 0)
        if negative.size:
            raise ValidationError(
                f"stddevs must be >= 0; negative for ids {[self.ids[i] for i in negative]}"
            )
        if len(set(self.ids)) != n:
            seen, dup = set(), []
            for i in self.ids:
                if i in seen:
                    dup.append(i)
                seen.add(i)
            raise ValidationError(f"duplicate ids: {sorted(set(dup))}")

    @classmethod
    def from_arrays(cls, scores, stddevs=None, ids=None, groups=None, polarity="mos"):
        scores = np.asarray(scores, dtype=float)
        n = scores.shape[0] if scores.ndim else 0
        if stddevs is None:
            stddevs = np.zeros(n)
        if ids is None:
            ids = [str(i) for i in range(n)]
        if groups is None:
            groups = ids
        return cls(ids=ids, scores=scores, stddevs=stddevs, groups=groups, polarity=polarity)

    def __len__(self):
        return len(self.ids)

    def take(self, indices):
        """Subset by integer positions, preserving the given order."""
        idx = np.asarray(indices, dtype=int)
        return ScoreSet(
            ids=[self.ids[i] for i in idx],
            scores=self.scores[idx],
            stddevs=self.stddevs[idx],
            groups=[self.groups[i] for i in idx],
            polarity=self.polarity,
        )


@dataclass(frozen=True)
class NormalizedScoreSet:
    """Scores and deviations mapped onto ``[0, 100]``, higher is better.

    ``omega`` and ``epsilon`` are the scale and bias fitted on the pool,
    so that a raw MOS ``x`` maps to ``(omega * x + epsilon) * 100``.
    """

    scores: np.ndarray
    stddevs: np.ndarray
    omega: float
    epsilon: float
    ids: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "scores", _readonly(self.scores))
        object.__setattr__(self, "stddevs", _readonly(self.stddevs))
        object.__setattr__(self, "ids", tuple(self.ids))
        if len(self.scores) != len(self.stddevs):
            raise ValidationError("normalized scores and stddevs differ in length")

    def __len__(self):
        return len(self.scores)

    def take(self, indices):
        idx = np.asarray(indices, dtype=int)
        ids = tuple(self.ids[i] for i in idx) if self.ids else ()
        return NormalizedScoreSet(
            self.scores[idx], self.stddevs[idx], self.omega, self.epsilon, ids
        )


@dataclass(frozen=True)
class PredictionSet:
    """One metric's predictions aligned by id to a :class:`ScoreSet`."""

    ids: tuple
    values: np.ndarray
    polarity: PredictionPolarity = PredictionPolarity.HIGHER
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "values", _readonly(self.values))
        object.__setattr__(self, "polarity", PredictionPolarity.parse(self.polarity))
        if len(self.ids) != len(self.values):
            raise ValidationError("prediction ids and values differ in length")
        _check_finite(self.values, f"predictions {self.name!r}" if self.name else "predictions")

    @classmethod
    def from_arrays(cls, values, ids=None, polarity="higher", name=""):
        values = np.asarray(values, dtype=float)
        if ids is None:
            ids = [str(i) for i in range(values.shape[0])]
        return cls(ids=ids, values=values, polarity=polarity, name=name)

    def __len__(self):
        return len(self.ids)

    def take(self, indices):
        idx = np.asarray(indices, dtype=int)
        return PredictionSet(
            [self.ids[i] for i in idx], self.values[idx], self.polarity, self.name
        )

    def oriented(self):
        """Values with higher always meaning better quality."""
        if self.polarity is PredictionPolarity.LOWER:
            return -self.values
        return np.array(self.values)


@dataclass(frozen=True)
class RankVector:
    """Ranks ``1..n`` in ascending quality order (mid-ranks under AVERAGE)."""

    ranks: np.ndarray
    tie_policy: TiePolicy = TiePolicy.STRICT

    def __post_init__(self):
        policy = TiePolicy.parse(self.tie_policy)
        dtype = float if policy is TiePolicy.AVERAGE else int
        object.__setattr__(self, "tie_policy", policy)
        object.__setattr__(self, "ranks", _readonly(self.ranks, dtype))

    def __len__(self):
        return len(self.ranks)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.ranks, dtype=dtype)

    def is_permutation(self):
        n = len(self.ranks)
        return np.array_equal(np.sort(self.ranks), np.arange(1, n + 1))


def as_rank_array(ranks):
    """Return a plain numpy view of a :class:`RankVector` or sequence."""
    if isinstance(ranks, RankVector):
        return ranks.ranks
    arr = np.asarray(ranks)
    if arr.ndim != 1:
        raise ValidationError(f"ranks must be one-dimensional, got shape {arr.shape}")
    return arr


def normalize(scores: ScoreSet, pool: Optional[ScoreSet] = None, clamp: bool = True):
    """Map subjective scores onto ``[0, 100]`` with higher meaning better.

    Parameters
    ----------
    scores : ScoreSet
        Scores to transform.
    pool : ScoreSet, optional
        Score collection the scale and bias are fitted on, usually the whole
        database.  Defaults to ``scores``.
    clamp : bool
        Clip results that fall outside ``[0, 100]`` (possible only when
        ``scores`` holds values outside the pool) and emit a
        :class:`PoolRangeWarning`.  When False the mapped values are kept.

    Returns
    -------
    NormalizedScoreSet
    """
    pool = scores if pool is None else pool
    if pool.polarity is not scores.polarity:
        raise ValidationError(
            f"pool polarity {pool.polarity.value} does not match scores polarity "
            f"{scores.polarity.value}"
        )
    if len(pool) == 0:
        raise DegenerateDataError("empty score pool")
    lo = float(np.min(pool.scores))
    hi = float(np.max(pool.scores))
    if not hi > lo:
        raise DegenerateDataError("constant score pool")
    span = hi - lo
    omega = 1.0 / span
    if not np.isfinite(omega):
        raise DegenerateDataError(f"score pool range {span!r} is too small to normalize")
    epsilon = -lo / span

    unit = (scores.scores - lo) / span
    if scores.polarity is ScorePolarity.DMOS:
        unit = 1.0 - unit
    mapped = unit * 100.0
    outside = (mapped < 0.0) | (mapped > 100.0)
    if np.any(outside):
        bad = [scores.ids[i] for i in np.flatnonzero(outside)]
        if clamp:
            warnings.warn(
                f"{len(bad)} score(s) outside the normalization pool, clamped: {bad[:10]}",
                PoolRangeWarning,
                stacklevel=2,
            )
            mapped = np.clip(mapped, 0.0, 100.0)
        else:
            warnings.warn(
                f"{len(bad)} score(s) outside the normalization pool: {bad[:10]}",
                PoolRangeWarning,
                stacklevel=2,
            )
    stddevs = omega * scores.stddevs * 100.0
    return NormalizedScoreSet(mapped, stddevs, omega, epsilon, scores.ids)


def _tied_groups(values):
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    same = np.flatnonzero(sorted_vals[1:] == sorted_vals[:-1])
    positions = set()
    for k in same:
        positions.add(int(order[k]))
        positions.add(int(order[k + 1]))
    return sorted(positions)


def rank_transform(values, tie_policy=TiePolicy.STRICT, ids: Optional[Sequence] = None):
    """Rank values in ascending order so that the smallest receives rank 1.

    ``STRICT`` refuses exact ties, ``STABLE`` breaks them by input position
    and ``AVERAGE`` assigns mid-ranks.

    >>> rank_transform([7, 7, 3], "stable").ranks.tolist()
    [2, 3, 1]
    """
    policy = TiePolicy.parse(tie_policy)
    arr = np.asarray(values, dtype=float)
    _check_finite(arr, "values")
    n = arr.shape[0]
    if n < 2:
        raise ValidationError(f"need at least 2 values to rank, got {n}")
    if policy is TiePolicy.AVERAGE:
        return RankVector(rankdata(arr, method="average"), policy)
    if policy is TiePolicy.STRICT:
        tied = _tied_groups(arr)
        if tied:
            labels = [ids[i] for i in tied] if ids is not None else tied
            raise TiedRanksError(f"tied values under strict tie policy: {labels}", labels)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(n, dtype=int)
    ranks[order] = np.arange(1, n + 1)
    return RankVector(ranks, policy)


class Pairing(NamedTuple):
    """Ground truth and prediction ranks in canonical orientation.

    Items are sorted by ascending normalized subjective quality, so ``p`` is
    always ``[1, ..., n]`` and ``q[i]`` is the prediction's rank of the item
    at ground-truth position ``i``.  ``order`` maps canonical positions back
    to input positions.
    """

    p: RankVector
    q: RankVector
    xhat: NormalizedScoreSet
    order: np.ndarray


def ground_truth_pairing(
    subjective: ScoreSet,
    prediction: PredictionSet,
    pool: Optional[ScoreSet] = None,
    tie_policy=TiePolicy.STRICT,
    clamp: bool = True,
) -> Pairing:
    """Pair subjective scores with one metric's predictions.

    Predictions declared lower-is-better are negated before ranking; their
    raw values are never normalized.
    """
    policy = TiePolicy.parse(tie_policy)
    if policy is TiePolicy.AVERAGE:
        raise ValidationError("ground_truth_pairing needs untied ranks; use strict or stable")
    if subjective.ids != prediction.ids:
        missing = [i for i in subjective.ids if i not in set(prediction.ids)]
        if missing or len(subjective.ids) != len(prediction.ids):
            raise AlignmentError(
                f"prediction {prediction.name!r} is not aligned with the scores; "
                f"missing ids: {missing[:10]}"
            )
        raise AlignmentError(f"prediction {prediction.name!r} ids are in a different order")

    xhat = normalize(subjective, pool, clamp=clamp)
    p_input = rank_transform(xhat.scores, policy, ids=subjective.ids)
    order = np.empty(len(subjective), dtype=int)
    order[p_input.ranks - 1] = np.arange(len(subjective))

    q_input = rank_transform(prediction.oriented(), policy, ids=prediction.ids)
    p = RankVector(np.arange(1, len(subjective) + 1), policy)
    q = RankVector(q_input.ranks[order], policy)
    return Pairing(p, q, xhat.take(order), order)
