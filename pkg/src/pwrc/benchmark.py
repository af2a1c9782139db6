"""Push-accuracy benchmarks and disagreement analysis.

The push benchmark asks how much better, in subjective score, the items a
metric places at the top are than the rest.  "Top N" always means the ``N``
items with the highest predicted rank, i.e. ``q_i`` in ``{n-N+1, ..., n}``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import NormalizedScoreSet, as_rank_array
from .exceptions import TiedRanksError, ValidationError

__all__ = [
    "PushAccuracy",
    "GroupedEvaluation",
    "SingletonGroupWarning",
    "delta_d_n",
    "delta_mos",
    "grouped_mean",
    "disagreement_count",
    "rank_metrics",
    "value_disagreements",
]


class SingletonGroupWarning(RuntimeWarning):
    """A content group had too few items for a rank correlation."""


@dataclass(frozen=True)
class PushAccuracy:
    per_n: np.ndarray
    mean: float


@dataclass(frozen=True)
class GroupedEvaluation:
    per_group: dict
    mean: float


def _inputs(scores, q):
    x = scores.scores if isinstance(scores, NormalizedScoreSet) else np.asarray(scores, dtype=float)
    q = as_rank_array(q)
    n = x.shape[0]
    if q.shape[0] != n:
        raise ValidationError(f"{n} scores for {q.shape[0]} ranks")
    if n < 2:
        raise ValidationError("need at least 2 items")
    if not np.array_equal(np.sort(q), np.arange(1, n + 1)):
        raise TiedRanksError("q must be an untied permutation of 1..n")
    return x, q, n


def _delta(x, q, n, N):
    top = q >= n - N + 1
    return float(np.mean(x[top]) - np.mean(x[~top]))


def delta_d_n(scores, q, N: int) -> float:
    """Mean score of the predicted top-``N`` minus mean score of the rest.

    ``scores`` are in canonical order (position ``i`` is ground-truth rank
    ``i + 1``).  Pass raw scores instead of a normalized set to work on the
    source scale.
    """
    x, q, n = _inputs(scores, q)
    if not 1 <= N <= n - 1:
        raise ValidationError(f"N must lie in [1, {n - 1}], got {N}")
    return _delta(x, q, n, N)


def delta_mos(scores, q) -> PushAccuracy:
    """Average of :func:`delta_d_n` over ``N = 1 .. n-1``."""
    x, q, n = _inputs(scores, q)
    per_n = np.array([_delta(x, q, n, N) for N in range(1, n)])
    return PushAccuracy(per_n, float(np.mean(per_n)))


def grouped_mean(per_group: Mapping[str, float]) -> GroupedEvaluation:
    """Unweighted mean over content groups; every group counts once."""
    if not per_group:
        raise ValidationError("no groups to average")
    values = dict(per_group)
    # sorted keys fix the summation order independent of insertion order
    ordered = [float(values[k]) for k in sorted(values)]
    return GroupedEvaluation(values, float(np.mean(ordered)))


def disagreement_count(indicator_ranking: Sequence[str], benchmark_ranking: Sequence[str]) -> int:
    """Unordered metric pairs that the two rankings order differently."""
    a = list(indicator_ranking)
    b = list(benchmark_ranking)
    if len(set(a)) != len(a) or len(set(b)) != len(b):
        raise ValidationError("rankings must not repeat a metric")
    if set(a) != set(b):
        raise ValidationError(
            f"rankings cover different metrics: {sorted(set(a) ^ set(b))}"
        )
    pos = {m: i for i, m in enumerate(b)}
    return sum(
        1 for m1, m2 in itertools.combinations(a, 2) if pos[m1] > pos[m2]
    )


def rank_metrics(values: Mapping[str, float], higher_is_better: bool = True) -> list:
    """Metric names ordered best first; equal values fall back to name order."""
    sign = -1.0 if higher_is_better else 1.0
    return sorted(values, key=lambda m: (sign * float(values[m]), m))


def value_disagreements(indicator: Mapping[str, float], benchmark: Mapping[str, float]) -> int:
    """Disagreement count on raw values rather than on orderings.

    A pair counts when the two orderings differ in sign, including when one
    side ties a pair the other side separates.
    """
    if set(indicator) != set(benchmark):
        raise ValidationError(
            f"value maps cover different metrics: {sorted(set(indicator) ^ set(benchmark))}"
        )
    names = sorted(indicator)
    count = 0
    for m1, m2 in itertools.combinations(names, 2):
        s1 = np.sign(indicator[m1] - indicator[m2])
        s2 = np.sign(benchmark[m1] - benchmark[m2])
        if s1 != s2:
            count += 1
    return count

