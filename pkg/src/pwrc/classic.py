"""Classic rank correlation: the generalized coefficient, Spearman and Kendall.

All functions accept :class:`~pwrc.core.RankVector` objects or plain integer
sequences.  The generalized coefficient sums over all ordered pairs, where
the double counting cancels; Kendall's tau and the mistaken-pair count work
on unordered pairs.
"""
from __future__ import annotations

import numpy as np

from .core import as_rank_array
from .exceptions import DegenerateDataError, TiedRanksError, ValidationError

__all__ = [
    "PairwiseCorrelates",
    "generalized_gamma",
    "rank_difference_correlates",
    "sign_correlates",
    "spearman_rho",
    "spearman_rho_general",
    "spearman_rho_untied",
    "kendall_tau",
    "mistaken_pair_count",
]


class PairwiseCorrelates:
    """Pair of anti-symmetric ``n x n`` matrices fed to :func:`generalized_gamma`."""

    def __init__(self, a, b, atol=0.0):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
            raise ValidationError(f"correlates must be equal square matrices, got {a.shape} and {b.shape}")
        for name, m in (("a", a), ("b", b)):
            if not np.allclose(m, -m.T, rtol=0.0, atol=atol):
                raise ValidationError(f"correlate matrix {name} is not anti-symmetric")
        self.a = a
        self.b = b

    @classmethod
    def from_ranks(cls, p, q, kind="difference"):
        """Build correlates from two rank vectors.

        ``kind="difference"`` gives Spearman's ``p_i - p_j``; ``kind="sign"``
        gives Kendall's ``sgn(p_i - p_j)``.
        """
        builders = {"difference": rank_difference_correlates, "sign": sign_correlates}
        if kind not in builders:
            raise ValidationError(f"unknown correlate kind {kind!r}")
        build = builders[kind]
        return cls(build(p), build(q))


def rank_difference_correlates(ranks):
    r = np.asarray(as_rank_array(ranks), dtype=float)
    return r[:, None] - r[None, :]


def sign_correlates(ranks):
    r = np.asarray(as_rank_array(ranks), dtype=float)
    return np.sign(r[:, None] - r[None, :])


def generalized_gamma(correlates: PairwiseCorrelates) -> float:
    """Kendall's generalized correlation coefficient.

    ``sum(a * b) / sqrt(sum(a**2) * sum(b**2))`` over all ``i, j``.
    """
    a, b = correlates.a, correlates.b
    saa = float(np.sum(a * a))
    sbb = float(np.sum(b * b))
    if saa == 0.0 or sbb == 0.0:
        raise DegenerateDataError("degenerate correlates")
    return float(np.sum(a * b)) / np.sqrt(saa * sbb)


def _pair(p, q):
    p = as_rank_array(p)
    q = as_rank_array(q)
    if p.shape != q.shape:
        raise ValidationError(f"rank vectors differ in length: {p.shape[0]} vs {q.shape[0]}")
    if p.shape[0] < 2:
        raise ValidationError(f"need at least 2 ranks, got {p.shape[0]}")
    return p, q


def _require_untied(r, what):
    if np.unique(r).size != r.size:
        raise TiedRanksError(f"{what} contains tied ranks; sign comparisons are undefined at zero")


def _is_untied_permutation(r):
    n = r.shape[0]
    return np.array_equal(np.sort(r), np.arange(1, n + 1))


def spearman_rho_general(p, q) -> float:
    """Spearman's rho as the generalized coefficient of rank differences.

    Valid with mid-ranks.
    """
    p, q = _pair(p, q)
    return generalized_gamma(
        PairwiseCorrelates(rank_difference_correlates(p), rank_difference_correlates(q))
    )


def spearman_rho_untied(p, q) -> float:
    """The ``1 - 6 * sum(d**2) / (n**3 - n)`` shortcut; exact only without ties."""
    p, q = _pair(p, q)
    if not (_is_untied_permutation(p) and _is_untied_permutation(q)):
        raise TiedRanksError("the sum-of-squared-differences form needs untied permutations of 1..n")
    n = p.shape[0]
    d = p.astype(np.int64) - q.astype(np.int64)
    return 1.0 - 6.0 * float(np.sum(d * d)) / (n**3 - n)


def spearman_rho(p, q) -> float:
    """Spearman's rank correlation.

    Untied permutations use the squared-difference shortcut; anything else
    (mid-ranks from the AVERAGE tie policy) falls back to the general form.
    No tau-b style correction is applied.
    """
    p, q = _pair(p, q)
    if _is_untied_permutation(p) and _is_untied_permutation(q):
        return spearman_rho_untied(p, q)
    return spearman_rho_general(p, q)


def kendall_tau(p, q) -> float:
    """Kendall's tau, ``2 / (n**2 - n)`` times the sum of sign products.

    The sum runs over unordered pairs; summing over both orientations would
    double the value.
    """
    p, q = _pair(p, q)
    _require_untied(p, "p")
    _require_untied(q, "q")
    n = p.shape[0]
    s = sign_correlates(p) * sign_correlates(q)
    return 2.0 / (n * n - n) * float(np.sum(np.triu(s, k=1)))


def mistaken_pair_count(p, q) -> int:
    """Number of discordant unordered pairs, between 0 and ``n(n-1)/2``."""
    p, q = _pair(p, q)
    _require_untied(p, "p")
    _require_untied(q, "q")
    s = sign_correlates(p) * sign_correlates(q)
    return int(np.count_nonzero(np.triu(s < 0, k=1)))
