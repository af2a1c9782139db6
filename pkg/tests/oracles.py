"""Slow, literal reference implementations used only by the tests.

Plain Python loops over pairs and items, no numpy, so they share no code
path with the package.
"""
import math
from itertools import combinations


def sgn(v):
    if v > 0:
        return 1
    if v < 0:
        return -1
    raise ValueError("sgn undefined at 0")


def discordant_pairs(p, q):
    return sum(1 for i, j in combinations(range(len(p)), 2) if sgn(p[i] - p[j]) != sgn(q[i] - q[j]))


def kendall_tau(p, q):
    n = len(p)
    total = n * (n - 1) // 2
    d = discordant_pairs(p, q)
    return (total - 2 * d) / total


def spearman_shortcut(p, q):
    n = len(p)
    return 1 - 6 * sum((a - b) ** 2 for a, b in zip(p, q)) / (n**3 - n)


def pearson(a, b):
    n = len(a)
    ma = sum(a) / n
    mb = sum(b) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    va = sum((x - ma) ** 2 for x in a)
    vb = sum((y - mb) ** 2 for y in b)
    return cov / math.sqrt(va * vb)


def sigmoid(z):
    return 1.0 / (1.0 + math.exp(-z))


def pwrc(x, q, threshold=0.0, c1=None, uniform=False):
    """Literal double loop over ordered pairs; ``c1=None`` means A = 1."""
    n = len(q)
    p = list(range(1, n + 1))
    raw = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if uniform:
                raw[i, j] = 1.0
            else:
                d = (abs(p[i] - q[i]) + abs(p[j] - q[j])) / (2 * n - 2)
                lvl = (max(p[i], p[j]) - 1) / (n - 1)
                raw[i, j] = math.exp(d) + math.exp(lvl) - 2
    norm = sum(raw.values())
    total = 0.0
    for (i, j), w in raw.items():
        a = 1.0 if c1 is None else sigmoid(c1 * (abs(x[i] - x[j]) - threshold))
        total += a * sgn(p[i] - p[j]) * sgn(q[i] - q[j]) * w / norm
    return total


def delta_d(x, q, N):
    """``x`` in ground-truth order; top-N are the items with the N largest q."""
    n = len(x)
    by_pred = sorted(range(n), key=lambda i: q[i])
    top = by_pred[n - N:]
    rest = by_pred[: n - N]
    return sum(x[i] for i in top) / N - sum(x[i] for i in rest) / (n - N)


def delta_mos(x, q):
    n = len(x)
    return sum(delta_d(x, q, N) for N in range(1, n)) / (n - 1)
