"""Naive reference implementations used as independent test oracles.

Everything here is a direct loop transliteration of each measure's
defining formula, deliberately ignoring the optimized package code paths.
Keep these slow and obvious.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def naive_medoids(D, labels) -> dict[int, int]:
    """Per class: member minimizing the sum of distances to the other
    members, ties to the smallest sample index."""
    meds = {}
    for c in sorted(set(int(v) for v in labels)):
        members = [i for i in range(len(labels)) if labels[i] == c]
        best, best_sum = None, None
        for i in members:
            s = sum(D[i][j] for j in members if j != i)
            if best_sum is None or s < best_sum:
                best, best_sum = i, s
        meds[c] = best
    return meds


def naive_fisher(D, labels) -> float:
    meds = naive_medoids(D, labels)
    classes = sorted(meds)
    pair_sum = 0.0
    pairs = 0
    for a, b in itertools.combinations(classes, 2):
        pair_sum += D[meds[a]][meds[b]]
        pairs += 1
    num = pair_sum / pairs
    den = sum(D[i][meds[int(labels[i])]] for i in range(len(labels))) / len(labels)
    if den == 0.0:
        return math.inf
    return num / den


def naive_rs(D, labels) -> tuple[float, int]:
    n = len(labels)
    classes = sorted(set(int(v) for v in labels))
    ratios = []
    excluded = 0
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        a = sum(D[i][j] for j in own) / len(own)
        b = min(
            sum(D[i][j] for j in range(n) if labels[j] == c)
            / sum(1 for j in range(n) if labels[j] == c)
            for c in classes
            if c != labels[i]
        )
        if a == 0.0:
            excluded += 1
            continue
        ratios.append(b / a)
    if not ratios:
        return math.inf, excluded
    return sum(ratios) / len(ratios), excluded


def naive_rsm(D, labels) -> tuple[float, int]:
    meds = naive_medoids(D, labels)
    classes = sorted(meds)
    ratios = []
    excluded = 0
    for i in range(len(labels)):
        own = D[i][meds[int(labels[i])]]
        other = min(D[i][meds[c]] for c in classes if c != labels[i])
        if own == 0.0:
            excluded += 1
            continue
        ratios.append(other / own)
    if not ratios:
        return math.inf, excluded
    return sum(ratios) / len(ratios), excluded


def naive_rank_lists(D, labels) -> list[list[int]]:
    n = len(labels)
    out = []
    for i in range(n):
        others = sorted((j for j in range(n) if j != i), key=lambda j: (D[i][j], j))
        out.append([r + 1 for r, j in enumerate(others) if labels[j] == labels[i]])
    return out


def naive_rank(D, labels) -> float:
    aps = []
    for ranks in naive_rank_lists(D, labels):
        ap = sum((j + 1) / ranks[j] for j in range(len(ranks))) / len(ranks)
        aps.append(ap)
    return sum(aps) / len(aps)


def naive_rankm(D, labels) -> float:
    meds = naive_medoids(D, labels)
    classes = sorted(meds)
    n, k = len(labels), len(classes)
    penalty = 0.0
    for i in range(n):
        order = sorted(classes, key=lambda c: (D[i][meds[c]], c))
        rank = order.index(int(labels[i])) + 1
        penalty += 1.0 - 1.0 / rank
    return 1.0 - (k / (n * (k - 1.0))) * penalty


def naive_bhg(D, labels) -> float:
    n = len(labels)
    within = [
        D[i][j] for i in range(n) for j in range(i + 1, n) if labels[i] == labels[j]
    ]
    between = [
        D[i][j] for i in range(n) for j in range(i + 1, n) if labels[i] != labels[j]
    ]
    n_plus = sum(1 for w in within for b in between if w < b)
    n_minus = sum(1 for w in within for b in between if w > b)
    if n_minus == 0:
        return math.inf
    return n_plus / n_minus


def naive_c_index(D, labels) -> float:
    n = len(labels)
    all_pairs = sorted(D[i][j] for i in range(n) for j in range(i + 1, n))
    within = [
        D[i][j] for i in range(n) for j in range(i + 1, n) if labels[i] == labels[j]
    ]
    N = len(within)
    d_w = sum(within)
    d_min = sum(all_pairs[:N])
    d_max = sum(all_pairs[-N:])
    if d_w - d_min <= 16.0 * np.finfo(np.float64).eps * max(d_w, d_max, 1.0):
        return math.inf
    return (d_max - d_min) / (d_w - d_min)


NAIVE = {
    "fisher": naive_fisher,
    "rs": lambda D, y: naive_rs(D, y)[0],
    "rsm": lambda D, y: naive_rsm(D, y)[0],
    "rank": naive_rank,
    "rankm": naive_rankm,
    "bhg": naive_bhg,
    "cindex": naive_c_index,
}


def random_small_instance(rng: np.random.Generator, n_max: int = 10):
    """A random dataset with n <= n_max where every class has >= 2 members."""
    n = int(rng.integers(4, n_max + 1))
    k = int(rng.integers(2, n // 2 + 1))
    sizes = np.full(k, 2)
    for _ in range(n - 2 * k):
        sizes[int(rng.integers(0, k))] += 1
    labels = np.repeat(np.arange(k), sizes)
    X = rng.normal(0.0, 2.0, size=(n, int(rng.integers(1, 4))))
    from granulometry import DistanceConfig, pairwise_distances

    D = pairwise_distances(X, DistanceConfig("euclidean", normalize=False))
    return D, labels
