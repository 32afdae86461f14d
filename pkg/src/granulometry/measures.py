"""Granularity measures over a distance matrix and a class labeling.

Every measure maps ``(distances, labels)`` to a :class:`MeasureResult`
whose ``value`` grows as the classes become easier to tell apart (coarser)
and shrinks as they blur together (finer). Perfectly separated inputs can
make a denominator vanish; those results carry ``value = inf`` in memory
and serialize with an explicit ``infinite`` flag instead of a float Inf.

Deterministic tie-breaking throughout: equal distances rank the smaller
sample index first, and equal medoid distances rank the smaller class id
first. Results are therefore identical run to run.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .dataset import (
    ClassIndex,
    DistanceConfig,
    MeasureError,
    ValidationError,
    as_distance_values,
    warn_on_cross_class_duplicates,
)
from .distance import MedoidDistances, pairwise_distances

#: Largest within-pair x between-pair combination count that is counted
#: exactly; beyond it the gamma index is estimated by seeded sampling.
BHG_EXACT_LIMIT = 10**8

#: Default number of sampled pair combinations for the estimated gamma.
BHG_DEFAULT_BUDGET = 10**7

MEASURE_IDS = ("fisher", "rs", "rsm", "rank", "rankm", "bhg", "cindex")

#: The five fast measures used by default in sweeps and assessments.
CORE_MEASURE_IDS = ("fisher", "rs", "rsm", "rank", "rankm")

#: Measures computable from sample-to-medoid distances alone, without the
#: full n-by-n matrix.
MEDOID_ROUTE_IDS = ("fisher", "rsm", "rankm")

#: Sample count above which ``measure_dataset`` switches medoid-route
#: measures to the O(n*k) path, and above which a full matrix is refused.
MEDOID_ROUTE_MIN_N = 20_000
FULL_MATRIX_MAX_N = 32_768


@dataclass(frozen=True)
class MeasureResult:
    """A measure value plus the context needed to interpret it."""

    measure: str
    value: float
    n: int
    k: int
    excluded_samples: int = 0
    approximate: bool = False
    runtime_ms: float = 0.0
    distance: DistanceConfig | None = None

    def __post_init__(self):
        if math.isnan(self.value):
            raise ValueError("measure value must not be NaN")

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)

    def to_dict(self, *, runtime_ms: float | None = None) -> dict:
        """JSON-ready form; infinite values serialize as null + flag."""
        return {
            "measure": self.measure,
            "value": None if self.infinite else float(self.value),
            "infinite": self.infinite,
            "approximate": bool(self.approximate),
            "n": int(self.n),
            "k": int(self.k),
            "excluded_samples": int(self.excluded_samples),
            "runtime_ms": float(self.runtime_ms if runtime_ms is None else runtime_ms),
            "distance": self.distance.to_dict() if self.distance else None,
        }


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        result = fn(*args, **kwargs)
        return replace(result, runtime_ms=(time.perf_counter() - t0) * 1e3)

    return wrapper


def _prepare(distances, labels) -> tuple[np.ndarray, ClassIndex]:
    V = as_distance_values(distances)
    index = labels if isinstance(labels, ClassIndex) else ClassIndex.from_labels(labels)
    if index.n != V.shape[0]:
        raise ValidationError(
            f"distance matrix has {V.shape[0]} rows but labeling has {index.n} samples"
        )
    return V, index


# ---------------------------------------------------------------------------
# Medoid-based measures (shared cores usable with or without a full matrix)
# ---------------------------------------------------------------------------


def _fisher_core(md: MedoidDistances, index: ClassIndex) -> MeasureResult:
    n, k = index.n, index.k
    iu = np.triu_indices(k, k=1)
    between_mean = float(md.between[iu].mean())
    own = md.to_medoids[np.arange(n), index.labels]
    within_mean = float(own.mean())
    if within_mean == 0.0:
        return MeasureResult("fisher", math.inf, n, k)
    return MeasureResult("fisher", between_mean / within_mean, n, k)


def _rsm_core(md: MedoidDistances, index: ClassIndex) -> MeasureResult:
    n, k = index.n, index.k
    rows = np.arange(n)
    own = md.to_medoids[rows, index.labels]
    others = md.to_medoids.copy()
    others[rows, index.labels] = np.inf
    nearest_other = others.min(axis=1)
    keep = own > 0.0
    excluded = int(n - np.count_nonzero(keep))
    if excluded == n:
        return MeasureResult("rsm", math.inf, n, k, excluded_samples=excluded)
    value = float(np.mean(nearest_other[keep] / own[keep]))
    return MeasureResult("rsm", value, n, k, excluded_samples=excluded)


def medoid_ranking_from_medoid_distances(to_medoids, labels) -> MeasureResult:
    """Medoid-ranking index from a precomputed (n, k) medoid-distance matrix.

    For each sample, the rank of its own class medoid among all k medoids
    (nearest = 1, distance ties to the smaller class id) is turned into a
    penalty 1 - 1/rank; the index is 1 minus the normalized penalty sum and
    always lies in [0, 1].
    """
    S = np.asarray(to_medoids, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if S.ndim != 2 or y.shape != (S.shape[0],):
        raise ValidationError("to_medoids must be (n, k) with one label per row")
    n, k = S.shape
    if k < 2:
        raise MeasureError("medoid ranking requires at least 2 classes")
    own = S[np.arange(n), y][:, None]
    closer = (S < own).sum(axis=1)
    tied_before = ((S == own) & (np.arange(k)[None, :] < y[:, None])).sum(axis=1)
    ranks = closer + tied_before + 1
    penalty = float(np.sum(1.0 - 1.0 / ranks))
    value = 1.0 - (k / (n * (k - 1.0))) * penalty
    return MeasureResult("rankm", value, n, k)


def _rankm_core(md: MedoidDistances, index: ClassIndex) -> MeasureResult:
    return medoid_ranking_from_medoid_distances(md.to_medoids, index.labels)


@_timed
def fisher_ratio(distances, labels) -> MeasureResult:
    """Mean between-class medoid distance over mean distance to own medoid.

    Parameters
    ----------
    distances : array of shape (n, n) or DistanceMatrix
        Pairwise sample distances.
    labels : array of shape (n,) or ClassIndex
        Dense class ids in {0..k-1}.

    The numerator averages the k*(k-1)/2 medoid pair distances; the
    denominator averages every sample's distance to its own class medoid.
    When every sample coincides with its medoid the result is the infinity
    sentinel. O(n^2) time.
    """
    V, index = _prepare(distances, labels)
    return _fisher_core(MedoidDistances.from_distance_matrix(V, index), index)


@_timed
def medoid_silhouette_ratio(distances, labels) -> MeasureResult:
    """Mean ratio of nearest-other-medoid distance to own-medoid distance.

    Samples at distance zero from their own medoid (always at least the
    medoids themselves) are excluded from the mean and reported in
    ``excluded_samples``; if every sample is excluded the result is the
    infinity sentinel. O(n*k) once medoid distances are available.
    """
    V, index = _prepare(distances, labels)
    return _rsm_core(MedoidDistances.from_distance_matrix(V, index), index)


@_timed
def medoid_ranking_index(distances, labels) -> MeasureResult:
    """Ranking index over class medoids; value in [0, 1].

    See :func:`medoid_ranking_from_medoid_distances` for the formula.
    O(n*k) once medoid distances are available.
    """
    V, index = _prepare(distances, labels)
    return _rankm_core(MedoidDistances.from_distance_matrix(V, index), index)


@_timed
def fisher_ratio_from_features(features, labels, config: DistanceConfig = DistanceConfig()) -> MeasureResult:
    """Fisher ratio without materializing the full distance matrix."""
    index = labels if isinstance(labels, ClassIndex) else ClassIndex.from_labels(labels)
    md = MedoidDistances.from_features(features, index, config)
    return replace(_fisher_core(md, index), distance=config)


@_timed
def medoid_silhouette_ratio_from_features(features, labels, config: DistanceConfig = DistanceConfig()) -> MeasureResult:
    """Medoid silhouette ratio without materializing the full matrix."""
    index = labels if isinstance(labels, ClassIndex) else ClassIndex.from_labels(labels)
    md = MedoidDistances.from_features(features, index, config)
    return replace(_rsm_core(md, index), distance=config)


@_timed
def medoid_ranking_index_from_features(features, labels, config: DistanceConfig = DistanceConfig()) -> MeasureResult:
    """Medoid ranking index without materializing the full matrix."""
    index = labels if isinstance(labels, ClassIndex) else ClassIndex.from_labels(labels)
    md = MedoidDistances.from_features(features, index, config)
    return replace(_rankm_core(md, index), distance=config)


# ---------------------------------------------------------------------------
# Full-matrix measures
# ---------------------------------------------------------------------------


@_timed
def silhouette_ratio(distances, labels) -> MeasureResult:
    """Mean over samples of b/a: nearest-other-class mean distance over
    mean intra-class distance (self excluded).

    Every class must have at least 2 members, otherwise a is undefined.
    Samples with a == 0 are excluded from the mean (and counted); all
    excluded yields the infinity sentinel. O(n^2) time.
    """
    V, index = _prepare(distances, labels)
    n, k = index.n, index.k
    if int(index.sizes.min()) < 2:
        raise MeasureError("singleton class unsupported by RS")
    M = np.empty((n, k), dtype=np.float64)
    for c, members in enumerate(index.members):
        M[:, c] = V[:, members].mean(axis=1)
    rows = np.arange(n)
    y = index.labels
    sizes = index.sizes[y].astype(np.float64)
    # own-class mean includes the zero self-distance; rescale to exclude it
    a = M[rows, y] * sizes / (sizes - 1.0)
    M[rows, y] = np.inf  # a holds a copy; reuse M for the other-class min
    b = M.min(axis=1)
    keep = a > 0.0
    excluded = int(n - np.count_nonzero(keep))
    if excluded == n:
        return MeasureResult("rs", math.inf, n, k, excluded_samples=excluded)
    value = float(np.mean(b[keep] / a[keep]))
    return MeasureResult("rs", value, n, k, excluded_samples=excluded)


def neighbor_order(distances) -> np.ndarray:
    """(n, n-1) neighbor indices per row, nearest first, ties to the
    smaller sample index, self excluded."""
    V = as_distance_values(distances)
    W = V.copy()
    np.fill_diagonal(W, -1.0)  # self sorts strictly first, then drops
    order = np.argsort(W, axis=1, kind="stable")
    return order[:, 1:]


def rank_lists(distances, labels) -> list[np.ndarray]:
    """Per sample, the 1-based ranks of its same-class peers among all
    other n-1 samples sorted by distance (rank 1 = nearest)."""
    V, index = _prepare(distances, labels)
    order = neighbor_order(V)
    y = index.labels
    return [np.flatnonzero(y[order[i]] == y[i]) + 1 for i in range(index.n)]


def ranking_from_neighbor_order(order, labels) -> MeasureResult:
    """Ranking index from a precomputed neighbor order (see
    :func:`neighbor_order`). Lets callers that re-label a fixed geometry
    amortize the O(n^2 log n) sort."""
    index = labels if isinstance(labels, ClassIndex) else ClassIndex.from_labels(labels)
    if int(index.sizes.min()) < 2:
        raise MeasureError("singleton class unsupported by Rank")
    n, k = index.n, index.k
    y = index.labels
    rel = y[order] == y[:, None]
    counts = rel.sum(axis=1)
    positions = np.arange(1, n, dtype=np.float64)
    precision = np.cumsum(rel, axis=1) / positions[None, :]
    ap = (precision * rel).sum(axis=1) / counts
    return MeasureResult("rank", float(ap.mean()), n, k)


@_timed
def ranking_index(distances, labels) -> MeasureResult:
    """Mean normalized average precision of same-class retrieval.

    Each sample ranks all others by distance; its average precision is the
    mean of j / rank_j over its same-class peers (j-th nearest peer at
    overall rank rank_j). The index is the mean AP over samples and lies
    in (0, 1]. Every class needs at least 2 members. O(n^2 log n) time.
    """
    V, index = _prepare(distances, labels)
    if int(index.sizes.min()) < 2:
        raise MeasureError("singleton class unsupported by Rank")
    return ranking_from_neighbor_order(neighbor_order(V), index)


@_timed
def baker_hubert_gamma(distances, labels, *, budget: int | None = None, seed: int | None = None) -> MeasureResult:
    """Concordant over discordant within/between distance comparisons.

    Counts, over all (within-class pair, between-class pair) combinations,
    how often the within distance is strictly smaller (concordant) versus
    strictly larger (discordant); equal distances count for neither. The
    value is concordant/discordant, with the infinity sentinel when no
    discordant combination exists.

    Exact when the combination count is at most ``BHG_EXACT_LIMIT``;
    otherwise estimated from ``budget`` seeded uniform samples and flagged
    ``approximate``.
    """
    V, index = _prepare(distances, labels)
    n, k = index.n, index.k
    iu = np.triu_indices(n, k=1)
    same = index.labels[iu[0]] == index.labels[iu[1]]
    vals = V[iu]
    within = vals[same]
    between = vals[~same]
    n_within, n_between = int(within.size), int(between.size)
    if n_within == 0:
        raise MeasureError("gamma requires at least one within-class pair")
    if n_between == 0:
        raise MeasureError("gamma requires at least one between-class pair")

    if n_within * n_between <= BHG_EXACT_LIMIT:
        bs = np.sort(between)
        lo = np.searchsorted(bs, within, side="left")
        hi = np.searchsorted(bs, within, side="right")
        n_minus = int(lo.sum())
        n_plus = int((n_between - hi).sum())
        approximate = False
    else:
        if budget is None:
            budget = BHG_DEFAULT_BUDGET
        if budget < 1:
            raise ValidationError("gamma sampling budget must be positive")
        if seed is None:
            raise ValidationError("seed required for sampled gamma computation")
        rng = np.random.default_rng([0x6A11A, seed])
        n_plus = n_minus = 0
        remaining = int(budget)
        while remaining > 0:
            m = min(remaining, 1 << 20)
            wv = within[rng.integers(0, n_within, m)]
            bv = between[rng.integers(0, n_between, m)]
            n_plus += int(np.count_nonzero(wv < bv))
            n_minus += int(np.count_nonzero(wv > bv))
            remaining -= m
        approximate = True

    if n_minus == 0:
        return MeasureResult("bhg", math.inf, n, k, approximate=approximate)
    return MeasureResult("bhg", n_plus / n_minus, n, k, approximate=approximate)


@_timed
def c_index(distances, labels) -> MeasureResult:
    """Spread of the largest vs smallest pair-distance sums against the
    within-class pair-distance sum.

    With N within-class pairs, value = (Dmax - Dmin) / (Dw - Dmin) where
    Dmin/Dmax sum the N smallest/largest pairwise distances overall and Dw
    sums the within-class pair distances. Dw == Dmin (the within pairs are
    exactly the N closest) yields the infinity sentinel. O(n^2 log n).
    """
    V, index = _prepare(distances, labels)
    n, k = index.n, index.k
    iu = np.triu_indices(n, k=1)
    same = index.labels[iu[0]] == index.labels[iu[1]]
    vals = V[iu]
    n_within = int(np.count_nonzero(same))
    if n_within == 0:
        raise MeasureError("c-index requires at least one within-class pair")
    d_w = float(vals[same].sum())
    sv = np.sort(vals)
    d_min = float(sv[:n_within].sum())
    d_max = float(sv[-n_within:].sum())
    denom = d_w - d_min
    # Equality of Dw and Dmin means summing the same multiset in two orders,
    # which float addition does not make exact; anything this close is the
    # degenerate perfectly-separated case.
    if denom <= 16.0 * np.finfo(np.float64).eps * max(d_w, d_max, 1.0):
        return MeasureResult("cindex", math.inf, n, k)
    return MeasureResult("cindex", (d_max - d_min) / denom, n, k)


# ---------------------------------------------------------------------------
# Registry and dataset-level driver
# ---------------------------------------------------------------------------

MEASURES = {
    "fisher": fisher_ratio,
    "rs": silhouette_ratio,
    "rsm": medoid_silhouette_ratio,
    "rank": ranking_index,
    "rankm": medoid_ranking_index,
    "bhg": baker_hubert_gamma,
    "cindex": c_index,
}

_FEATURE_ROUTE = {
    "fisher": fisher_ratio_from_features,
    "rsm": medoid_silhouette_ratio_from_features,
    "rankm": medoid_ranking_index_from_features,
}


def resolve_measure(measure, *, seed: int | None = None, budget: int | None = None):
    """Return a ``(distances, labels) -> MeasureResult`` callable.

    ``measure`` may already be such a callable (used e.g. by the axiom
    harness to test deliberately broken measures) or one of the ids in
    ``MEASURE_IDS``.
    """
    if callable(measure):
        return measure
    if measure not in MEASURES:
        raise ValidationError(f"unknown measure {measure!r}; expected one of {MEASURE_IDS}")
    if measure == "bhg":
        return functools.partial(baker_hubert_gamma, seed=seed, budget=budget)
    return MEASURES[measure]


def measure_dataset(
    *,
    features=None,
    labels=None,
    distances=None,
    config: DistanceConfig = DistanceConfig(),
    measures=("rankm",),
    seed: int | None = None,
    budget: int | None = None,
    threads: int = 1,
    route: str = "auto",
) -> list[MeasureResult]:
    """Compute several measures on one dataset, sharing the expensive parts.

    Either ``features`` (distances computed per ``config``) or a precomputed
    ``distances`` matrix must be given. With features and ``route='auto'``,
    measures that only need medoid distances switch to the O(n*k) path on
    large inputs instead of materializing the n-by-n matrix; full-matrix
    measures on more than ``FULL_MATRIX_MAX_N`` samples are refused.
    """
    if (features is None) == (distances is None):
        raise ValidationError("provide exactly one of features or distances")
    if route not in ("auto", "full", "medoid"):
        raise ValidationError(f"unknown route {route!r}")
    for m in measures:
        if m not in MEASURES:
            raise ValidationError(f"unknown measure {m!r}; expected one of {MEASURE_IDS}")

    index = labels if isinstance(labels, ClassIndex) else ClassIndex.from_labels(labels)
    n = index.n
    echo = config if features is not None else None

    full_needed = [m for m in measures if m not in MEDOID_ROUTE_IDS]
    if features is not None:
        use_medoid_route = route == "medoid" or (route == "auto" and n > MEDOID_ROUTE_MIN_N)
    else:
        use_medoid_route = False
    if route == "full":
        use_medoid_route = False

    V = None
    if distances is not None:
        V = as_distance_values(distances)
        if V.shape[0] != n:
            raise ValidationError("distance matrix size does not match labels")
    elif full_needed or not use_medoid_route:
        if n > FULL_MATRIX_MAX_N:
            bad = full_needed or list(measures)
            raise ValidationError(
                f"{n} samples need a full distance matrix for {bad}; "
                f"limit is {FULL_MATRIX_MAX_N} (use medoid-route measures: "
                f"{', '.join(MEDOID_ROUTE_IDS)})"
            )
        V = pairwise_distances(features, config, threads=threads)

    if V is not None:
        warn_on_cross_class_duplicates(V, index.labels)

    md = None
    results = []
    for m in measures:
        t0 = time.perf_counter()
        if m in MEDOID_ROUTE_IDS:
            if md is None:
                md = (
                    MedoidDistances.from_features(features, index, config)
                    if V is None
                    else MedoidDistances.from_distance_matrix(V, index)
                )
            core = {"fisher": _fisher_core, "rsm": _rsm_core, "rankm": _rankm_core}[m]
            res = core(md, index)
        else:
            res = resolve_measure(m, seed=seed, budget=budget)(V, index)
        elapsed = (time.perf_counter() - t0) * 1e3
        results.append(replace(res, runtime_ms=elapsed, distance=echo))
    return results
