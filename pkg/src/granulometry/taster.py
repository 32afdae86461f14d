"""Class-subset extraction: find the hardest and easiest class subsets.

The pairwise table holds a two-class granularity value for every class
pair (the measure computed on the restriction to those two classes, with
medoids recomputed there). Greedy selection then grows a coarse subset by
maximizing mean pairwise granularity, or a fine subset by minimizing the
minimum, from a seed of the lowest-granularity pairs. A seeded random
subset serves as the baseline.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .dataset import (
    ClassIndex,
    DistanceConfig,
    GranulometryError,
    ValidationError,
    _freeze,
    as_distance_values,
    dense_labels,
    restrict_to_classes,
)
from .distance import pairwise_distances
from .measures import MeasureResult, resolve_measure

_RANDOM_SALT = 0x7A57

DEFAULT_MEASURE = "rankm"
DEFAULT_TARGET_FRACTION = 0.25
DEFAULT_SEED_FRACTION = 0.10


def default_target_size(k: int, fraction: float = DEFAULT_TARGET_FRACTION) -> int:
    """Round-half-up of fraction * k."""
    return int(math.floor(fraction * k + 0.5))


def seed_target_size(k: int, seed_fraction: float = DEFAULT_SEED_FRACTION) -> int:
    return int(math.ceil(seed_fraction * k))


@dataclass(frozen=True)
class ClassPairTable:
    """Symmetric k-by-k table of two-class granularity values.

    The diagonal is undefined (NaN sentinel). Off-diagonal entries are
    finite or +inf; a pair whose measure errors out or hits the infinity
    sentinel is recorded as +inf rather than aborting the table.
    """

    values: np.ndarray
    measure: str

    @property
    def k(self) -> int:
        return int(self.values.shape[0])

    def entry(self, a: int, b: int) -> float:
        if a == b:
            raise ValidationError("table diagonal is undefined")
        return float(self.values[a, b])

    def pairs_ascending(self) -> list[tuple[float, int, int]]:
        """(value, a, b) for a < b, sorted ascending, ties lexicographic."""
        out = [
            (float(self.values[a, b]), a, b)
            for a in range(self.k)
            for b in range(a + 1, self.k)
        ]
        out.sort(key=lambda t: (t[0], t[1], t[2]))
        return out

    def to_csv(self, class_ids=None) -> str:
        ids = list(range(self.k)) if class_ids is None else [int(c) for c in class_ids]
        lines = ["class," + ",".join(str(c) for c in ids)]
        for a in range(self.k):
            cells = []
            for b in range(self.k):
                if a == b:
                    cells.append("")
                elif math.isinf(self.values[a, b]):
                    cells.append("inf")
                else:
                    cells.append(repr(float(self.values[a, b])))
            lines.append(f"{ids[a]}," + ",".join(cells))
        return "\n".join(lines) + "\n"


def pairwise_class_granularity(
    distances,
    labels,
    measure: str = DEFAULT_MEASURE,
    seed: int | None = None,
) -> ClassPairTable:
    """Two-class granularity for every class pair.

    Each entry restricts the dataset to the two classes and recomputes the
    measure (and its medoids) on that restriction, treating the pair as a
    dataset of its own.
    """
    V = as_distance_values(distances)
    index = labels if isinstance(labels, ClassIndex) else ClassIndex.from_labels(labels)
    fn = resolve_measure(measure, seed=seed)
    k = index.k
    table = np.full((k, k), np.nan, dtype=np.float64)
    for a in range(k):
        for b in range(a + 1, k):
            idx, sub_labels = restrict_to_classes(index.labels, (a, b))
            sub = V[np.ix_(idx, idx)]
            try:
                value = fn(sub, sub_labels).value
            except GranulometryError:
                value = math.inf
            table[a, b] = table[b, a] = value
    return ClassPairTable(values=_freeze(table), measure=measure if isinstance(measure, str) else "custom")


@dataclass(frozen=True)
class TasterSelection:
    """An ordered class subset with its per-step granularity trace.

    ``classes`` are dense class ids in selection order. ``trace`` holds the
    mean pairwise table value of the growing selection after each greedy
    addition (one entry for the initial pair/seed, then one per added
    class); random selections have no trace. ``final_granularity`` is the
    last trace entry until a pipeline replaces it with the measure computed
    on the actual subset.
    """

    kind: str
    classes: tuple[int, ...]
    seed_classes: tuple[int, ...]
    trace: tuple[float, ...]
    final_granularity: float

    def to_dict(self, class_ids=None) -> dict:
        def remap(values):
            if class_ids is None:
                return [int(c) for c in values]
            return [int(class_ids[c]) for c in values]

        return {
            "kind": self.kind,
            "classes": remap(self.classes),
            "seed_classes": remap(self.seed_classes),
            "granularity_trace": [
                None if math.isnan(v) or math.isinf(v) else float(v) for v in self.trace
            ],
            "final_granularity": (
                None
                if math.isnan(self.final_granularity) or math.isinf(self.final_granularity)
                else float(self.final_granularity)
            ),
        }


def _mean_pairwise(values: np.ndarray, selected) -> float:
    sel = list(selected)
    acc = [values[a, b] for i, a in enumerate(sel) for b in sel[i + 1 :]]
    return float(np.mean(acc))


def _check_target(k: int, target_size: int) -> None:
    if not (2 <= target_size <= k):
        raise ValidationError(f"target size must be in [2, {k}], got {target_size}")


def extract_sweet(table: ClassPairTable, target_size: int) -> TasterSelection:
    """Grow the coarsest subset: start from the largest-value pair, then
    repeatedly add the class with maximum mean table value to the selection
    (value ties go to the lexicographically smallest pair / smallest id)."""
    _check_target(table.k, target_size)
    V = table.values
    best: tuple[int, int] | None = None
    best_val = -math.inf
    for a in range(table.k):
        for b in range(a + 1, table.k):
            if V[a, b] > best_val:
                best_val = float(V[a, b])
                best = (a, b)
    assert best is not None
    selected = [best[0], best[1]]
    trace = [_mean_pairwise(V, selected)]
    while len(selected) < target_size:
        cand_best = None
        cand_val = -math.inf
        for c in range(table.k):
            if c in selected:
                continue
            score = float(np.mean([V[c, s] for s in selected]))
            if score > cand_val:
                cand_val = score
                cand_best = c
        selected.append(cand_best)
        trace.append(_mean_pairwise(V, selected))
    return TasterSelection(
        kind="sweet",
        classes=tuple(selected),
        seed_classes=(),
        trace=tuple(trace),
        final_granularity=trace[-1],
    )


def extract_bitter(
    table: ClassPairTable,
    target_size: int,
    seed_fraction: float = DEFAULT_SEED_FRACTION,
) -> TasterSelection:
    """Grow the finest subset from a seed of lowest-granularity pairs.

    The seed unions both classes of each pair, scanning pairs ascending by
    table value, until it reaches ceil(seed_fraction * k) classes (it may
    overshoot by one while completing a pair). Growth then repeatedly adds
    the class whose minimum table value to the selection is smallest.
    """
    _check_target(table.k, target_size)
    if not (0.0 < seed_fraction <= 1.0):
        raise ValidationError("seed_fraction must be in (0, 1]")
    seed_target = seed_target_size(table.k, seed_fraction)
    if seed_target > target_size:
        raise ValidationError(
            f"seed target {seed_target} exceeds target size {target_size}"
        )
    V = table.values
    seed: list[int] = []
    for _, a, b in table.pairs_ascending():
        for c in (a, b):
            if c not in seed:
                seed.append(c)
        if len(seed) >= seed_target:
            break
    # Completing the last pair can overshoot past the target size itself;
    # drop the excess, keeping scan order.
    del seed[target_size:]
    selected = list(seed)
    trace = [_mean_pairwise(V, selected)]
    while len(selected) < target_size:
        cand_best = None
        cand_val = math.inf
        for c in range(table.k):
            if c in selected:
                continue
            score = float(np.min([V[c, s] for s in selected]))
            if score < cand_val:
                cand_val = score
                cand_best = c
        selected.append(cand_best)
        trace.append(_mean_pairwise(V, selected))
    return TasterSelection(
        kind="bitter",
        classes=tuple(selected),
        seed_classes=tuple(seed),
        trace=tuple(trace),
        final_granularity=trace[-1],
    )


def extract_random(k: int, target_size: int, seed: int) -> TasterSelection:
    """Uniform random class subset without replacement, seeded."""
    if not (1 <= target_size <= k):
        raise ValidationError(f"target size must be in [1, {k}], got {target_size}")
    rng = np.random.default_rng([_RANDOM_SALT, int(seed)])
    classes = rng.choice(k, size=target_size, replace=False)
    return TasterSelection(
        kind="random",
        classes=tuple(int(c) for c in classes),
        seed_classes=(),
        trace=(),
        final_granularity=math.nan,
    )


def subset_granularity(
    distances,
    labels,
    classes,
    measure: str = DEFAULT_MEASURE,
    seed: int | None = None,
) -> MeasureResult:
    """Measure value on the restriction to the given classes, medoids
    recomputed on the restriction."""
    V = as_distance_values(distances)
    index = labels if isinstance(labels, ClassIndex) else ClassIndex.from_labels(labels)
    idx, sub_labels = restrict_to_classes(index.labels, classes)
    sub = V[np.ix_(idx, idx)]
    return resolve_measure(measure, seed=seed)(sub, sub_labels)


@dataclass(frozen=True)
class TasterResult:
    """All selections for one dataset, with true subset granularities."""

    table: ClassPairTable
    selections: dict


def run_taster(
    distances,
    labels,
    measure: str = DEFAULT_MEASURE,
    target_size: int | None = None,
    seed_fraction: float = DEFAULT_SEED_FRACTION,
    random_seed: int | None = None,
    measure_seed: int | None = None,
) -> TasterResult:
    """Full pipeline: pairwise table, bitter + sweet (+ random) selections.

    Each selection's ``final_granularity`` is replaced by the measure
    computed on the actual class restriction, so the reported number is a
    real subset granularity rather than a table-mean estimate.
    """
    V = as_distance_values(distances)
    index = labels if isinstance(labels, ClassIndex) else ClassIndex.from_labels(labels)
    k = index.k
    ts = default_target_size(k) if target_size is None else int(target_size)
    _check_target(k, ts)
    table = pairwise_class_granularity(V, index, measure=measure, seed=measure_seed)
    picks = {
        "bitter": extract_bitter(table, ts, seed_fraction),
        "sweet": extract_sweet(table, ts),
    }
    if random_seed is not None:
        picks["random"] = extract_random(k, ts, random_seed)
    out = {}
    for kind, sel in picks.items():
        true = subset_granularity(V, index, sel.classes, measure=measure, seed=measure_seed)
        out[kind] = TasterSelection(
            kind=sel.kind,
            classes=sel.classes,
            seed_classes=sel.seed_classes,
            trace=sel.trace,
            final_granularity=true.value,
        )
    return TasterResult(table=table, selections=out)


def selection_json(selection: TasterSelection, class_ids=None) -> str:
    return json.dumps(selection.to_dict(class_ids), indent=2, sort_keys=False) + "\n"


class TasterExtractor(BaseEstimator):
    """Scikit-learn style estimator that selects a class subset.

    Parameters
    ----------
    kind : {'bitter', 'sweet', 'random'}
        Whether to minimize, maximize, or ignore subset granularity.
    measure : str
        Granularity measure id used for the pairwise table.
    target_size : int or None
        Number of classes to select; defaults to a quarter of the classes
        (rounded half-up).
    seed_fraction : float
        Seed-set fraction for bitter extraction.
    metric : {'euclidean', 'cosine', 'precomputed'}
        Distance metric; 'precomputed' treats X as a distance matrix.
    normalize : bool
        l2-normalize rows before euclidean distances.
    random_state : int
        Seed for the random kind.

    Attributes
    ----------
    table_ : ClassPairTable
    classes_ : ndarray of selected class ids (original labels)
    seed_classes_ : ndarray of seed class ids (original labels)
    trace_ : tuple of per-step table-mean granularity values
    final_granularity_ : float, measure value on the selected subset
    """

    def __init__(
        self,
        kind: str = "bitter",
        measure: str = DEFAULT_MEASURE,
        target_size: int | None = None,
        seed_fraction: float = DEFAULT_SEED_FRACTION,
        metric: str = "euclidean",
        normalize: bool = True,
        random_state: int = 0,
    ):
        self.kind = kind
        self.measure = measure
        self.target_size = target_size
        self.seed_fraction = seed_fraction
        self.metric = metric
        self.normalize = normalize
        self.random_state = random_state

    def fit(self, X, y):
        if self.kind not in ("bitter", "sweet", "random"):
            raise ValidationError(f"unknown taster kind {self.kind!r}")
        dense, class_ids = dense_labels(y)
        if self.metric == "precomputed":
            V = as_distance_values(X)
        else:
            V = pairwise_distances(
                X, DistanceConfig(metric=self.metric, normalize=self.normalize)
            )
        result = run_taster(
            V,
            dense,
            measure=self.measure,
            target_size=self.target_size,
            seed_fraction=self.seed_fraction,
            random_seed=self.random_state if self.kind == "random" else None,
        )
        sel = result.selections[self.kind]
        self.table_ = result.table
        self.classes_ = class_ids[np.asarray(sel.classes, dtype=np.int64)]
        self.seed_classes_ = class_ids[np.asarray(sel.seed_classes, dtype=np.int64)]
        self.trace_ = sel.trace
        self.final_granularity_ = sel.final_granularity
        return self

    def selected_mask(self, y) -> np.ndarray:
        """Boolean mask of samples whose label is in the selected subset."""
        if not hasattr(self, "classes_"):
            raise ValidationError("TasterExtractor is not fitted")
        return np.isin(np.asarray(y), self.classes_)
