"""Seeded synthetic datasets and the two measure-assessment protocols.

Two generators: a pair of unit-covariance Gaussians at controllable
separation, and a planted hierarchy (well-separated superclusters, each a
ring of overlapping subclusters). Two protocols: a separation sweep whose
measure curves should rise with separation, and a relabeling run that
splits superclasses one at a time and checks the measure never increases.

Every generator is a pure function of its seed.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .dataset import (
    ClassIndex,
    DistanceConfig,
    LabeledDataset,
    ValidationError,
    _freeze,
    dense_labels,
)
from .distance import pairwise_distances
from .measures import (
    CORE_MEASURE_IDS,
    neighbor_order,
    ranking_from_neighbor_order,
    resolve_measure,
)

_PAIR_SALT = 0x6A55
_SWEEP_SALT = 0x53EE
_HIER_SALT = 0x41E2
_SHUFFLE_SALT = 0x5F1E

#: Relabeling traces may rise by at most this much between steps.
RELABEL_SLACK = 1e-12

#: Measures exempt from the relabeling pass criterion (still evaluated).
RELABEL_EXEMPT = ("fisher",)

#: Raw distances for synthetic data; generated coordinates are not
#: embeddings, so no row normalization.
SYNTH_DISTANCE = DistanceConfig(metric="euclidean", normalize=False)

_PLACEMENT_ATTEMPTS = 10_000


def _derive_seed(*parts) -> list[int]:
    return [int(p) for p in parts]


@dataclass(frozen=True)
class GaussianPairConfig:
    """Two unit-covariance Gaussian classes, means ``separation`` apart."""

    separation: float
    samples_per_class: int = 1000
    dims: int = 2
    repeats: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.separation < 0:
            raise ValidationError("separation must be nonnegative")
        if self.samples_per_class < 2:
            raise ValidationError("need at least 2 samples per class")
        if self.dims < 1 or self.repeats < 1:
            raise ValidationError("dims and repeats must be positive")


def gaussian_pair(config: GaussianPairConfig) -> LabeledDataset:
    """Class 0 at the origin, class 1 offset by ``separation`` on axis 0."""
    return _gaussian_pair_seeded(config, _derive_seed(_PAIR_SALT, config.seed))


@dataclass(frozen=True)
class SweepRecord:
    measure: str
    param: float
    repeat: int
    value: float


@dataclass(frozen=True)
class SweepReport:
    """Per-measure values over a parameter sweep, plus mean/std summaries."""

    records: tuple[SweepRecord, ...]

    def measures(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for r in self.records:
            seen.setdefault(r.measure, None)
        return tuple(seen)

    def params(self) -> tuple[float, ...]:
        seen: dict[float, None] = {}
        for r in self.records:
            seen.setdefault(r.param, None)
        return tuple(seen)

    def mean_std(self, measure: str) -> tuple[np.ndarray, np.ndarray]:
        """Mean and population std per sweep point, in param order."""
        means, stds = [], []
        for p in self.params():
            vals = [r.value for r in self.records if r.measure == measure and r.param == p]
            means.append(float(np.mean(vals)))
            stds.append(float(np.std(vals)))
        return np.array(means), np.array(stds)

    def to_csv(self) -> str:
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["measure", "param", "repeat", "value"])
        for r in self.records:
            writer.writerow([r.measure, repr(float(r.param)), r.repeat, _fmt_value(r.value)])
        return buf.getvalue()

    def to_summary_dict(self) -> dict:
        out: dict = {"params": [float(p) for p in self.params()], "measures": {}}
        for m in self.measures():
            means, stds = self.mean_std(m)
            out["measures"][m] = {
                "mean": [_json_value(v) for v in means],
                "std": [_json_value(v) for v in stds],
            }
        return out


def _fmt_value(v: float) -> str:
    return "inf" if math.isinf(v) else repr(float(v))


def _json_value(v: float):
    return None if math.isinf(v) else float(v)


def separation_sweep(
    separations,
    config: GaussianPairConfig,
    measures=CORE_MEASURE_IDS,
    distance: DistanceConfig = SYNTH_DISTANCE,
    threads: int = 1,
) -> SweepReport:
    """Measure values over increasing class separation.

    Each sweep point generates ``config.repeats`` seeded datasets; all
    requested measures are computed on each with raw euclidean distances.
    """
    seps = [float(m) for m in separations]
    if not seps or any(b <= a for a, b in zip(seps, seps[1:])):
        raise ValidationError("separations must be nonempty and ascending")
    records = []
    for pi, sep in enumerate(seps):
        for rep in range(config.repeats):
            child = replace(config, separation=sep, seed=0)
            rng_seed = _derive_seed(_SWEEP_SALT, config.seed, pi, rep)
            ds = _gaussian_pair_seeded(child, rng_seed)
            D = pairwise_distances(ds.features, distance, threads=threads)
            for m in measures:
                res = resolve_measure(m)(D, ds.index)
                records.append(SweepRecord(measure=m, param=sep, repeat=rep, value=res.value))
    return SweepReport(records=tuple(records))


def _gaussian_pair_seeded(config: GaussianPairConfig, seed_parts) -> LabeledDataset:
    rng = np.random.default_rng(seed_parts)
    s, d = config.samples_per_class, config.dims
    X = rng.standard_normal((2 * s, d))
    X[s:, 0] += config.separation
    return LabeledDataset.from_arrays(X, np.repeat([0, 1], s))


@dataclass(frozen=True)
class HierarchyConfig:
    """Planted two-level structure: superclusters of subclusters.

    Supercluster centers are rejection-sampled at pairwise distance at
    least ``super_separation``; each subcluster center sits on a sphere of
    radius ``sub_radius`` around its supercluster center; samples are
    isotropic Gaussian noise around subcluster centers.
    """

    n_super: int = 10
    subs_per_super: int = 4
    samples_per_sub: int = 25
    dims: int = 2
    super_separation: float = 50.0
    sub_radius: float = 1.5
    noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if min(self.n_super, self.subs_per_super, self.samples_per_sub, self.dims) < 1:
            raise ValidationError("all hierarchy counts must be at least 1")
        if not self.super_separation > 2.0 * self.sub_radius:
            raise ValidationError(
                "super_separation must exceed twice sub_radius for a realizable hierarchy"
            )
        if self.sub_radius < 0 or self.noise_sigma <= 0:
            raise ValidationError("sub_radius must be >= 0 and noise_sigma > 0")


@dataclass(frozen=True)
class HierarchicalDataset:
    """Features with two label granularities; fine labels refine coarse."""

    features: np.ndarray
    coarse_labels: np.ndarray
    fine_labels: np.ndarray
    fine_to_coarse: np.ndarray

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_coarse(self) -> int:
        return int(self.fine_to_coarse.max()) + 1

    @property
    def n_fine(self) -> int:
        return int(self.fine_to_coarse.shape[0])

    def as_dataset(self, level: str = "fine") -> LabeledDataset:
        labels = self.fine_labels if level == "fine" else self.coarse_labels
        return LabeledDataset.from_arrays(self.features, labels)


def generate_hierarchy(config: HierarchyConfig) -> HierarchicalDataset:
    """Sample a planted hierarchy; a pure function of ``config.seed``."""
    rng = np.random.default_rng(_derive_seed(_HIER_SALT, config.seed))
    centers = _place_super_centers(rng, config)
    features = []
    coarse = []
    fine = []
    for sup in range(config.n_super):
        for sub in range(config.subs_per_super):
            direction = rng.standard_normal(config.dims)
            norm = float(np.sqrt(direction @ direction))
            if norm == 0.0:  # astronomically unlikely; keep determinism anyway
                direction[0] = 1.0
                norm = 1.0
            sub_center = centers[sup] + config.sub_radius * direction / norm
            pts = sub_center + config.noise_sigma * rng.standard_normal(
                (config.samples_per_sub, config.dims)
            )
            features.append(pts)
            coarse.extend([sup] * config.samples_per_sub)
            fine.extend([sup * config.subs_per_super + sub] * config.samples_per_sub)
    fine_to_coarse = np.repeat(np.arange(config.n_super), config.subs_per_super)
    return HierarchicalDataset(
        features=_freeze(np.vstack(features)),
        coarse_labels=_freeze(np.array(coarse, dtype=np.int64)),
        fine_labels=_freeze(np.array(fine, dtype=np.int64)),
        fine_to_coarse=_freeze(fine_to_coarse.astype(np.int64)),
    )


def _place_super_centers(rng: np.random.Generator, config: HierarchyConfig) -> np.ndarray:
    box = 10.0 * config.super_separation
    centers: list[np.ndarray] = []
    for _ in range(_PLACEMENT_ATTEMPTS):
        cand = rng.uniform(0.0, box, size=config.dims)
        if all(np.linalg.norm(cand - c) >= config.super_separation for c in centers):
            centers.append(cand)
            if len(centers) == config.n_super:
                return np.vstack(centers)
    raise ValidationError("separation infeasible: supercluster placement failed")


@dataclass(frozen=True)
class RelabelReport:
    """Traces of one measure while superclasses split into subclasses.

    ``traces[s][t]`` is the value for shuffle ``s`` after ``t`` splits
    (``t = 0`` is the all-coarse labeling). ``passed`` requires every trace
    to be non-increasing within ``RELABEL_SLACK`` unless the measure is
    exempt; exempt measures always pass but keep their violation count.
    """

    measure: str
    shuffles: int
    traces: tuple[tuple[float, ...], ...]
    mean_trace: tuple[float, ...]
    std_trace: tuple[float, ...]
    violations: int
    exempt: bool
    passed: bool

    def step_averaged_std(self) -> float:
        return float(np.mean(self.std_trace))

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "shuffles": int(self.shuffles),
            "steps": len(self.mean_trace),
            "mean_trace": [_json_value(v) for v in self.mean_trace],
            "std_trace": [_json_value(v) for v in self.std_trace],
            "violations": int(self.violations),
            "exempt": bool(self.exempt),
            "passed": bool(self.passed),
        }


def relabel_monotonicity(
    hierarchy: HierarchicalDataset,
    measure: str = "rankm",
    shuffles: int = 100,
    seed: int = 0,
    distance: DistanceConfig = SYNTH_DISTANCE,
    threads: int = 1,
) -> RelabelReport:
    """Split superclasses one at a time and watch the measure.

    For each shuffle the superclasses are split into their subclasses in a
    random order; after every split the measure is recomputed from scratch
    on the new labeling. Splitting should only refine the dataset, so the
    trace must never rise (within slack) for a measure that tracks
    granularity; the mean/std trace across shuffles is reported.
    """
    if shuffles < 1:
        raise ValidationError("shuffles must be positive")
    D = pairwise_distances(hierarchy.features, distance, threads=threads)
    evaluate = _trace_evaluator(D, measure)
    n_super = hierarchy.n_coarse
    coarse = hierarchy.coarse_labels
    fine = hierarchy.fine_labels

    traces = []
    violations = 0
    for s in range(shuffles):
        rng = np.random.default_rng(_derive_seed(_SHUFFLE_SALT, seed, s))
        order = rng.permutation(n_super)
        split = np.zeros(n_super, dtype=bool)
        trace = [evaluate(_mixed_labels(coarse, fine, split, n_super))]
        for sup in order:
            split[sup] = True
            trace.append(evaluate(_mixed_labels(coarse, fine, split, n_super)))
        violations += sum(
            1 for a, b in zip(trace, trace[1:]) if b > a + RELABEL_SLACK
        )
        traces.append(tuple(trace))

    arr = np.array(traces, dtype=np.float64)
    name = measure if isinstance(measure, str) else getattr(measure, "__name__", "custom")
    exempt = name in RELABEL_EXEMPT
    return RelabelReport(
        measure=name,
        shuffles=shuffles,
        traces=tuple(traces),
        mean_trace=tuple(float(v) for v in arr.mean(axis=0)),
        std_trace=tuple(float(v) for v in arr.std(axis=0)),
        violations=violations,
        exempt=exempt,
        passed=exempt or violations == 0,
    )


def _mixed_labels(coarse, fine, split, n_super) -> np.ndarray:
    # Unsplit supers keep their coarse id; split ones use offset fine ids.
    # Densification below keeps ids in ascending original order.
    mixed = np.where(split[coarse], fine + n_super, coarse)
    dense, _ = dense_labels(mixed)
    return dense


def _trace_evaluator(D: np.ndarray, measure: str):
    if measure == "rank":
        order = neighbor_order(D)

        def run_rank(labels) -> float:
            return ranking_from_neighbor_order(order, labels).value

        return run_rank
    fn = resolve_measure(measure)

    def run(labels) -> float:
        return fn(D, ClassIndex.from_labels(labels)).value

    return run


#: Planted 20-class structure used for taster-ordering checks: four
#: well-separated superclusters, five overlapping subclusters each, so any
#: five-class subset must contain at least one fine same-super pair.
PLANTED_TASTER_CONFIG = HierarchyConfig(
    n_super=4,
    subs_per_super=5,
    samples_per_sub=25,
    dims=2,
    super_separation=50.0,
    sub_radius=1.5,
    noise_sigma=1.0,
)


def planted_taster_dataset(seed: int) -> LabeledDataset:
    """One 20-class clusters-of-clusters instance (fine labels)."""
    hierarchy = generate_hierarchy(replace(PLANTED_TASTER_CONFIG, seed=seed))
    return hierarchy.as_dataset("fine")


def bundled_corpus(seed: int = 20240811) -> list[LabeledDataset]:
    """Small deterministic Gaussian-blob instances for the axiom suite.

    Shapes span n up to 200 and k up to 10. Spreads keep every measure off
    its infinity sentinel while the clusters stay structured enough that a
    perturbation cannot relocate a class medoid across a class boundary.
    """
    shapes = [
        (40, 2, 3, 5.0),
        (60, 3, 4, 6.0),
        (90, 5, 6, 5.0),
        (140, 7, 8, 5.0),
        (200, 10, 12, 5.5),
    ]
    out = []
    for i, (n, k, dims, spread) in enumerate(shapes):
        out.append(gaussian_blobs(n=n, k=k, dims=dims, seed=[seed, i], spread=spread))
    return out


def gaussian_blobs(n: int, k: int, dims: int, seed, spread: float = 4.0) -> LabeledDataset:
    """k Gaussian blobs with centers spread in a box; classes sized evenly
    (every class gets at least 2 samples)."""
    if n < 2 * k:
        raise ValidationError("need at least 2 samples per class")
    rng = np.random.default_rng(seed if isinstance(seed, (list, tuple)) else [seed])
    centers = rng.uniform(0.0, spread, size=(k, dims))
    sizes = np.full(k, n // k, dtype=np.int64)
    sizes[: n % k] += 1
    X = np.vstack(
        [
            centers[c] + rng.standard_normal((int(sizes[c]), dims))
            for c in range(k)
        ]
    )
    y = np.repeat(np.arange(k), sizes)
    return LabeledDataset.from_arrays(X, y)


def sweep_summary_json(report: SweepReport) -> str:
    return json.dumps(report.to_summary_dict(), indent=2, sort_keys=False) + "\n"
