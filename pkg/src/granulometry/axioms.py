"""Executable checks of the three properties a granularity measure must have.

A measure should (1) not decrease when intra-class distances shrink and
inter-class distances grow, (2) be invariant to permuting class ids, and
(3) be invariant to rescaling all distances. The transforms here realize
those three perturbations on a distance matrix or labeling, and
:func:`check_axioms` counts violations over seeded repetitions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dataset import ClassIndex, ValidationError, as_distance_values
from .measures import MeasureResult, resolve_measure

TRANSFORM_KINDS = ("granularity_consistent", "isomorphic", "scale")

#: Monotonicity slack (absolute) and equality tolerance (relative),
#: chosen to separate float noise from genuine violations.
MONOTONICITY_SLACK = 1e-12
EQUALITY_RTOL = 1e-9

_GC_SALT = 0x6C01
_ISO_SALT = 0x150


@dataclass(frozen=True)
class TransformSpec:
    """One perturbation kind plus its parameters.

    ``strength`` only applies to granularity_consistent (multiplier spread),
    ``alpha`` only to scale.
    """

    kind: str
    seed: int = 0
    strength: float = 0.5
    alpha: float = 7.3

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise ValidationError(
                f"unknown transform kind {self.kind!r}; expected one of {TRANSFORM_KINDS}"
            )
        if not (0.0 < self.strength < 1.0):
            raise ValidationError("strength must be in (0, 1)")
        if not self.alpha > 0.0:
            raise ValidationError("alpha must be positive")


@dataclass(frozen=True)
class AxiomReport:
    """Violation counts for one (measure, transform kind) combination."""

    measure: str
    kind: str
    trials: int
    violations: int
    max_violation: float

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "kind": self.kind,
            "trials": int(self.trials),
            "violations": int(self.violations),
            "max_violation": float(self.max_violation),
        }

    @staticmethod
    def to_json_lines(reports) -> str:
        return "".join(json.dumps(r.to_dict(), sort_keys=False) + "\n" for r in reports)


def granularity_consistent_transform(distances, labels, seed, strength: float = 0.5) -> np.ndarray:
    """Shrink every intra-class distance and grow every inter-class one.

    Same-class entries are multiplied by Uniform[1-strength, 1) draws and
    different-class entries by Uniform[1, 1+strength); the output stays
    symmetric, nonnegative, zero-diagonal. Deterministic per seed.
    """
    if not (0.0 < strength < 1.0):
        raise ValidationError("strength must be in (0, 1)")
    V = as_distance_values(distances)
    index = labels if isinstance(labels, ClassIndex) else ClassIndex.from_labels(labels)
    n = V.shape[0]
    rng = np.random.default_rng(_seed_seq(_GC_SALT, seed))
    iu = np.triu_indices(n, k=1)
    u = rng.random(iu[0].size)
    same = index.labels[iu[0]] == index.labels[iu[1]]
    factors = np.where(same, 1.0 - strength * u, 1.0 + strength * u)
    out = np.zeros_like(V)
    out[iu] = V[iu] * factors
    out += out.T
    return out


def isomorphic_transform(labels, seed) -> np.ndarray:
    """Relabel classes through a uniformly random permutation of the ids.

    The sample-to-class partition is unchanged; only the ids move.
    """
    index = labels if isinstance(labels, ClassIndex) else ClassIndex.from_labels(labels)
    rng = np.random.default_rng(_seed_seq(_ISO_SALT, seed))
    perm = rng.permutation(index.k)
    return perm[index.labels]


def scale_transform(distances, alpha: float) -> np.ndarray:
    if not alpha > 0.0:
        raise ValidationError("alpha must be positive")
    return as_distance_values(distances) * alpha


def _seed_seq(salt: int, seed) -> list[int]:
    parts = seed if isinstance(seed, (tuple, list)) else (seed,)
    return [int(salt)] + [int(p) for p in parts]


def _relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b), 1e-300)
    return abs(a - b) / scale


def check_axioms(distances, labels, measure, specs, trials: int = 100) -> list[AxiomReport]:
    """Count axiom violations for one measure over seeded trials.

    ``measure`` is a registry id or a ``(distances, labels) -> MeasureResult``
    callable. Per trial, the randomness derives only from the TransformSpec
    seed and the trial index. Granularity consistency asserts the transformed
    value is no smaller than the original minus ``MONOTONICITY_SLACK``;
    isomorphism and scale assert equality within ``EQUALITY_RTOL`` relative.
    Trials where both values hit the infinity sentinel are counted as clean.
    """
    if trials < 1:
        raise ValidationError("trials must be positive")
    V = as_distance_values(distances)
    index = labels if isinstance(labels, ClassIndex) else ClassIndex.from_labels(labels)
    fn = resolve_measure(measure)
    name = measure if isinstance(measure, str) else getattr(measure, "__name__", "custom")

    base = fn(V, index)
    reports = []
    for spec in specs:
        violations = 0
        max_violation = 0.0
        for t in range(trials):
            trial_seed = (int(spec.seed), t)
            if spec.kind == "granularity_consistent":
                moved = fn(
                    granularity_consistent_transform(V, index, trial_seed, spec.strength),
                    index,
                )
                bad, mag = _check_monotone(base, moved)
            elif spec.kind == "isomorphic":
                moved = fn(V, isomorphic_transform(index, trial_seed))
                bad, mag = _check_equal(base, moved)
            else:
                moved = fn(scale_transform(V, spec.alpha), index)
                bad, mag = _check_equal(base, moved)
            if bad:
                violations += 1
            max_violation = max(max_violation, mag)
        reports.append(
            AxiomReport(
                measure=name,
                kind=spec.kind,
                trials=trials,
                violations=violations,
                max_violation=max_violation,
            )
        )
    return reports


def _check_monotone(base: MeasureResult, moved: MeasureResult) -> tuple[bool, float]:
    if base.infinite:
        # Perfectly separated input: the transform keeps it so unless the
        # measure is broken; a finite transformed value is a violation.
        return (not moved.infinite), 0.0 if moved.infinite else math.inf
    if moved.infinite:
        return False, 0.0
    gap = base.value - moved.value
    if gap > MONOTONICITY_SLACK:
        return True, gap
    return False, max(gap, 0.0)


def _check_equal(base: MeasureResult, moved: MeasureResult) -> tuple[bool, float]:
    if base.infinite or moved.infinite:
        if base.infinite and moved.infinite:
            return False, 0.0
        return True, math.inf
    gap = _relative_gap(base.value, moved.value)
    return gap > EQUALITY_RTOL, gap
