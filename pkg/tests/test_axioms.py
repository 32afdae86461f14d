import json
import math

import numpy as np
import pytest

import granulometry as g
from granulometry import TransformSpec, ValidationError, check_axioms
from granulometry.axioms import (
    AxiomReport,
    granularity_consistent_transform,
    isomorphic_transform,
    scale_transform,
)
from granulometry.dataset import DistanceMatrix


class TestGranularityConsistentTransform:
    def test_direction_of_change(self, blob_instance):
        D, labels = blob_instance
        out = granularity_consistent_transform(D, labels, seed=1, strength=0.5)
        same = labels[:, None] == labels[None, :]
        off = ~np.eye(len(labels), dtype=bool)
        assert np.all(out[same & off] <= D[same & off])
        assert np.all(out[~same] >= D[~same])

    def test_output_is_valid_distance_matrix(self, blob_instance):
        D, labels = blob_instance
        for seed in range(5):
            out = granularity_consistent_transform(D, labels, seed, strength=0.7)
            DistanceMatrix.from_values(out)

    def test_vanishing_strength_is_identity(self, blob_instance):
        D, labels = blob_instance
        out = granularity_consistent_transform(D, labels, seed=2, strength=1e-9)
        np.testing.assert_allclose(out, D, rtol=1e-6)

    def test_deterministic_per_seed(self, blob_instance):
        D, labels = blob_instance
        a = granularity_consistent_transform(D, labels, seed=3, strength=0.5)
        b = granularity_consistent_transform(D, labels, seed=3, strength=0.5)
        assert np.array_equal(a, b)
        c = granularity_consistent_transform(D, labels, seed=4, strength=0.5)
        assert not np.array_equal(a, c)

    def test_strength_bounds_validated(self, blob_instance):
        D, labels = blob_instance
        with pytest.raises(ValidationError):
            granularity_consistent_transform(D, labels, seed=0, strength=1.5)


class TestIsomorphicTransform:
    def test_partition_unchanged(self, blob_instance):
        _, labels = blob_instance
        moved = isomorphic_transform(labels, seed=5)
        groups = lambda y: sorted(  # noqa: E731
            tuple(np.flatnonzero(y == c)) for c in np.unique(y)
        )
        assert groups(moved) == groups(np.asarray(labels))

    def test_two_class_swap(self):
        moved = isomorphic_transform(np.array([0, 0, 1, 1]), seed=_swap_seed())
        assert list(moved) == [1, 1, 0, 0]

    def test_identity_permutation_leaves_labels(self):
        labels = np.array([0, 0, 1, 1])
        moved = isomorphic_transform(labels, seed=_identity_seed())
        assert list(moved) == list(labels)


def _find_seed(want_identity: bool) -> int:
    for seed in range(50):
        perm = isomorphic_transform(np.array([0, 1]), seed)
        if (list(perm) == [0, 1]) == want_identity:
            return seed
    raise AssertionError("no seed found")


def _identity_seed() -> int:
    return _find_seed(True)


def _swap_seed() -> int:
    return _find_seed(False)


class TestScaleTransform:
    def test_multiplies(self, blob_instance):
        D, _ = blob_instance
        np.testing.assert_array_equal(scale_transform(D, 2.0), 2.0 * D)

    def test_rejects_nonpositive(self, blob_instance):
        D, _ = blob_instance
        with pytest.raises(ValidationError):
            scale_transform(D, 0.0)


class TestCheckAxioms:
    def test_rankm_clean_on_gaussian_pair(self):
        ds = g.gaussian_pair(g.GaussianPairConfig(separation=2.0, samples_per_class=40, seed=1))
        D = g.pairwise_distances(ds.features, g.DistanceConfig("euclidean", normalize=False))
        specs = [TransformSpec(kind=k, seed=11) for k in ("granularity_consistent", "isomorphic", "scale")]
        reports = check_axioms(D, ds.labels, "rankm", specs, trials=30)
        assert all(r.violations == 0 for r in reports)

    def test_scale_invariance_of_c_index(self, blob_instance):
        D, labels = blob_instance
        reports = check_axioms(D, labels, "cindex", [TransformSpec(kind="scale", seed=0, alpha=5.0)], trials=5)
        assert reports[0].violations == 0

    def test_broken_measure_detected(self, blob_instance):
        D, labels = blob_instance

        def negated_rankm(distances, labels_):
            res = g.medoid_ranking_index(distances, labels_)
            return g.MeasureResult(measure="neg", value=-res.value + 2.0, n=res.n, k=res.k)

        specs = [TransformSpec(kind="granularity_consistent", seed=1, strength=0.6)]
        reports = check_axioms(D, labels, negated_rankm, specs, trials=20)
        assert reports[0].violations > 0
        assert reports[0].max_violation > 0

    def test_report_counts_bounded(self, blob_instance):
        D, labels = blob_instance
        specs = [TransformSpec(kind="isomorphic", seed=2)]
        reports = check_axioms(D, labels, "fisher", specs, trials=7)
        assert reports[0].trials == 7
        assert 0 <= reports[0].violations <= 7

    def test_jsonl_serialization(self):
        reports = [
            AxiomReport(measure="rankm", kind="scale", trials=3, violations=0, max_violation=0.0),
            AxiomReport(measure="rs", kind="isomorphic", trials=3, violations=1, max_violation=0.5),
        ]
        lines = AxiomReport.to_json_lines(reports).strip().split("\n")
        assert len(lines) == 2
        first = json.loads(lines[0])
        assert first == {
            "measure": "rankm",
            "kind": "scale",
            "trials": 3,
            "violations": 0,
            "max_violation": 0.0,
        }

    def test_sentinel_base_counts_clean_when_sentinel_preserved(self, separated_pair):
        D, labels = separated_pair
        specs = [TransformSpec(kind="granularity_consistent", seed=3, strength=0.5)]
        reports = check_axioms(D, labels, "bhg", specs, trials=5)
        assert reports[0].violations == 0
