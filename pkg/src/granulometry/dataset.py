"""Core data types: labeled feature sets, class indexes, distance matrices.

All types are immutable after construction (backing arrays are marked
read-only) and safe to share across threads.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class GranulometryError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(GranulometryError):
    """An input file, array or configuration violates a format or invariant."""


class MeasureError(GranulometryError):
    """A measure is undefined on the given dataset (e.g. a singleton class)."""


METRICS = ("euclidean", "cosine")


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DistanceConfig:
    """How sample-to-sample distances are computed.

    ``normalize`` l2-normalizes feature rows before euclidean distance,
    which makes the resulting distances invariant to feature scaling.
    """

    metric: str = "euclidean"
    normalize: bool = True

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValidationError(
                f"unknown metric {self.metric!r}; expected one of {METRICS}"
            )

    def to_dict(self) -> dict:
        return {"metric": self.metric, "normalize": bool(self.normalize)}


def check_features(features, *, allow_1d: bool = False) -> np.ndarray:
    """Validate and coerce a feature matrix to a float64 (n, d) array."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim == 1 and allow_1d:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValidationError(f"features must be 2-dimensional, got shape {X.shape}")
    if X.shape[0] < 2:
        raise ValidationError("need at least 2 samples")
    if X.shape[1] < 1:
        raise ValidationError("need at least 1 feature dimension")
    if not np.all(np.isfinite(X)):
        raise ValidationError("non-finite feature value")
    return X


def require_nonzero_rows(X: np.ndarray) -> None:
    """Reject feature matrices with zero-norm rows (cannot be normalized)."""
    if np.any(np.einsum("ij,ij->i", X, X) == 0.0):
        raise ValidationError("zero-norm feature row cannot be normalized")


def dense_labels(labels) -> tuple[np.ndarray, np.ndarray]:
    """Remap arbitrary integer class ids to a dense {0..k-1} range.

    Dense ids preserve the ascending order of the original ids. Returns
    ``(dense, class_ids)`` where ``class_ids[dense_id]`` is the original id.
    """
    y = np.asarray(labels)
    if y.ndim != 1:
        raise ValidationError(f"labels must be 1-dimensional, got shape {y.shape}")
    if y.size == 0:
        raise ValidationError("labels are empty")
    if not np.issubdtype(y.dtype, np.integer):
        yf = np.asarray(labels, dtype=np.float64)
        if not np.all(np.isfinite(yf)) or not np.all(yf == np.round(yf)):
            raise ValidationError("labels must be integers")
        y = yf.astype(np.int64)
    class_ids, dense = np.unique(y, return_inverse=True)
    return dense.astype(np.int64), class_ids.astype(np.int64)


def check_labels(labels, n: int) -> np.ndarray:
    """Validate labels already in dense {0..k-1} form against a sample count."""
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (n,):
        raise ValidationError(f"expected {n} labels, got shape {y.shape}")
    k = int(y.max()) + 1 if y.size else 0
    if y.min() < 0:
        raise ValidationError("labels must be nonnegative")
    present = np.bincount(y, minlength=k)
    if np.any(present == 0):
        raise ValidationError("class ids must be dense: every id in 0..k-1 present")
    if k < 2:
        raise ValidationError("need at least 2 classes")
    return y


@dataclass(frozen=True)
class ClassIndex:
    """Partition of sample indices by class.

    ``members[c]`` is the ascending array of sample indices in class ``c``;
    member lists are disjoint and cover 0..n-1.
    """

    labels: np.ndarray
    members: tuple[np.ndarray, ...]
    sizes: np.ndarray

    @classmethod
    def from_labels(cls, labels) -> "ClassIndex":
        y = np.asarray(labels, dtype=np.int64)
        y = check_labels(y, y.shape[0])
        k = int(y.max()) + 1
        members = tuple(_freeze(np.flatnonzero(y == c)) for c in range(k))
        sizes = _freeze(np.array([m.size for m in members], dtype=np.int64))
        return cls(labels=_freeze(y.copy()), members=members, sizes=sizes)

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def k(self) -> int:
        return len(self.members)


def restrict_to_classes(labels, classes) -> tuple[np.ndarray, np.ndarray]:
    """Restrict a labeling to a subset of (dense) class ids.

    Returns ``(sample_indices, new_dense_labels)``. New ids preserve the
    ascending order of the kept ids, so the restriction is reproducible
    regardless of the order ``classes`` is given in.
    """
    y = np.asarray(labels, dtype=np.int64)
    keep = np.unique(np.asarray(list(classes), dtype=np.int64))
    if keep.size < 2:
        raise ValidationError("need at least 2 classes in a restriction")
    mask = np.isin(y, keep)
    idx = np.flatnonzero(mask)
    remap = {int(c): i for i, c in enumerate(keep)}
    sub = np.array([remap[int(c)] for c in y[idx]], dtype=np.int64)
    return idx, sub


@dataclass(frozen=True)
class LabeledDataset:
    """A feature matrix plus one integer class label per row.

    ``labels`` are dense ids in {0..k-1}; ``class_ids`` maps each dense id
    back to the original id it was loaded with.
    """

    features: np.ndarray
    labels: np.ndarray
    class_ids: np.ndarray

    @classmethod
    def from_arrays(cls, features, labels) -> "LabeledDataset":
        X = check_features(features)
        dense, class_ids = dense_labels(labels)
        if dense.shape[0] != X.shape[0]:
            raise ValidationError(
                f"row-count mismatch: {X.shape[0]} feature rows, {dense.shape[0]} labels"
            )
        check_labels(dense, X.shape[0])
        return cls(
            features=_freeze(X.copy()),
            labels=_freeze(dense),
            class_ids=_freeze(class_ids),
        )

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])

    @property
    def k(self) -> int:
        return int(self.class_ids.shape[0])

    @cached_property
    def index(self) -> ClassIndex:
        return ClassIndex.from_labels(self.labels)

    def original_ids(self, dense_ids) -> np.ndarray:
        """Map dense class ids back to the ids the dataset was loaded with."""
        return self.class_ids[np.asarray(dense_ids, dtype=np.int64)]


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative matrix of sample-to-sample distances."""

    values: np.ndarray

    @classmethod
    def from_values(cls, values, *, symmetrize_tol: float | None = None) -> "DistanceMatrix":
        V = np.asarray(values, dtype=np.float64)
        if V.ndim != 2 or V.shape[0] != V.shape[1]:
            raise ValidationError(f"distance matrix must be square, got shape {V.shape}")
        if not np.all(np.isfinite(V)):
            raise ValidationError("non-finite distance value")
        if np.any(V < 0):
            raise ValidationError("negative distance value")
        asym = np.abs(V - V.T).max() if V.size else 0.0
        if symmetrize_tol is not None:
            if asym > symmetrize_tol:
                raise ValidationError(
                    f"matrix asymmetry {asym:g} exceeds tolerance {symmetrize_tol:g}"
                )
            V = (V + V.T) / 2.0
            dmax = np.abs(np.diagonal(V)).max() if V.size else 0.0
            if dmax > symmetrize_tol:
                raise ValidationError(f"nonzero diagonal (max {dmax:g})")
            V = V.copy()
            np.fill_diagonal(V, 0.0)
        else:
            if asym != 0.0:
                raise ValidationError("distance matrix is not symmetric")
            if np.any(np.diagonal(V) != 0.0):
                raise ValidationError("distance matrix diagonal must be zero")
        return cls(values=_freeze(V.copy()))

    @property
    def n(self) -> int:
        return int(self.values.shape[0])


def as_distance_values(distances) -> np.ndarray:
    """Accept a DistanceMatrix or a raw square array; return float64 values."""
    if isinstance(distances, DistanceMatrix):
        return distances.values
    V = np.asarray(distances, dtype=np.float64)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise ValidationError(f"distance matrix must be square, got shape {V.shape}")
    return V


def warn_on_cross_class_duplicates(distances, labels) -> int:
    """Warn when samples from different classes sit at distance zero.

    Real embeddings can collide, so this is accepted with a warning rather
    than rejected. Returns the number of offending pairs.
    """
    V = as_distance_values(distances)
    y = np.asarray(labels, dtype=np.int64)
    iu = np.triu_indices(V.shape[0], k=1)
    hits = int(np.count_nonzero((V[iu] == 0.0) & (y[iu[0]] != y[iu[1]])))
    if hits:
        warnings.warn(
            f"{hits} cross-class sample pair(s) at distance zero; "
            "measures treat them as distinct samples",
            RuntimeWarning,
            stacklevel=2,
        )
    return hits
