"""Pairwise distance computation and per-class medoids.

Distances are always computed in float64, even for float32 inputs, so
that rank comparisons downstream are stable. All results are independent
of the number of threads used.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import (
    ClassIndex,
    DistanceConfig,
    ValidationError,
    _freeze,
    as_distance_values,
    check_features,
)

# Row-block size for threaded euclidean computation. Blocks are fixed-size
# so the result is bitwise identical for any thread count.
_BLOCK_ROWS = 512


def l2_normalize_rows(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    if np.any(norms == 0.0):
        raise ValidationError("zero-norm feature row cannot be normalized")
    return X / norms[:, None]


def pairwise_distances(features, config: DistanceConfig = DistanceConfig(), threads: int = 1) -> np.ndarray:
    """Full n-by-n distance matrix under the given configuration.

    Euclidean distances optionally l2-normalize rows first; cosine distance
    is 1 minus the cosine similarity. The output is exactly symmetric with
    a zero diagonal.
    """
    X = check_features(features)
    if config.metric == "cosine":
        U = l2_normalize_rows(X)
        D = 1.0 - U @ U.T
        np.clip(D, 0.0, None, out=D)
        D = (D + D.T) / 2.0
    else:
        Y = l2_normalize_rows(X) if config.normalize else X
        D = _euclidean_matrix(Y, threads=threads)
    np.fill_diagonal(D, 0.0)
    return D


def _euclidean_matrix(Y: np.ndarray, threads: int = 1) -> np.ndarray:
    n = Y.shape[0]
    if threads <= 1 or n <= _BLOCK_ROWS:
        return cdist(Y, Y, metric="euclidean")
    out = np.empty((n, n), dtype=np.float64)
    starts = range(0, n, _BLOCK_ROWS)

    def fill(start: int) -> None:
        stop = min(start + _BLOCK_ROWS, n)
        out[start:stop] = cdist(Y[start:stop], Y, metric="euclidean")

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(fill, starts))
    return out


def medoid_indices(distances, index: ClassIndex) -> np.ndarray:
    """Per-class medoid sample indices from a full distance matrix.

    The medoid minimizes the sum of distances to the other members of its
    class; ties go to the smallest sample index. A singleton class yields
    its only member.
    """
    V = as_distance_values(distances)
    meds = np.empty(index.k, dtype=np.int64)
    for c, members in enumerate(index.members):
        sub = V[np.ix_(members, members)]
        meds[c] = members[int(np.argmin(sub.sum(axis=1)))]
    return meds


def medoid_indices_from_features(
    features, index: ClassIndex, config: DistanceConfig = DistanceConfig()
) -> np.ndarray:
    """Medoids computed per class without materializing the full matrix."""
    X = _effective_rows(features, config)
    meds = np.empty(index.k, dtype=np.int64)
    for c, members in enumerate(index.members):
        rows = X[members]
        if config.metric == "cosine":
            sub = 1.0 - rows @ rows.T
            np.clip(sub, 0.0, None, out=sub)
            np.fill_diagonal(sub, 0.0)
        else:
            sub = cdist(rows, rows, metric="euclidean")
        meds[c] = members[int(np.argmin(sub.sum(axis=1)))]
    return meds


def _effective_rows(features, config: DistanceConfig) -> np.ndarray:
    X = check_features(features)
    if config.metric == "cosine" or config.normalize:
        return l2_normalize_rows(X)
    return X


def distances_to_samples(features, targets, config: DistanceConfig = DistanceConfig()) -> np.ndarray:
    """Distances from every sample to the given target sample indices (n, m)."""
    X = _effective_rows(features, config)
    T = X[np.asarray(targets, dtype=np.int64)]
    if config.metric == "cosine":
        D = 1.0 - X @ T.T
        np.clip(D, 0.0, None, out=D)
        return D
    return cdist(X, T, metric="euclidean")


@dataclass(frozen=True)
class MedoidDistances:
    """Distances that the medoid-based measures need, and nothing else.

    ``to_medoids`` is the (n, k) matrix of sample-to-medoid distances and
    ``between`` the (k, k) medoid-to-medoid matrix. Building this from
    features costs O(sum of squared class sizes + n*k) instead of O(n^2).
    """

    medoids: np.ndarray
    to_medoids: np.ndarray
    between: np.ndarray

    @classmethod
    def from_distance_matrix(cls, distances, index: ClassIndex) -> "MedoidDistances":
        V = as_distance_values(distances)
        meds = medoid_indices(V, index)
        return cls(
            medoids=_freeze(meds),
            to_medoids=_freeze(V[:, meds].astype(np.float64, copy=True)),
            between=_freeze(V[np.ix_(meds, meds)].astype(np.float64, copy=True)),
        )

    @classmethod
    def from_features(
        cls, features, index: ClassIndex, config: DistanceConfig = DistanceConfig()
    ) -> "MedoidDistances":
        meds = medoid_indices_from_features(features, index, config)
        to_med = distances_to_samples(features, meds, config)
        between = to_med[meds]
        # Exact zero self-distance and symmetry, as a sliced full matrix has.
        between = (between + between.T) / 2.0
        np.fill_diagonal(between, 0.0)
        to_med[meds, np.arange(index.k)] = 0.0
        return cls(medoids=_freeze(meds), to_medoids=_freeze(to_med), between=_freeze(between))
