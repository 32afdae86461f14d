import numpy as np
import pytest

from granulometry import DistanceConfig, pairwise_distances

RAW = DistanceConfig(metric="euclidean", normalize=False)


@pytest.fixture
def separated_pair():
    """Two 1-D classes at {0,1} and {4,5}: cleanly separated."""
    points = np.array([[0.0], [1.0], [4.0], [5.0]])
    labels = np.array([0, 0, 1, 1])
    return pairwise_distances(points, RAW), labels


@pytest.fixture
def interleaved_pair():
    """Two 1-D classes interleaved at {0,2} and {1,3}."""
    points = np.array([[0.0], [1.0], [2.0], [3.0]])
    labels = np.array([0, 1, 0, 1])
    return pairwise_distances(points, RAW), labels


@pytest.fixture
def three_class():
    """Separated pair A/B plus a class C overlapping B."""
    points = np.array([[0.0], [1.0], [4.0], [5.0], [4.5], [5.5]])
    labels = np.array([0, 0, 1, 1, 2, 2])
    return pairwise_distances(points, RAW), labels


@pytest.fixture
def blob_instance():
    """A moderate random instance for property checks."""
    from granulometry import gaussian_blobs

    ds = gaussian_blobs(n=60, k=4, dims=3, seed=99, spread=5.0)
    return pairwise_distances(ds.features, RAW), ds.labels
