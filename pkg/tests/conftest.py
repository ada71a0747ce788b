import numpy as np
import pytest

from eegtda.pointcloud import DistanceMatrix, PointCloud, distance_matrix


def make_cloud(points: np.ndarray) -> PointCloud:
    points = np.asarray(points, dtype=np.float64)
    names = [f"CH{i:02d}" for i in range(len(points))]
    return PointCloud(points=points, channel_names=names,
                      explained_variance=np.zeros(points.shape[1]))


def random_dm(n: int, seed: int, dim: int = 3) -> DistanceMatrix:
    rng = np.random.default_rng(seed)
    return distance_matrix(make_cloud(rng.random((n, dim))))


def diagrams_equal(pd_a, pd_b) -> bool:
    """Exact multiset equality per dimension (zero-lifetime pairs included)."""
    for dim in range(max(pd_a.max_dim, pd_b.max_dim) + 1):
        a = np.column_stack(pd_a.pairs(dim, include_zero=True))
        b = np.column_stack(pd_b.pairs(dim, include_zero=True))
        if a.shape != b.shape or not np.array_equal(a, b):
            return False
    return True


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
