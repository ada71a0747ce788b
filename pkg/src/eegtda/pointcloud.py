"""Channels-as-points PCA embedding and its distance matrix.

Each trial row (one channel's 10 s of samples) becomes one point in R^d via
the top-d principal components of the centered channels x samples matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import ConfigError, InputError
from .preprocessing import Trial


@dataclass
class PointCloud:
    points: np.ndarray  # (c, d)
    channel_names: list[str]
    explained_variance: np.ndarray  # (d,), descending

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass
class DistanceMatrix:
    dist: np.ndarray  # (c, c) symmetric, zero diagonal

    @property
    def n_points(self) -> int:
        return self.dist.shape[0]


def pca_embed(trial: Trial, d: int = 3) -> PointCloud:
    """Project the trial's channels onto their top-d principal components.

    Centering subtracts the per-time-sample mean across channels, so the
    cloud's centroid sits at the origin. Scores come from the SVD of the
    centered matrix; each component's sign is fixed by making its
    largest-magnitude loading positive, so embeddings are reproducible.
    """
    x = np.asarray(trial.data, dtype=np.float64)
    c, t = x.shape
    if not 1 <= d <= min(c, t):
        raise ConfigError(f"embedding dim d={d} must lie in [1, min(c,t)={min(c, t)}]")
    if not np.all(np.isfinite(x)):
        raise InputError("trial data contains non-finite values")

    centered = x - x.mean(axis=0, keepdims=True)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)

    # degenerate directions: treat numerically-zero singular values as zero
    tol = max(c, t) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    s = np.where(s > tol, s, 0.0)

    for k in range(d):
        j = np.argmax(np.abs(vt[k]))
        if vt[k, j] < 0:
            vt[k] = -vt[k]
            u[:, k] = -u[:, k]

    scores = u[:, :d] * s[:d]
    explained = s[:d] ** 2 / (c - 1)
    return PointCloud(
        points=scores,
        channel_names=list(trial.channel_names),
        explained_variance=explained,
    )


def distance_matrix(pc: PointCloud) -> DistanceMatrix:
    """Euclidean distances, computed once per unordered pair (exact symmetry)."""
    condensed = pdist(pc.points, metric="euclidean")
    return DistanceMatrix(dist=squareform(condensed))
