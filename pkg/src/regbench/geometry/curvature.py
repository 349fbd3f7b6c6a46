"""Local surface variation from the 3D structure tensor."""

from __future__ import annotations

import numpy as np

from .cloud import PointCloud
from .spatial import SpatialIndex


def _variation_from_neighbors(neighbors: np.ndarray) -> float:
    centered = neighbors - neighbors.mean(axis=0)
    cov = centered.T @ centered
    total = np.trace(cov)
    if total <= 0.0:
        return 0.0
    eig = np.linalg.eigvalsh(cov)
    return float(max(eig[0], 0.0) / total)


def local_curvature(cloud: PointCloud, center, radius: float,
                    index: SpatialIndex | None = None) -> float:
    """Smallest-eigenvalue share of the neighborhood structure tensor, in [0, 1/3].

    The tensor is the unnormalized covariance of points within `radius` of
    `center`; the eigenvalue ratio makes the result scale-free. Fewer than 3
    neighbors raise; zero total variance returns 0 by convention.
    """
    idx = index if index is not None else SpatialIndex(cloud.points)
    members = idx.within(center, radius)
    if len(members) < 3:
        raise ValueError("insufficient support")
    return _variation_from_neighbors(cloud.points[members])


def curvature_many(cloud: PointCloud, centers, radius: float,
                   index: SpatialIndex | None = None):
    """Batch local_curvature; (values, valid) with valid=False where support < 3."""
    idx = index if index is not None else SpatialIndex(cloud.points)
    centers = np.asarray(centers, dtype=float).reshape(-1, 3)
    values = np.zeros(len(centers))
    valid = np.zeros(len(centers), dtype=bool)
    for k, members in enumerate(idx.within_many(centers, radius)):
        if len(members) < 3:
            continue
        values[k] = _variation_from_neighbors(cloud.points[members])
        valid[k] = True
    return values, valid
