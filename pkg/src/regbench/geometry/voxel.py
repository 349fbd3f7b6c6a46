"""Voxel-grid downsampling."""

from __future__ import annotations

import numpy as np

from .cloud import PointCloud


def voxel_downsample(cloud: PointCloud, voxel: float) -> PointCloud:
    """One point per occupied voxel, at the centroid of its members.

    Output order follows sorted voxel keys, so it is independent of input
    permutation. Normals, when present, are averaged and renormalized;
    voxels whose normals cancel out drop the normal attribute entirely.
    """
    if voxel <= 0:
        raise ValueError("voxel size must be positive")
    if len(cloud) == 0:
        return cloud
    keys = np.floor(cloud.points / voxel).astype(np.int64)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    counts = np.bincount(inverse, minlength=len(uniq)).astype(float)
    centroids = np.zeros((len(uniq), 3))
    np.add.at(centroids, inverse, cloud.points)
    centroids /= counts[:, None]
    if cloud.normals is None:
        return PointCloud(centroids)
    sums = np.zeros((len(uniq), 3))
    np.add.at(sums, inverse, cloud.normals)
    lengths = np.linalg.norm(sums, axis=1)
    if np.any(lengths < 1e-9):
        return PointCloud(centroids)
    return PointCloud(centroids, sums / lengths[:, None])
