"""PCA normal estimation with deterministic orientation."""

from __future__ import annotations

import numpy as np

from .cloud import PointCloud
from .spatial import SpatialIndex


def estimate_normals(cloud: PointCloud, radius: float,
                     orient_toward=None) -> tuple[PointCloud, np.ndarray]:
    """Attach unit normals from neighborhood PCA; (cloud, support_mask).

    Orientation flips each normal toward `orient_toward` (the sensor origin)
    when given, otherwise into the +Z hemisphere with lexicographic
    tie-breaks. Points with fewer than 3 neighbors get +Z and a False mask.
    """
    pts = cloud.points
    index = SpatialIndex(pts)
    normals = np.tile([0.0, 0.0, 1.0], (len(pts), 1))
    valid = np.zeros(len(pts), dtype=bool)
    for i, members in enumerate(index.within_many(pts, radius)):
        if len(members) < 3:
            continue
        nb = pts[members]
        centered = nb - nb.mean(axis=0)
        _, vecs = np.linalg.eigh(centered.T @ centered)
        normals[i] = vecs[:, 0]
        valid[i] = True
    if orient_toward is not None:
        to_ref = np.asarray(orient_toward, dtype=float) - pts
        flip = np.sum(normals * to_ref, axis=1) < 0
    else:
        flip = normals[:, 2] < 0
        ties = normals[:, 2] == 0
        flip |= ties & (normals[:, 0] < 0)
        flip |= ties & (normals[:, 0] == 0) & (normals[:, 1] < 0)
    normals[flip] = -normals[flip]
    lengths = np.linalg.norm(normals, axis=1)
    normals /= np.where(lengths > 0, lengths, 1.0)[:, None]
    return PointCloud(pts, normals), valid
