"""Point clouds: ordered 3D points with optional unit normals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .transforms import RigidTransform

_NORMAL_TOL = 1e-6


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float).reshape(-1, 3))
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite point coordinates")
        object.__setattr__(self, "points", pts)
        if self.normals is not None:
            nrm = np.ascontiguousarray(np.asarray(self.normals, dtype=float).reshape(-1, 3))
            if nrm.shape[0] != pts.shape[0]:
                raise ValueError("normals length does not match point count")
            lengths = np.linalg.norm(nrm, axis=1)
            if np.any(np.abs(lengths - 1.0) > _NORMAL_TOL):
                raise ValueError("normals are not unit length")
            object.__setattr__(self, "normals", nrm)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def has_normals(self) -> bool:
        return self.normals is not None

    def select(self, index) -> "PointCloud":
        """Subset by integer indices or boolean mask, normals included."""
        nrm = self.normals[index] if self.normals is not None else None
        return PointCloud(self.points[index], nrm)


def apply_transform(cloud: PointCloud, t: RigidTransform) -> PointCloud:
    """Rigidly move a cloud; normals are rotated only. The input is untouched."""
    pts = t.apply(cloud.points)
    nrm = cloud.normals @ t.rotation.T if cloud.normals is not None else None
    return PointCloud(pts, nrm)


def merge(clouds) -> PointCloud:
    """Concatenate clouds; normals are kept only if every input has them."""
    clouds = list(clouds)
    pts = np.vstack([c.points for c in clouds]) if clouds else np.zeros((0, 3))
    if clouds and all(c.has_normals for c in clouds):
        return PointCloud(pts, np.vstack([c.normals for c in clouds]))
    return PointCloud(pts)
