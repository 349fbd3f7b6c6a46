"""3D convex hulls with a half-space containment test."""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull as _QhullHull
from scipy.spatial import QhullError

_SLACK_TOL = 1e-9


class ConvexHull:
    """Convex hull of >= 4 non-coplanar points (qhull inside).

    contains() is true for points inside or on the hull, with 1e-9 absolute
    tolerance on the half-space slack. Coplanar or collinear inputs raise
    ValueError("degenerate hull"); callers are expected to handle it.
    """

    def __init__(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        if pts.shape[0] < 4:
            raise ValueError("degenerate hull")
        try:
            hull = _QhullHull(pts)
        except QhullError as exc:
            raise ValueError("degenerate hull") from exc
        # Outward facet equations: normal . x + offset <= 0 inside.
        self.equations = hull.equations.copy()
        self.vertices = pts[hull.vertices].copy()
        self.volume = float(hull.volume)

    def slack(self, points) -> np.ndarray:
        """Max signed facet distance per point (<= 0 means inside)."""
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        return (pts @ self.equations[:, :3].T + self.equations[:, 3]).max(axis=1)

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        mask = self.slack(pts.reshape(-1, 3)) <= _SLACK_TOL
        return bool(mask[0]) if single else mask


def convex_hull(points) -> ConvexHull:
    return ConvexHull(points)
