"""Nearest-neighbor acceleration over a fixed point set (scipy cKDTree inside)."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree


class SpatialIndex:
    """Read-only KD-tree over an (n, 3) point array.

    Single-point nearest() breaks exact-distance ties by lowest point index so
    results are deterministic and independent of insertion order.
    """

    def __init__(self, points):
        pts = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, 3))
        self._points = pts
        self._tree = cKDTree(pts) if len(pts) else None

    @property
    def count(self) -> int:
        return self._points.shape[0]

    @property
    def points(self) -> np.ndarray:
        return self._points

    def nearest(self, query):
        """(point, distance, index) of the closest indexed point."""
        if self._tree is None:
            raise ValueError("empty cloud")
        q = np.asarray(query, dtype=float).reshape(3)
        d, i = self._tree.query(q)
        # Re-rank candidates at the winning distance so exact ties resolve to
        # the lowest index regardless of tree layout.
        radius = d * (1.0 + 1e-9) + 1e-15
        candidates = self._tree.query_ball_point(q, radius)
        cand = np.sort(np.asarray(candidates, dtype=int))
        dists = np.linalg.norm(self._points[cand] - q, axis=1)
        best = cand[np.argmin(dists)]
        return self._points[best].copy(), float(dists[np.argmin(dists)]), int(best)

    def nearest_many(self, queries):
        """(distances, indices) for a batch of queries (no tie re-ranking)."""
        if self._tree is None:
            raise ValueError("empty cloud")
        q = np.asarray(queries, dtype=float).reshape(-1, 3)
        d, i = self._tree.query(q)
        return d, i

    def within(self, center, radius: float) -> np.ndarray:
        """Sorted indices of points with distance <= radius from center."""
        if self._tree is None:
            return np.zeros(0, dtype=int)
        idx = self._tree.query_ball_point(np.asarray(center, dtype=float).reshape(3), radius)
        return np.sort(np.asarray(idx, dtype=int))

    def within_many(self, centers, radius: float) -> list:
        if self._tree is None:
            return [np.zeros(0, dtype=int) for _ in range(len(centers))]
        out = self._tree.query_ball_point(np.asarray(centers, dtype=float), radius)
        return [np.sort(np.asarray(ix, dtype=int)) for ix in out]


def nearest_neighbor(query, index: SpatialIndex):
    """(point, distance) of the indexed point closest to query."""
    point, dist, _ = index.nearest(query)
    return point, dist
