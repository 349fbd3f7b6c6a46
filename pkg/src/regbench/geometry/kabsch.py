"""Closed-form weighted least-squares rigid alignment (Kabsch/Umeyama)."""

from __future__ import annotations

import numpy as np

from .transforms import RigidTransform

_RANK_TOL = 1e-9


def kabsch_fit(source, target, weights=None) -> RigidTransform:
    """Rigid transform minimizing sum of weighted squared residuals |T(s) - t|^2.

    Correspondences are index-aligned. Reflections are corrected by flipping
    the sign of the smallest singular vector, so the result is always a proper
    rotation. Raises on fewer than 3 pairs or a collinear/degenerate set.
    """
    src = np.asarray(source, dtype=float).reshape(-1, 3)
    tgt = np.asarray(target, dtype=float).reshape(-1, 3)
    if src.shape != tgt.shape or src.shape[0] < 3:
        raise ValueError("degenerate correspondence set")
    if weights is None:
        w = np.ones(src.shape[0])
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape[0] != src.shape[0] or np.any(w < 0):
            raise ValueError("weights must be non-negative, one per pair")
    total = w.sum()
    if total <= 0 or np.count_nonzero(w) < 3:
        raise ValueError("degenerate correspondence set")

    cs = (w[:, None] * src).sum(axis=0) / total
    ct = (w[:, None] * tgt).sum(axis=0) / total
    h = (w[:, None] * (src - cs)).T @ (tgt - ct)
    u, s, vt = np.linalg.svd(h)
    if s[1] <= _RANK_TOL * max(s[0], 1.0):
        # Rank < 2: all points on a line (or a single point); the rotation
        # about that line is unobservable.
        raise ValueError("degenerate correspondence set")
    d = np.sign(np.linalg.det(vt.T @ u.T))
    rot = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    return RigidTransform(rot, ct - rot @ cs)
