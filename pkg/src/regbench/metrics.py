"""Pair characterization and evaluation metrics.

Overlap ratio, temporal change ratio and mean overlap curvature describe a
GT-aligned fragment pair; relative rotation/translation errors, recall and
the pairwise/global RMSE figures score registration results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .geometry import (
    PointCloud,
    RigidTransform,
    SpatialIndex,
    compose,
    convex_hull,
    curvature_many,
    kabsch_fit,
    rotation_angle_deg,
)

DEFAULT_TAU = 0.2            # m, spatial-overlap neighbor threshold
DEFAULT_CURVATURE_RADIUS = 0.5   # m, structure-tensor support sphere
DEFAULT_RRE_MAX = 10.0       # deg, recall rotation threshold
DEFAULT_RTE_MAX = 0.2        # m, recall translation threshold


@dataclass(frozen=True)
class PairMetrics:
    overlap_ratio: float
    temporal_change_ratio: float
    mean_curvature: float
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not 0.0 <= self.overlap_ratio <= 1.0:
            raise ValueError("overlap ratio out of [0, 1]")
        if not 0.0 <= self.temporal_change_ratio <= 1.0:
            raise ValueError("temporal change ratio out of [0, 1]")
        if not 0.0 <= self.mean_curvature <= 1.0 / 3.0 + 1e-12:
            raise ValueError("mean curvature out of [0, 1/3]")


@dataclass(frozen=True)
class RegistrationErrors:
    rre: float  # degrees
    rte: float  # meters

    def __post_init__(self):
        if not (0.0 <= self.rre <= 180.0) or not np.isfinite(self.rte) or self.rte < 0:
            raise ValueError("invalid registration errors")


def overlap_mask(source: PointCloud, target: PointCloud, tau: float = DEFAULT_TAU,
                 target_index: SpatialIndex | None = None) -> np.ndarray:
    """Boolean mask over source points whose NN distance to target is <= tau."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if len(target) == 0:
        return np.zeros(len(source), dtype=bool)
    idx = target_index if target_index is not None else SpatialIndex(target.points)
    d, _ = idx.nearest_many(source.points)
    return d <= tau


def overlap_set(source: PointCloud, target: PointCloud, tau: float = DEFAULT_TAU,
                target_index: SpatialIndex | None = None) -> PointCloud:
    """The source points with a target neighbor within tau (clouds GT-aligned)."""
    return source.select(overlap_mask(source, target, tau, target_index))


def overlap_ratio(source: PointCloud, target: PointCloud, tau: float = DEFAULT_TAU,
                  target_index: SpatialIndex | None = None) -> float:
    """|overlap set| / |source|. Asymmetric in the two roles by definition."""
    if len(source) == 0:
        raise ValueError("empty source")
    return float(overlap_mask(source, target, tau, target_index).sum()) / len(source)


def temporal_change_ratio(source: PointCloud, target: PointCloud,
                          tau: float = DEFAULT_TAU,
                          target_index: SpatialIndex | None = None,
                          target_hull=None) -> float:
    """Changed fraction of source points inside the target's convex envelope.

    With H the enveloped source points and O the tau-overlap set, returns
    1 - |O n H| / |H|; the intersection keeps the ratio in [0, 1] even when
    overlap points fall outside the hull. |H| = 0 returns 0 by convention.
    A degenerate (coplanar) target hull propagates ValueError.
    """
    hull = target_hull if target_hull is not None else convex_hull(target.points)
    enveloped = hull.contains(source.points)
    n_env = int(enveloped.sum())
    if n_env == 0:
        return 0.0
    overlapping = overlap_mask(source, target, tau, target_index)
    return 1.0 - float((overlapping & enveloped).sum()) / n_env


def mean_overlap_curvature(source: PointCloud, target: PointCloud,
                           tau: float = DEFAULT_TAU,
                           radius: float = DEFAULT_CURVATURE_RADIUS,
                           target_index: SpatialIndex | None = None,
                           source_index: SpatialIndex | None = None,
                           max_points: int | None = None,
                           seed: int = 0):
    """Mean local curvature over the overlap set; (value, skipped_count).

    Neighborhoods come from the source cloud. Points with fewer than 3
    neighbors at `radius` are skipped and counted. `max_points` caps the
    evaluation at a seeded subsample for large overlaps.
    """
    mask = overlap_mask(source, target, tau, target_index)
    centers = source.points[mask]
    if len(centers) == 0:
        raise ValueError("no overlap")
    if max_points is not None and len(centers) > max_points:
        rng = np.random.default_rng(seed)
        centers = centers[rng.choice(len(centers), size=max_points, replace=False)]
    sidx = source_index if source_index is not None else SpatialIndex(source.points)
    values, valid = curvature_many(source, centers, radius, index=sidx)
    skipped = int((~valid).sum())
    if valid.sum() == 0:
        raise ValueError("no overlap points with sufficient support")
    return float(values[valid].mean()), skipped


def relative_errors(estimate: RigidTransform, ground_truth: RigidTransform) -> RegistrationErrors:
    """RRE (deg, via the clamped-trace angle) and RTE (m) of an estimate."""
    rre = rotation_angle_deg(ground_truth.rotation.T @ estimate.rotation)
    rte = float(np.linalg.norm(ground_truth.translation - estimate.translation))
    return RegistrationErrors(rre, rte)


def registration_recall(results, rre_max: float = DEFAULT_RRE_MAX,
                        rte_max: float = DEFAULT_RTE_MAX) -> float:
    """Fraction of pairs with rre < rre_max AND rte < rte_max (strict)."""
    if rre_max <= 0 or rte_max <= 0:
        raise ValueError("thresholds must be positive")
    results = list(results)
    if not results:
        raise ValueError("no pairs")
    good = sum(1 for r in results if r.rre < rre_max and r.rte < rte_max)
    return good / len(results)


def pairwise_rmse(source: PointCloud, target: PointCloud,
                  estimate: RigidTransform, ground_truth: RigidTransform) -> float:
    """RMS displacement of source points between the two transforms.

    The target cloud does not enter the computation; it is accepted so the
    signature matches the evaluation pipeline's per-pair records.
    """
    if len(source) == 0:
        raise ValueError("empty source")
    diff = estimate.apply(source.points) - ground_truth.apply(source.points)
    return float(np.sqrt(np.mean(np.sum(diff * diff, axis=1))))


def gauge_align(estimates, gt_poses, anchors) -> RigidTransform:
    """Best-fit rigid transform G with G(T_est(a)) ~ T_gt(a) over anchor points."""
    src = np.array([t.apply(a) for t, a in zip(estimates, anchors)])
    tgt = np.array([t.apply(a) for t, a in zip(gt_poses, anchors)])
    return kabsch_fit(src, tgt)


def global_rmse(fragments, estimates, gt_poses=None) -> float:
    """Mean per-fragment RMSE between estimated and GT placements, gauge-fixed.

    `fragments` is a sequence of point arrays or objects with `.points`;
    `gt_poses` defaults to each fragment's `gt_pose` attribute. A single
    best-fit rigid motion over fragment centroids removes the global gauge
    before the residuals are measured.
    """
    frags = list(fragments)
    estimates = list(estimates)
    if len(frags) != len(estimates):
        raise ValueError("one estimate per fragment required")
    if gt_poses is None:
        gt_poses = [f.gt_pose for f in frags]
    pts = [np.asarray(getattr(f, "points", f), dtype=float) for f in frags]
    centroids = [p.mean(axis=0) for p in pts]
    gauge = gauge_align(estimates, gt_poses, centroids)
    per_fragment = []
    for p, est, gt in zip(pts, estimates, gt_poses):
        diff = compose(gauge, est).apply(p) - gt.apply(p)
        per_fragment.append(np.sqrt(np.mean(np.sum(diff * diff, axis=1))))
    return float(np.mean(per_fragment))


def classification_scores(scored):
    """(mAP, AUROC) for (probability, binary label) pairs.

    mAP is the interpolation-free precision-recall summation over all score
    thresholds; AUROC is the Mann-Whitney rank statistic with ties averaged.
    Both are invariant to strictly monotone score transforms.
    """
    scored = list(scored)
    scores = np.array([s for s, _ in scored], dtype=float)
    labels = np.array([int(l) for _, l in scored])
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("degenerate labels")

    # AP: sweep thresholds downward; group tied scores into one threshold.
    order = np.argsort(-scores, kind="stable")
    s_sorted = scores[order]
    l_sorted = labels[order]
    tp = np.cumsum(l_sorted)
    fp = np.cumsum(1 - l_sorted)
    boundary = np.r_[s_sorted[1:] != s_sorted[:-1], True]
    tp, fp = tp[boundary], fp[boundary]
    recall = tp / n_pos
    precision = tp / (tp + fp)
    prev_recall = np.r_[0.0, recall[:-1]]
    ap = float(np.sum((recall - prev_recall) * precision))

    ranks = rankdata(scores)
    auroc = float((ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))
    return ap, auroc


def compute_pair_metrics(source: PointCloud, target: PointCloud,
                         tau: float = DEFAULT_TAU,
                         radius: float = DEFAULT_CURVATURE_RADIUS,
                         target_index: SpatialIndex | None = None,
                         target_hull=None,
                         curvature_max_points: int | None = 500) -> PairMetrics:
    """OR, TCR and mean curvature for one GT-aligned pair."""
    tindex = target_index if target_index is not None else SpatialIndex(target.points)
    o_mask = overlap_mask(source, target, tau, tindex)
    ratio = float(o_mask.sum()) / len(source)
    tcr = temporal_change_ratio(source, target, tau, tindex, target_hull)
    if o_mask.any():
        curv, _ = mean_overlap_curvature(source, target, tau, radius,
                                         target_index=tindex,
                                         max_points=curvature_max_points)
    else:
        curv = 0.0
    return PairMetrics(ratio, tcr, min(curv, 1.0 / 3.0), tau)
