"""Ground-truth machinery: ICP refinement, anchor-stage alignment and the
cylinder-crop pair refinement around sensor locations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import (
    PointCloud,
    RigidTransform,
    SpatialIndex,
    compose,
    kabsch_fit,
    transform_exp,
)
from .geometry.normals import estimate_normals
from .metrics import relative_errors

SWEEP_RADII = tuple(range(2, 19, 2))  # m; refinement context sweep


@dataclass(frozen=True)
class IcpConfig:
    max_iterations: int = 50
    correspondence_max_dist: float = 0.5   # m
    convergence_eps: float = 1e-6          # relative inlier-RMSE change
    variant: str = "point_to_plane"        # or "point_to_point"
    normal_radius: float = 0.5             # m, for targets without normals

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.correspondence_max_dist <= 0 or self.convergence_eps <= 0:
            raise ValueError("correspondence_max_dist and convergence_eps must be positive")
        if self.variant not in ("point_to_plane", "point_to_point"):
            raise ValueError(f"unknown ICP variant: {self.variant}")


class IcpResult(NamedTuple):
    transform: RigidTransform
    rmse: float
    iterations: int


class StageAlignment(NamedTuple):
    transform: RigidTransform
    median_displacement: float
    rmse: float
    iterations: int


class RefinedPair(NamedTuple):
    transform: RigidTransform
    te: float       # m, deviation from the pseudo ground truth
    re: float       # deg
    rmse: float
    iterations: int


@dataclass(frozen=True)
class CylinderCrop:
    center_xy: np.ndarray
    radius: float
    z_range: tuple | None = None  # None keeps the full scan height

    def __post_init__(self):
        object.__setattr__(self, "center_xy", np.asarray(self.center_xy, dtype=float).reshape(2))
        if self.radius <= 0:
            raise ValueError("radius must be positive")


def crop_cylinder(scan: PointCloud, crop: CylinderCrop) -> PointCloud:
    """Points with XY distance to the center <= radius (full height by default)."""
    d = np.linalg.norm(scan.points[:, :2] - crop.center_xy, axis=1)
    mask = d <= crop.radius
    if crop.z_range is not None:
        mask &= (scan.points[:, 2] >= crop.z_range[0]) & (scan.points[:, 2] <= crop.z_range[1])
    return scan.select(mask)


def _point_to_plane_step(src_pts, tgt_pts, tgt_normals) -> RigidTransform:
    r = np.sum((src_pts - tgt_pts) * tgt_normals, axis=1)
    jac = np.hstack([np.cross(src_pts, tgt_normals), tgt_normals])
    delta, *_ = np.linalg.lstsq(jac, -r, rcond=None)
    return transform_exp(delta)


def _inlier_rmse(src_pts, index: SpatialIndex, max_dist: float):
    d, idx = index.nearest_many(src_pts)
    mask = d <= max_dist
    if not mask.any():
        return np.inf, mask, idx
    return float(np.sqrt(np.mean(d[mask] ** 2))), mask, idx


def icp(source: PointCloud, target: PointCloud, init: RigidTransform,
        cfg: IcpConfig = IcpConfig()) -> IcpResult:
    """Iterative closest point with trimmed correspondences.

    Alternates NN matching (pairs beyond correspondence_max_dist rejected)
    with a Kabsch or linearized point-to-plane update. An update that would
    raise the inlier RMSE is rolled back and iteration stops, so the reported
    RMSE never increases across accepted iterations.
    """
    if len(source) == 0 or len(target) == 0:
        raise ValueError("empty cloud")
    index = SpatialIndex(target.points)
    if cfg.variant == "point_to_plane":
        if target.has_normals:
            tgt_normals = target.normals
        else:
            with_normals, _ = estimate_normals(target, cfg.normal_radius)
            tgt_normals = with_normals.normals

    current = init
    src = current.apply(source.points)
    rmse, mask, idx = _inlier_rmse(src, index, cfg.correspondence_max_dist)
    if not mask.any():
        raise ValueError("no correspondences -- bad initialization")

    iterations = 0
    for _ in range(cfg.max_iterations):
        matched_src = src[mask]
        matched_tgt = target.points[idx[mask]]
        if cfg.variant == "point_to_point":
            delta = kabsch_fit(matched_src, matched_tgt)
        else:
            delta = _point_to_plane_step(matched_src, matched_tgt, tgt_normals[idx[mask]])
        candidate = compose(delta, current)
        new_src = candidate.apply(source.points)
        new_rmse, new_mask, new_idx = _inlier_rmse(new_src, index, cfg.correspondence_max_dist)
        if not new_mask.any() or new_rmse > rmse + 1e-9:
            break  # roll back: keep `current`
        iterations += 1
        converged = (new_rmse <= 1e-12
                     or abs(rmse - new_rmse) <= cfg.convergence_eps * max(rmse, 1e-12))
        current, src, rmse, mask, idx = candidate, new_src, new_rmse, new_mask, new_idx
        if converged:
            break
    return IcpResult(current, rmse, iterations)


def align_stage_to_anchor(stage_scan: PointCloud, anchor_scan: PointCloud,
                          coarse_init: RigidTransform,
                          cfg: IcpConfig = IcpConfig()) -> StageAlignment:
    """Refine a coarse stage-to-anchor transform.

    Runs ICP three times with the correspondence gate halved each pass, so
    changed geometry stops attracting matches once the static structure is
    roughly aligned. Reports the median cross-stage NN displacement as the
    alignment quality figure.
    """
    from dataclasses import replace

    current = coarse_init
    iterations = 0
    result = None
    for gate in (cfg.correspondence_max_dist, cfg.correspondence_max_dist / 2,
                 cfg.correspondence_max_dist / 4):
        result = icp(stage_scan, anchor_scan, current,
                     replace(cfg, correspondence_max_dist=gate))
        current = result.transform
        iterations += result.iterations
    moved = current.apply(stage_scan.points)
    d, _ = SpatialIndex(anchor_scan.points).nearest_many(moved)
    return StageAlignment(current, float(np.median(d)), result.rmse, iterations)


def refine_pair_ground_truth(source_scan: PointCloud, target_scan: PointCloud,
                             source_pose: RigidTransform, target_pose: RigidTransform,
                             source_sensor_xy, target_sensor_xy,
                             radius: float = 12.0,
                             cfg: IcpConfig = IcpConfig(),
                             pseudo_gt: RigidTransform | None = None) -> RefinedPair:
    """Locally refine one pair's relative ground truth inside cylinder context.

    Scans live in the (anchor-aligned) area frame; poses map each fragment's
    local frame into it. The pseudo ground truth (default: derived from the
    poses) initializes ICP between the two crops, and the returned TE/RE
    measure how far refinement moved away from it.
    """
    crop_s = crop_cylinder(source_scan, CylinderCrop(source_sensor_xy, radius))
    crop_t = crop_cylinder(target_scan, CylinderCrop(target_sensor_xy, radius))
    if len(crop_s) == 0 or len(crop_t) == 0:
        raise ValueError("context crop empty")
    if pseudo_gt is None:
        pseudo_gt = compose(target_pose.inverse(), source_pose)
    # area-frame initialization implied by the pseudo GT
    init = compose(target_pose, compose(pseudo_gt, source_pose.inverse()))
    result = icp(crop_s, crop_t, init, cfg)
    refined = compose(target_pose.inverse(), compose(result.transform, source_pose))
    err = relative_errors(refined, pseudo_gt)
    return RefinedPair(refined, err.rte, err.rre, result.rmse, result.iterations)


def refine_radius_sweep(source_scan, target_scan, source_pose, target_pose,
                        source_sensor_xy, target_sensor_xy,
                        radii=SWEEP_RADII, cfg: IcpConfig = IcpConfig(),
                        pseudo_gt: RigidTransform | None = None):
    """One RefinedPair per context radius; rows of the TE/RE-vs-radius curve."""
    rows = []
    for radius in radii:
        refined = refine_pair_ground_truth(
            source_scan, target_scan, source_pose, target_pose,
            source_sensor_xy, target_sensor_xy, radius=radius, cfg=cfg,
            pseudo_gt=pseudo_gt)
        rows.append((float(radius), refined))
    return rows
