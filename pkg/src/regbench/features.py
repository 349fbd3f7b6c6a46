"""Classical pairwise registration: FPFH descriptors, descriptor matching,
RANSAC coarse alignment and the end-to-end pipeline with ICP refinement."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from ._kernels import spfh_pair_features
from .alignment import IcpConfig, icp
from .geometry import PointCloud, RigidTransform, SpatialIndex, kabsch_fit, voxel_downsample
from .geometry.normals import estimate_normals

N_BINS = 11          # per angular feature; 3 features -> 33-dim descriptor
MIN_NEIGHBORS = 5    # below this a keypoint gets a zero descriptor


@dataclass(frozen=True)
class FeatureCloud:
    keypoints: PointCloud
    descriptors: np.ndarray   # (n, 33)
    voxel: float | None
    feature_radius: float
    valid: np.ndarray         # (n,) False where the descriptor had no support

    def __post_init__(self):
        if self.descriptors.shape != (len(self.keypoints), 3 * N_BINS):
            raise ValueError("descriptor array must be (n_keypoints, 33)")
        if np.any(self.descriptors < 0):
            raise ValueError("descriptors must be non-negative")


@dataclass(frozen=True)
class RansacConfig:
    max_iterations: int = 100_000
    sample_size: int = 3
    inlier_threshold: float = 0.10   # m
    confidence: float = 0.999
    mutual_check: bool = True

    def __post_init__(self):
        if self.inlier_threshold <= 0:
            raise ValueError("inlier_threshold must be positive")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must be in (0, 1)")
        if self.sample_size not in (3, 4):
            raise ValueError("sample_size must be 3 or 4")


@dataclass(frozen=True)
class RegistrationParams:
    voxel: float = 0.05
    normal_radius: float = 0.10
    feature_radius: float = 0.25
    ransac: RansacConfig = field(default_factory=RansacConfig)
    icp_refine: bool = True
    icp_max_dist: float = 0.10
    icp_max_iterations: int = 30


def _bin_index(values, lo, hi):
    idx = np.floor((values - lo) / (hi - lo) * N_BINS).astype(np.int64)
    return np.clip(idx, 0, N_BINS - 1)


def compute_fpfh(cloud: PointCloud, voxel: float | None = 0.05,
                 normal_radius: float = 0.10, feature_radius: float = 0.25,
                 sensor_origin=None) -> FeatureCloud:
    """33-bin fast point feature histograms over voxel-downsampled keypoints.

    The simplified per-point pass histograms the three Darboux-frame angles
    against every neighbor inside feature_radius; a second pass accumulates
    neighbors' histograms weighted by inverse distance. Each 11-bin block is
    normalized to sum 100. Normals orient toward `sensor_origin` when given.
    Keypoints with fewer than 5 neighbors keep a zero descriptor and are
    flagged invalid.
    """
    if len(cloud) == 0:
        raise ValueError("empty cloud")
    if voxel is not None:
        if not feature_radius > normal_radius > voxel * 0.999:
            raise ValueError("require feature_radius > normal_radius > voxel")
        keypoints = voxel_downsample(cloud, voxel)
    else:
        keypoints = cloud
    if keypoints.has_normals:
        with_normals = keypoints
    else:
        with_normals, _ = estimate_normals(keypoints, normal_radius, orient_toward=sensor_origin)
    pts = with_normals.points
    normals = with_normals.normals
    n = len(pts)

    index = SpatialIndex(pts)
    neighbor_lists = index.within_many(pts, feature_radius)
    pair_i = []
    pair_j = []
    for i, members in enumerate(neighbor_lists):
        others = members[members != i]
        pair_i.append(np.full(len(others), i, dtype=np.int64))
        pair_j.append(others.astype(np.int64))
    pair_i = np.concatenate(pair_i) if pair_i else np.zeros(0, dtype=np.int64)
    pair_j = np.concatenate(pair_j) if pair_j else np.zeros(0, dtype=np.int64)

    alpha, phi, theta, dist, ok = spfh_pair_features(pts, normals, pair_i, pair_j)

    spfh = np.zeros((n, 3 * N_BINS))
    src = pair_i[ok]
    flat = src * (3 * N_BINS)
    np.add.at(spfh.reshape(-1), flat + _bin_index(alpha[ok], -1.0, 1.0), 1.0)
    np.add.at(spfh.reshape(-1), flat + N_BINS + _bin_index(phi[ok], -1.0, 1.0), 1.0)
    np.add.at(spfh.reshape(-1), flat + 2 * N_BINS + _bin_index(theta[ok], -np.pi, np.pi), 1.0)

    counts = np.bincount(src, minlength=n).astype(float)
    fpfh = spfh.copy()
    weights = 1.0 / dist[ok]
    contrib = spfh[pair_j[ok]] * weights[:, None] / counts[src][:, None]
    np.add.at(fpfh, src, contrib)

    # per-block percentage normalization
    for b in range(3):
        block = fpfh[:, b * N_BINS:(b + 1) * N_BINS]
        sums = block.sum(axis=1)
        nz = sums > 0
        block[nz] = block[nz] / sums[nz, None] * 100.0

    valid = counts >= MIN_NEIGHBORS
    fpfh[~valid] = 0.0
    return FeatureCloud(with_normals, fpfh, voxel, feature_radius, valid)


def match_features(a: FeatureCloud, b: FeatureCloud, mutual: bool = True) -> np.ndarray:
    """(m, 2) keypoint index pairs: each valid a-descriptor's NN in b,
    optionally kept only when reciprocal."""
    ia = np.where(a.valid)[0]
    ib = np.where(b.valid)[0]
    if len(ia) == 0 or len(ib) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    tree_b = cKDTree(b.descriptors[ib])
    _, nn_ab = tree_b.query(a.descriptors[ia])
    if not mutual:
        return np.column_stack([ia, ib[nn_ab]])
    tree_a = cKDTree(a.descriptors[ia])
    _, nn_ba = tree_a.query(b.descriptors[ib])
    keep = nn_ba[nn_ab] == np.arange(len(ia))
    return np.column_stack([ia[keep], ib[nn_ab[keep]]])


def _batched_rigid_fits(pa, pb):
    """Least-squares rigid fits for (B, k, 3) source/target sample sets."""
    ca = pa.mean(axis=1, keepdims=True)
    cb = pb.mean(axis=1, keepdims=True)
    h = np.einsum("bki,bkj->bij", pa - ca, pb - cb)
    u, _, vt = np.linalg.svd(h)
    det = np.linalg.det(np.einsum("bij,bkj->bik", vt.transpose(0, 2, 1), u))
    d = np.ones((len(pa), 3))
    d[:, 2] = np.sign(det)
    rot = np.einsum("bji,bj,bkj->bik", vt, d, u)
    t = cb[:, 0, :] - np.einsum("bij,bj->bi", rot, ca[:, 0, :])
    return rot, t


def ransac_align(correspondences, keypoints_a: PointCloud, keypoints_b: PointCloud,
                 cfg: RansacConfig = RansacConfig(), seed: int = 0):
    """Correspondence RANSAC; returns (transform, inlier_count).

    Minimal Kabsch hypotheses are scored by inliers under the threshold; the
    iteration budget shrinks with the usual confidence bound and the best
    hypothesis is refit on its inlier set. A hypothesis must gather support
    beyond its own minimal sample; otherwise registration fails.
    """
    corr = np.asarray(correspondences, dtype=np.int64).reshape(-1, 2)
    if len(corr) < cfg.sample_size:
        raise ValueError("registration failed")
    pa = keypoints_a.points[corr[:, 0]]
    pb = keypoints_b.points[corr[:, 1]]
    m = len(corr)
    rng = np.random.default_rng(seed)

    best_count = 0
    best_mask = None
    needed = cfg.max_iterations
    done = 0
    chunk = 256
    while done < needed:
        batch = min(chunk, needed - done)
        samples = rng.integers(0, m, size=(batch, cfg.sample_size))
        rot, t = _batched_rigid_fits(pa[samples], pb[samples])
        for k in range(batch):
            resid = pa @ rot[k].T + t[k] - pb
            mask = np.einsum("ij,ij->i", resid, resid) <= cfg.inlier_threshold ** 2
            count = int(mask.sum())
            if count > best_count:
                best_count = count
                best_mask = mask
                w = count / m
                if w >= 1.0:
                    needed = done + k + 1
                else:
                    bound = np.log1p(-cfg.confidence) / np.log1p(-(w ** cfg.sample_size))
                    needed = min(needed, done + k + 1 + int(np.ceil(bound)))
        done += batch

    if best_count <= cfg.sample_size:
        raise ValueError("registration failed")
    # refit on the inlier set, then recount with the polished transform
    for _ in range(2):
        fit = kabsch_fit(pa[best_mask], pb[best_mask])
        resid = fit.apply(pa) - pb
        best_mask = np.einsum("ij,ij->i", resid, resid) <= cfg.inlier_threshold ** 2
    return fit, int(best_mask.sum())


def register_pair(source: PointCloud, target: PointCloud,
                  params: RegistrationParams = RegistrationParams(),
                  seed: int = 0,
                  source_origin=None, target_origin=None):
    """FPFH -> matching -> RANSAC -> optional ICP polish; (transform, diagnostics).

    Raises ValueError("registration failed") when RANSAC finds no supported
    hypothesis; callers record such pairs as unsuccessful.
    """
    diag = {}
    t0 = time.perf_counter()
    fa = compute_fpfh(source, params.voxel, params.normal_radius,
                      params.feature_radius, sensor_origin=source_origin)
    fb = compute_fpfh(target, params.voxel, params.normal_radius,
                      params.feature_radius, sensor_origin=target_origin)
    diag["keypoints_source"] = len(fa.keypoints)
    diag["keypoints_target"] = len(fb.keypoints)
    diag["time_features"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    corr = match_features(fa, fb, mutual=params.ransac.mutual_check)
    diag["matches"] = len(corr)
    diag["time_matching"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    coarse, inliers = ransac_align(corr, fa.keypoints, fb.keypoints, params.ransac, seed=seed)
    diag["ransac_inliers"] = inliers
    diag["inlier_ratio"] = inliers / max(len(corr), 1)
    diag["time_ransac"] = time.perf_counter() - t0

    transform = coarse
    if params.icp_refine:
        t0 = time.perf_counter()
        refined = icp(fa.keypoints, fb.keypoints, coarse,
                      IcpConfig(max_iterations=params.icp_max_iterations,
                                correspondence_max_dist=params.icp_max_dist))
        transform = refined.transform
        diag["icp_rmse"] = refined.rmse
        diag["icp_iterations"] = refined.iterations
        diag["time_icp"] = time.perf_counter() - t0
    return transform, diag
