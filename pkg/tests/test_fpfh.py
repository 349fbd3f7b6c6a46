import numpy as np
import pytest

from regbench.features import compute_fpfh, match_features
from regbench.geometry import PointCloud, apply_transform, voxel_downsample

from conftest import random_transform


def plane_cloud(spacing=0.025, extent=1.0, z=0.0):
    xs = np.arange(0, extent + 1e-9, spacing)
    xx, yy = np.meshgrid(xs, xs, indexing="ij")
    return PointCloud(np.column_stack([xx.ravel(), yy.ravel(), np.full(xx.size, z)]))


def corner_cloud(spacing=0.025, extent=1.0, jitter=0.0, rng=None):
    """Two half-planes meeting at a right angle along the y axis.

    `jitter` breaks the exact lattice degeneracy (perfectly flat geometry
    parks pair features on histogram bin boundaries, which no real capture
    ever does).
    """
    xs = np.arange(0, extent + 1e-9, spacing)
    xx, yy = np.meshgrid(xs, xs, indexing="ij")
    floor = np.column_stack([xx.ravel(), yy.ravel(), np.zeros(xx.size)])
    wall = np.column_stack([np.zeros(xx.size), yy.ravel(), xx.ravel() + spacing])
    pts = np.vstack([floor, wall])
    if jitter > 0:
        pts = pts + rng.normal(scale=jitter, size=pts.shape)
    return PointCloud(pts)


def test_plane_descriptors_uniform():
    fc = compute_fpfh(plane_cloud(), voxel=0.05)
    pts = fc.keypoints.points
    interior = (pts[:, 0] > 0.3) & (pts[:, 0] < 0.7) & (pts[:, 1] > 0.3) & (pts[:, 1] < 0.7)
    desc = fc.descriptors[interior & fc.valid]
    assert len(desc) > 10
    mean_norm = np.linalg.norm(desc, axis=1).mean()
    d = desc - desc.mean(axis=0)
    spread = np.linalg.norm(d, axis=1).max()
    assert spread < 0.05 * mean_norm


def test_corner_separable_from_plane():
    fc = compute_fpfh(corner_cloud(), voxel=0.05)
    pts = fc.keypoints.points
    near_corner = (pts[:, 0] < 0.08) & (pts[:, 2] < 0.08) & (pts[:, 1] > 0.3) & (pts[:, 1] < 0.7)
    flat = (pts[:, 0] > 0.45) & (pts[:, 2] < 0.01) & (pts[:, 1] > 0.3) & (pts[:, 1] < 0.7)
    corner_desc = fc.descriptors[near_corner & fc.valid]
    flat_desc = fc.descriptors[flat & fc.valid]
    assert len(corner_desc) > 3 and len(flat_desc) > 3
    intra = np.linalg.norm(flat_desc - flat_desc.mean(axis=0), axis=1).mean()
    inter = np.linalg.norm(corner_desc.mean(axis=0) - flat_desc.mean(axis=0))
    assert inter > 3 * intra


def test_descriptors_invariant_under_rigid_motion(rng):
    scene = corner_cloud(jitter=1e-4, rng=rng)
    keypoints = voxel_downsample(scene, 0.05)
    origin = np.array([0.5, 0.5, 0.5])
    t = random_transform(rng, translation_scale=3.0)
    fa = compute_fpfh(keypoints, voxel=None, sensor_origin=origin)
    fb = compute_fpfh(apply_transform(keypoints, t), voxel=None, sensor_origin=t.apply(origin))
    assert fa.descriptors.shape == fb.descriptors.shape
    np.testing.assert_allclose(fa.descriptors, fb.descriptors, atol=1e-6)


def test_isolated_keypoint_flagged_zero():
    pts = np.vstack([plane_cloud(extent=0.5).points, [[50.0, 50.0, 50.0]]])
    fc = compute_fpfh(PointCloud(pts), voxel=0.05)
    far = np.argmax(np.linalg.norm(fc.keypoints.points - [50, 50, 50], axis=1) < 1.0)
    assert not fc.valid[far]
    np.testing.assert_array_equal(fc.descriptors[far], 0.0)


def test_descriptor_blocks_sum_to_100():
    fc = compute_fpfh(corner_cloud(), voxel=0.05)
    desc = fc.descriptors[fc.valid]
    for b in range(3):
        sums = desc[:, b * 11:(b + 1) * 11].sum(axis=1)
        np.testing.assert_allclose(sums, 100.0, atol=1e-9)


def test_match_self_is_identity(rng):
    fc = compute_fpfh(corner_cloud(jitter=1e-4, rng=rng), voxel=0.05)
    corr = match_features(fc, fc, mutual=True)
    valid_idx = np.where(fc.valid)[0]
    # exact-duplicate descriptors (repeating flat geometry) make a handful of
    # self-matches ambiguous; everything that survives must be an identity
    # pair or a zero-distance duplicate
    assert len(corr) >= 0.95 * len(valid_idx)
    identity = corr[:, 0] == corr[:, 1]
    dup = np.linalg.norm(fc.descriptors[corr[:, 0]] - fc.descriptors[corr[:, 1]], axis=1) == 0
    assert np.all(identity | dup)
    assert identity.mean() > 0.9


def test_match_transformed_copy_mostly_correct(rng):
    scene = corner_cloud(jitter=1e-4, rng=rng)
    keypoints = voxel_downsample(scene, 0.05)
    origin = np.array([0.5, 0.5, 0.5])
    t = random_transform(rng, translation_scale=2.0)
    fa = compute_fpfh(keypoints, voxel=None, sensor_origin=origin)
    fb = compute_fpfh(apply_transform(keypoints, t), voxel=None, sensor_origin=t.apply(origin))
    corr = match_features(fa, fb, mutual=True)
    assert len(corr) > 0.5 * fa.valid.sum()
    correct = np.mean(corr[:, 0] == corr[:, 1])
    assert correct >= 0.95


def test_match_unrelated_descriptors_sparse(rng):
    scene = corner_cloud()
    fa = compute_fpfh(scene, voxel=0.05)
    noise = PointCloud(rng.uniform(0, 1, size=(400, 3)))
    fb = compute_fpfh(noise, voxel=0.05)
    corr = match_features(fa, fb, mutual=True)
    assert len(corr) < min(fa.valid.sum(), fb.valid.sum())
