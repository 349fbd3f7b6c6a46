import numpy as np
import pytest

from regbench.geometry import PointCloud, voxel_downsample


def test_two_points_same_voxel_merge_to_midpoint():
    cloud = PointCloud([[0.1, 0.1, 0.1], [0.3, 0.3, 0.3]])
    out = voxel_downsample(cloud, 0.5)
    assert len(out) == 1
    np.testing.assert_allclose(out.points[0], [0.2, 0.2, 0.2])


def test_grid_points_with_small_voxel_keep_count():
    xs = np.arange(5, dtype=float)
    grid = np.array([[x, y, z] for x in xs for y in xs for z in xs])
    out = voxel_downsample(PointCloud(grid), 0.5)
    assert len(out) == len(grid)


def test_output_within_voxel_radius_of_cell_center(rng):
    pts = rng.uniform(-3, 3, size=(2000, 3))
    v = 0.37
    out = voxel_downsample(PointCloud(pts), v)
    assert len(out) <= len(pts)
    centers = (np.floor(out.points / v) + 0.5) * v
    dist = np.linalg.norm(out.points - centers, axis=1)
    assert np.all(dist <= np.sqrt(3.0) / 2.0 * v + 1e-12)


def test_centroids_match_direct_grouping(rng):
    pts = rng.uniform(-1, 1, size=(500, 3))
    v = 0.25
    out = voxel_downsample(PointCloud(pts), v)
    groups = {}
    for p in pts:
        groups.setdefault(tuple(np.floor(p / v).astype(int)), []).append(p)
    expected = np.array(sorted((np.mean(g, axis=0).tolist() for g in groups.values())))
    got = np.array(sorted(out.points.tolist()))
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_order_invariance(rng):
    pts = rng.uniform(-1, 1, size=(300, 3))
    a = voxel_downsample(PointCloud(pts), 0.3)
    b = voxel_downsample(PointCloud(pts[rng.permutation(300)]), 0.3)
    np.testing.assert_allclose(a.points, b.points, atol=1e-12)


def test_normals_averaged_and_unit(rng):
    normals = np.tile([0.0, 0.0, 1.0], (10, 1))
    cloud = PointCloud(rng.uniform(0, 0.1, size=(10, 3)), normals)
    out = voxel_downsample(cloud, 1.0)
    assert out.has_normals
    np.testing.assert_allclose(out.normals[0], [0, 0, 1], atol=1e-12)


def test_invalid_voxel_size():
    cloud = PointCloud([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [2.0, 0.0, 1.0]])
    with pytest.raises(ValueError):
        voxel_downsample(cloud, 0.0)
    with pytest.raises(ValueError):
        voxel_downsample(cloud, -1.0)
