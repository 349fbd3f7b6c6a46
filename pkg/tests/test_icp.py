import numpy as np
import pytest

from regbench.alignment import IcpConfig, align_stage_to_anchor, icp
from regbench.geometry import RigidTransform, apply_transform, rotation_about_axis

from conftest import make_room_cloud


def small_motion(rng, angle_deg=5.0, shift=0.1):
    axis = rng.normal(size=3)
    rot = rotation_about_axis(axis, np.radians(angle_deg))
    v = rng.normal(size=3)
    v = v / np.linalg.norm(v) * shift
    return RigidTransform(rot, v)


def recovery_errors(estimate, truth):
    from regbench.metrics import relative_errors
    e = relative_errors(estimate, truth)
    return e.rre, e.rte


@pytest.mark.parametrize("variant", ["point_to_point", "point_to_plane"])
def test_icp_identity_on_identical_clouds(variant, rng):
    cloud = make_room_cloud(rng)
    result = icp(cloud, cloud, RigidTransform.identity(), IcpConfig(variant=variant))
    assert result.iterations == 1
    assert result.rmse < 1e-10
    np.testing.assert_allclose(result.transform.rotation, np.eye(3), atol=1e-10)
    np.testing.assert_allclose(result.transform.translation, np.zeros(3), atol=1e-10)


@pytest.mark.parametrize("variant", ["point_to_point", "point_to_plane"])
def test_icp_recovers_small_motion(variant, rng):
    target = make_room_cloud(rng)
    truth = small_motion(rng, angle_deg=5.0, shift=0.1)
    source = apply_transform(target, truth.inverse())
    result = icp(source, target, RigidTransform.identity(), IcpConfig(variant=variant))
    rre, rte = recovery_errors(result.transform, truth)
    assert rre < 0.5
    assert rte < 0.01


def test_icp_tolerates_partial_change(rng):
    # a fifth of the scene moves a meter; the static majority must win
    target = make_room_cloud(rng)
    pts = target.points.copy()
    n = len(pts)
    moved = rng.choice(n, size=n // 5, replace=False)
    pts[moved] += [1.0, 0.0, 0.0]
    from regbench.geometry import PointCloud
    changed_target = PointCloud(pts)
    truth = small_motion(rng, angle_deg=3.0, shift=0.08)
    source = apply_transform(target, truth.inverse())
    result = icp(source, changed_target, RigidTransform.identity(), IcpConfig())
    rre, rte = recovery_errors(result.transform, truth)
    assert rre < 1.0
    assert rte < 0.05


def test_icp_rmse_never_increases(rng):
    # instrumented re-run: trace inlier RMSE via successively capped iterations
    target = make_room_cloud(rng)
    truth = small_motion(rng, angle_deg=8.0, shift=0.15)
    source = apply_transform(target, truth.inverse())
    rmses = []
    for cap in range(1, 12):
        cfg = IcpConfig(max_iterations=cap, convergence_eps=1e-12)
        rmses.append(icp(source, target, RigidTransform.identity(), cfg).rmse)
    assert all(b <= a + 1e-9 for a, b in zip(rmses, rmses[1:]))


def test_icp_bad_init_raises(rng):
    target = make_room_cloud(rng)
    source = apply_transform(target, RigidTransform(np.eye(3), [100.0, 0.0, 0.0]))
    with pytest.raises(ValueError, match="no correspondences"):
        icp(source, target, RigidTransform.identity(), IcpConfig())


def test_icp_iteration_cap(rng):
    target = make_room_cloud(rng)
    source = apply_transform(target, small_motion(rng, 6.0, 0.2).inverse())
    result = icp(source, target, RigidTransform.identity(),
                 IcpConfig(max_iterations=2, convergence_eps=1e-15))
    assert result.iterations <= 2


def test_align_stage_to_anchor_self_is_identity(rng):
    scan = make_room_cloud(rng)
    out = align_stage_to_anchor(scan, scan, RigidTransform.identity())
    np.testing.assert_allclose(out.transform.rotation, np.eye(3), atol=1e-10)
    np.testing.assert_allclose(out.transform.translation, np.zeros(3), atol=1e-10)
    assert out.median_displacement < 1e-10


def test_align_stage_with_geometry_swap(rng):
    # same room, ~30% of points replaced by new structured geometry, known offset
    anchor = make_room_cloud(rng)
    n = len(anchor.points)
    keep = rng.choice(n, size=int(n * 0.7), replace=False)
    ys, zs = np.meshgrid(np.arange(0.5, 2.5, 0.04), np.arange(0.0, 2.0, 0.04), indexing="ij")
    new_wall = np.column_stack([np.full(ys.size, 2.0), ys.ravel(), zs.ravel()])
    from regbench.geometry import PointCloud
    stage_world = PointCloud(np.vstack([anchor.points[keep], new_wall]))
    truth = small_motion(rng, angle_deg=4.0, shift=0.1)
    stage = apply_transform(stage_world, truth.inverse())
    out = align_stage_to_anchor(stage, anchor, RigidTransform.identity())
    rre, rte = recovery_errors(out.transform, truth)
    assert rre < 1.0
    assert rte < 0.05


def test_reported_displacement_tracks_noise_floor(rng):
    anchor = make_room_cloud(rng)
    noisy = make_room_cloud(rng, jitter=0.005)
    out = align_stage_to_anchor(noisy, anchor, RigidTransform.identity())
    assert out.median_displacement < 0.01
