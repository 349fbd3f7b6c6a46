import numpy as np
import pytest

from regbench.features import RansacConfig, RegistrationParams, ransac_align, register_pair
from regbench.geometry import PointCloud, apply_transform
from regbench.metrics import relative_errors

from conftest import make_room_cloud, random_transform


def exact_problem(rng, n=100):
    pts = rng.uniform(-2, 2, size=(n, 3))
    truth = random_transform(rng)
    a = PointCloud(pts)
    b = PointCloud(truth.apply(pts))
    corr = np.column_stack([np.arange(n), np.arange(n)])
    return a, b, corr, truth


def test_ransac_exact_correspondences(rng):
    a, b, corr, truth = exact_problem(rng)
    fit, inliers = ransac_align(corr, a, b, seed=0)
    assert inliers == 100
    err = relative_errors(fit, truth)
    assert err.rre < 1e-7
    assert err.rte < 1e-9


def test_ransac_half_outliers(rng):
    a, b, corr, truth = exact_problem(rng, n=100)
    bad = corr.copy()
    bad[50:, 1] = rng.permutation(50)  # wrong targets for half the pairs
    failures = 0
    for seed in range(20):
        fit, inliers = ransac_align(bad, a, b, seed=seed)
        err = relative_errors(fit, truth)
        if err.rre > 1.0 or err.rte > 0.05:
            failures += 1
    assert failures == 0


def test_ransac_all_outliers_raises(rng):
    pts_a = rng.uniform(-100, 100, size=(10, 3))
    pts_b = rng.uniform(-100, 100, size=(10, 3))
    corr = np.column_stack([np.arange(10), np.arange(10)])
    with pytest.raises(ValueError, match="registration failed"):
        ransac_align(corr, PointCloud(pts_a), PointCloud(pts_b),
                     RansacConfig(max_iterations=2000), seed=1)


def test_ransac_too_few_correspondences(rng):
    pts = rng.normal(size=(2, 3))
    cloud = PointCloud(pts)
    with pytest.raises(ValueError, match="registration failed"):
        ransac_align(np.array([[0, 0], [1, 1]]), cloud, cloud, seed=0)


def test_ransac_deterministic_per_seed(rng):
    a, b, corr, _ = exact_problem(rng, n=60)
    bad = corr.copy()
    bad[30:, 1] = rng.permutation(30)
    fit1, n1 = ransac_align(bad, a, b, seed=7)
    fit2, n2 = ransac_align(bad, a, b, seed=7)
    assert n1 == n2
    np.testing.assert_array_equal(fit1.matrix(), fit2.matrix())


def test_register_pair_self(rng):
    cloud = make_room_cloud(rng)
    transform, diag = register_pair(cloud, cloud, seed=0)
    err = relative_errors(transform, __import__("regbench").RigidTransform.identity())
    assert err.rre < 0.1
    assert err.rte < 0.005
    assert diag["ransac_inliers"] > 0


def test_register_pair_recovers_offset(rng):
    # tripod captures share the gravity axis: yaw + shift is the honest motion
    from regbench.geometry import RigidTransform, rotation_about_axis
    target = make_room_cloud(rng, jitter=1e-4)
    truth = RigidTransform(rotation_about_axis([0, 0, 1], np.radians(25.0)),
                           [0.3, -0.2, 0.05])
    source = apply_transform(target, truth.inverse())
    transform, diag = register_pair(source, target, seed=3)
    err = relative_errors(transform, truth)
    assert err.rre < 2.0
    assert err.rte < 0.1


def test_register_pair_failure_propagates(rng):
    # two unrelated sparse blobs far apart: no valid registration
    a = PointCloud(rng.uniform(0, 0.5, size=(40, 3)))
    b = PointCloud(rng.uniform(100, 100.5, size=(40, 3)))
    params = RegistrationParams(voxel=0.05, ransac=RansacConfig(max_iterations=500))
    try:
        transform, diag = register_pair(a, b, params, seed=0)
    except ValueError as exc:
        assert "registration failed" in str(exc)
