import numpy as np
import pytest

from regbench.geometry import (
    PointCloud,
    RigidTransform,
    apply_transform,
    compose,
    kabsch_fit,
    rotation_angle_deg,
)

from conftest import random_transform


def fit_errors(fit, truth):
    rre = rotation_angle_deg(truth.rotation.T @ fit.rotation)
    rte = np.linalg.norm(truth.translation - fit.translation)
    return rre, rte


def test_identity_on_equal_clouds(rng):
    pts = rng.normal(size=(40, 3))
    t = kabsch_fit(pts, pts)
    np.testing.assert_allclose(t.rotation, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(t.translation, np.zeros(3), atol=1e-12)


def test_recovers_random_transform(rng):
    src = rng.normal(size=(50, 3))
    truth = random_transform(rng)
    tgt = truth.apply(src)
    fit = kabsch_fit(src, tgt)
    rre, rte = fit_errors(fit, truth)
    assert rre < 1e-9 * 180 / np.pi or rre < 1e-7  # angle error in degrees
    assert rte < 1e-9


def test_coplanar_four_points(rng):
    src = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
    truth = random_transform(rng)
    fit = kabsch_fit(src, truth.apply(src))
    rre, rte = fit_errors(fit, truth)
    assert rre < 1e-7
    assert rte < 1e-9


def test_weighted_fit_ignores_zero_weight_outlier(rng):
    src = rng.normal(size=(30, 3))
    truth = random_transform(rng)
    tgt = truth.apply(src)
    tgt[0] += 100.0  # corrupted pair, weighted out
    w = np.ones(30)
    w[0] = 0.0
    fit = kabsch_fit(src, tgt, weights=w)
    rre, rte = fit_errors(fit, truth)
    assert rre < 1e-7
    assert rte < 1e-9


def test_rejects_too_few_or_collinear():
    with pytest.raises(ValueError, match="degenerate"):
        kabsch_fit([[0, 0, 0], [1, 1, 1]], [[0, 0, 0], [1, 1, 1]])
    line = np.outer(np.arange(5, dtype=float), [1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="degenerate"):
        kabsch_fit(line, line + 1.0)


def test_rejects_negative_weights(rng):
    pts = rng.normal(size=(5, 3))
    with pytest.raises(ValueError):
        kabsch_fit(pts, pts, weights=[-1, 1, 1, 1, 1])


def test_never_returns_reflection(rng):
    # Noisy near-planar data is where reflections would sneak in.
    for _ in range(20):
        src = rng.normal(size=(10, 3)) * np.array([1.0, 1.0, 1e-4])
        tgt = rng.normal(size=(10, 3)) * np.array([1.0, 1.0, 1e-4])
        fit = kabsch_fit(src, tgt)
        assert np.linalg.det(fit.rotation) > 0.0


def test_invariant_to_common_rigid_motion(rng):
    src = rng.normal(size=(60, 3))
    truth = random_transform(rng)
    tgt = truth.apply(src)
    g = random_transform(rng)
    fit_plain = kabsch_fit(src, tgt)
    fit_moved = kabsch_fit(g.apply(src), g.apply(tgt))
    expected = compose(g, compose(fit_plain, g.inverse()))
    np.testing.assert_allclose(fit_moved.rotation, expected.rotation, atol=1e-8)
    np.testing.assert_allclose(fit_moved.translation, expected.translation, atol=1e-8)


def test_minimizes_weighted_residual(rng):
    # The fit must beat random perturbations of itself.
    src = rng.normal(size=(25, 3))
    tgt = random_transform(rng).apply(src) + rng.normal(scale=0.05, size=(25, 3))
    w = rng.uniform(0.1, 2.0, size=25)
    fit = kabsch_fit(src, tgt, weights=w)

    def cost(t):
        r = t.apply(src) - tgt
        return float(np.sum(w * np.sum(r * r, axis=1)))

    best = cost(fit)
    for _ in range(50):
        jig = RigidTransform(
            fit.rotation @ np.linalg.qr(np.eye(3) + rng.normal(scale=1e-3, size=(3, 3)))[0],
            fit.translation + rng.normal(scale=1e-3, size=3),
        )
        assert cost(jig) >= best - 1e-12
