import numpy as np
import pytest

from regbench.geometry import PointCloud, RigidTransform


def random_rotation(rng):
    """Uniform-ish random proper rotation via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] *= -1
    return q


def random_transform(rng, translation_scale=1.0):
    return RigidTransform(random_rotation(rng), rng.normal(scale=translation_scale, size=3))


def make_room_cloud(rng=None, spacing=0.08, size=(4.0, 3.0, 2.5), jitter=0.0):
    """Point samples of a rectangular room (floor + 4 walls) plus two crates.

    Structured geometry with corners and planes, the standard fixture for
    ICP/registration tests.
    """
    sx, sy, sz = size
    pts = []

    def grid(u_lim, v_lim):
        u = np.arange(0.0, u_lim + 1e-9, spacing)
        v = np.arange(0.0, v_lim + 1e-9, spacing)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        return uu.ravel(), vv.ravel()

    u, v = grid(sx, sy)
    pts.append(np.column_stack([u, v, np.zeros_like(u)]))            # floor
    u, v = grid(sx, sz)
    pts.append(np.column_stack([u, np.zeros_like(u), v]))            # wall y=0
    pts.append(np.column_stack([u, np.full_like(u, sy), v]))         # wall y=sy
    u, v = grid(sy, sz)
    pts.append(np.column_stack([np.zeros_like(u), u, v]))            # wall x=0
    pts.append(np.column_stack([np.full_like(u, sx), u, v]))         # wall x=sx

    for cx, cy, edge in [(1.0, 1.0, 0.6), (2.8, 1.9, 0.4)]:
        u, v = grid(edge, edge)
        base = np.column_stack([u, v, np.zeros_like(u)])
        for axis, offset in [(2, edge), (1, 0.0), (1, edge), (0, 0.0), (0, edge)]:
            face = base.copy()
            face[:, axis] = offset
            face[:, 0] += cx
            face[:, 1] += cy
            pts.append(face)

    cloud = np.vstack(pts)
    if jitter > 0 and rng is not None:
        cloud = cloud + rng.normal(scale=jitter, size=cloud.shape)
    return PointCloud(cloud)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
