"""Pure-numpy implementations of the compiled kernels.

Mirrors _native.pyx operation for operation; keep the two in sync. Used when
the extension is unavailable or when REGBENCH_KERNELS=python.
"""

import numpy as np

_DET_EPS = 1e-12
_T_MIN = 1e-9
_RAY_CHUNK = 256


def ray_cast(origins, directions, vertices, faces):
    """First-hit distances for rays against a triangle soup (chunked numpy)."""
    n_rays = origins.shape[0]
    v0 = vertices[faces[:, 0]]
    e1 = vertices[faces[:, 1]] - v0
    e2 = vertices[faces[:, 2]] - v0

    t_out = np.full(n_rays, np.inf)
    tri_out = np.full(n_rays, -1, dtype=np.int64)

    for start in range(0, n_rays, _RAY_CHUNK):
        o = origins[start:start + _RAY_CHUNK]       # (r, 3)
        d = directions[start:start + _RAY_CHUNK]    # (r, 3)
        dx, dy, dz = d[:, 0:1], d[:, 1:2], d[:, 2:3]

        # p = d x e2, per (ray, triangle)
        px = dy * e2[:, 2] - dz * e2[:, 1]
        py = dz * e2[:, 0] - dx * e2[:, 2]
        pz = dx * e2[:, 1] - dy * e2[:, 0]
        det = e1[:, 0] * px + e1[:, 1] * py + e1[:, 2] * pz
        ok = np.abs(det) >= _DET_EPS
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / det
            s = o[:, None, :] - v0[None, :, :]
            sx, sy, sz = s[..., 0], s[..., 1], s[..., 2]
            u = (sx * px + sy * py + sz * pz) * inv
            ok &= (u >= 0.0) & (u <= 1.0)
            qx = sy * e1[:, 2] - sz * e1[:, 1]
            qy = sz * e1[:, 0] - sx * e1[:, 2]
            qz = sx * e1[:, 1] - sy * e1[:, 0]
            v = (dx * qx + dy * qy + dz * qz) * inv
            ok &= (v >= 0.0) & (u + v <= 1.0)
            t = (e2[:, 0] * qx + e2[:, 1] * qy + e2[:, 2] * qz) * inv
        ok &= t >= _T_MIN
        t = np.where(ok, t, np.inf)
        # argmin returns the first (lowest-index) triangle on exact ties,
        # matching the compiled loop's strict-< update rule.
        best_j = np.argmin(t, axis=1)
        best_t = t[np.arange(t.shape[0]), best_j]
        hit = np.isfinite(best_t)
        t_out[start:start + _RAY_CHUNK] = best_t
        tri_out[start:start + _RAY_CHUNK] = np.where(hit, best_j, -1)
    return t_out, tri_out


def spfh_pair_features(points, normals, pair_i, pair_j):
    """Darboux-frame angular features (alpha, phi, theta) plus distance per pair."""
    n = pair_i.shape[0]
    alpha = np.zeros(n)
    phi = np.zeros(n)
    theta = np.zeros(n)
    dist = np.zeros(n)
    valid = np.zeros(n, dtype=bool)
    if n == 0:
        return alpha, phi, theta, dist, valid

    delta = points[pair_j] - points[pair_i]
    d = np.sqrt(delta[:, 0] * delta[:, 0] + delta[:, 1] * delta[:, 1]
                + delta[:, 2] * delta[:, 2])
    nz = d > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        du = delta / d[:, None]
    du[~nz] = 0.0

    n1 = normals[pair_i].copy()
    n2 = normals[pair_j].copy()
    ang1 = n1[:, 0] * du[:, 0] + n1[:, 1] * du[:, 1] + n1[:, 2] * du[:, 2]
    ang2 = n2[:, 0] * du[:, 0] + n2[:, 1] * du[:, 1] + n2[:, 2] * du[:, 2]
    swap = np.abs(ang1) < np.abs(ang2)
    n1[swap], n2[swap] = n2[swap], n1[swap].copy()
    du[swap] = -du[swap]
    ang1 = np.where(swap, -ang2, ang1)

    vx = du[:, 1] * n1[:, 2] - du[:, 2] * n1[:, 1]
    vy = du[:, 2] * n1[:, 0] - du[:, 0] * n1[:, 2]
    vz = du[:, 0] * n1[:, 1] - du[:, 1] * n1[:, 0]
    vn = np.sqrt(vx * vx + vy * vy + vz * vz)
    ok = nz & (vn >= 1e-12)
    vn_safe = np.where(vn > 0.0, vn, 1.0)
    vx, vy, vz = vx / vn_safe, vy / vn_safe, vz / vn_safe
    wx = n1[:, 1] * vz - n1[:, 2] * vy
    wy = n1[:, 2] * vx - n1[:, 0] * vz
    wz = n1[:, 0] * vy - n1[:, 1] * vx

    alpha[ok] = (vx * n2[:, 0] + vy * n2[:, 1] + vz * n2[:, 2])[ok]
    phi[ok] = ang1[ok]
    theta[ok] = np.arctan2(wx * n2[:, 0] + wy * n2[:, 1] + wz * n2[:, 2],
                           n1[:, 0] * n2[:, 0] + n1[:, 1] * n2[:, 1]
                           + n1[:, 2] * n2[:, 2])[ok]
    dist[ok] = d[ok]
    valid = ok
    return alpha, phi, theta, dist, valid
