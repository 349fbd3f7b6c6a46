# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: ray/triangle casting and FPFH pair features.

The arithmetic mirrors regbench._kernels.pyfallback operation for operation
(component-wise dots and crosses, no reassociation) so both backends produce
identical results; keep the two files in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, fabs, sqrt

cnp.import_array()

DEF DET_EPS = 1e-12
DEF T_MIN = 1e-9


def ray_cast(
    cnp.ndarray[cnp.float64_t, ndim=2] origins,
    cnp.ndarray[cnp.float64_t, ndim=2] directions,
    cnp.ndarray[cnp.float64_t, ndim=2] vertices,
    cnp.ndarray[cnp.int64_t, ndim=2] faces,
):
    """First-hit distances for rays against a triangle soup.

    Returns (t, tri) where t[i] is the ray parameter of the closest hit
    (inf if none) and tri[i] the triangle index (-1 if none). Ties at equal
    t go to the lowest triangle index.
    """
    cdef Py_ssize_t n_rays = origins.shape[0]
    cdef Py_ssize_t n_tris = faces.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t_out = np.full(n_rays, np.inf)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] tri_out = np.full(n_rays, -1, dtype=np.int64)

    # Precompute triangle edges once.
    cdef cnp.ndarray[cnp.float64_t, ndim=2] v0 = vertices[faces[:, 0]]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] e1 = vertices[faces[:, 1]] - v0
    cdef cnp.ndarray[cnp.float64_t, ndim=2] e2 = vertices[faces[:, 2]] - v0

    cdef double ox, oy, oz, dx, dy, dz
    cdef double e1x, e1y, e1z, e2x, e2y, e2z
    cdef double px, py, pz, sx, sy, sz, qx, qy, qz
    cdef double det, inv, u, v, t, best
    cdef Py_ssize_t i, j, best_j

    for i in range(n_rays):
        ox = origins[i, 0]; oy = origins[i, 1]; oz = origins[i, 2]
        dx = directions[i, 0]; dy = directions[i, 1]; dz = directions[i, 2]
        best = np.inf
        best_j = -1
        for j in range(n_tris):
            e1x = e1[j, 0]; e1y = e1[j, 1]; e1z = e1[j, 2]
            e2x = e2[j, 0]; e2y = e2[j, 1]; e2z = e2[j, 2]
            px = dy * e2z - dz * e2y
            py = dz * e2x - dx * e2z
            pz = dx * e2y - dy * e2x
            det = e1x * px + e1y * py + e1z * pz
            if fabs(det) < DET_EPS:
                continue
            inv = 1.0 / det
            sx = ox - v0[j, 0]; sy = oy - v0[j, 1]; sz = oz - v0[j, 2]
            u = (sx * px + sy * py + sz * pz) * inv
            if u < 0.0 or u > 1.0:
                continue
            qx = sy * e1z - sz * e1y
            qy = sz * e1x - sx * e1z
            qz = sx * e1y - sy * e1x
            v = (dx * qx + dy * qy + dz * qz) * inv
            if v < 0.0 or u + v > 1.0:
                continue
            t = (e2x * qx + e2y * qy + e2z * qz) * inv
            if t >= T_MIN and t < best:
                best = t
                best_j = j
        t_out[i] = best
        tri_out[i] = best_j
    return t_out, tri_out


def spfh_pair_features(
    cnp.ndarray[cnp.float64_t, ndim=2] points,
    cnp.ndarray[cnp.float64_t, ndim=2] normals,
    cnp.ndarray[cnp.int64_t, ndim=1] pair_i,
    cnp.ndarray[cnp.int64_t, ndim=1] pair_j,
):
    """Darboux-frame angular features (alpha, phi, theta) plus distance per pair.

    Degenerate pairs (zero distance, or the separation parallel to the source
    normal) are flagged invalid.
    """
    cdef Py_ssize_t n = pair_i.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] phi = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] theta = np.zeros(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist = np.zeros(n)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] valid = np.zeros(n, dtype=np.uint8)

    cdef Py_ssize_t k, a, b
    cdef double dxx, dyy, dzz, d, dux, duy, duz
    cdef double n1x, n1y, n1z, n2x, n2y, n2z
    cdef double ang1, ang2, tmp
    cdef double vx, vy, vz, vn, wx, wy, wz

    for k in range(n):
        a = pair_i[k]
        b = pair_j[k]
        dxx = points[b, 0] - points[a, 0]
        dyy = points[b, 1] - points[a, 1]
        dzz = points[b, 2] - points[a, 2]
        d = sqrt(dxx * dxx + dyy * dyy + dzz * dzz)
        if d == 0.0:
            continue
        dux = dxx / d; duy = dyy / d; duz = dzz / d
        n1x = normals[a, 0]; n1y = normals[a, 1]; n1z = normals[a, 2]
        n2x = normals[b, 0]; n2y = normals[b, 1]; n2z = normals[b, 2]
        ang1 = n1x * dux + n1y * duy + n1z * duz
        ang2 = n2x * dux + n2y * duy + n2z * duz
        # The point whose normal is better aligned with the separation acts
        # as the frame source.
        if fabs(ang1) < fabs(ang2):
            tmp = n1x; n1x = n2x; n2x = tmp
            tmp = n1y; n1y = n2y; n2y = tmp
            tmp = n1z; n1z = n2z; n2z = tmp
            dux = -dux; duy = -duy; duz = -duz
            ang1 = -ang2
        vx = duy * n1z - duz * n1y
        vy = duz * n1x - dux * n1z
        vz = dux * n1y - duy * n1x
        vn = sqrt(vx * vx + vy * vy + vz * vz)
        if vn < 1e-12:
            continue
        vx = vx / vn; vy = vy / vn; vz = vz / vn
        wx = n1y * vz - n1z * vy
        wy = n1z * vx - n1x * vz
        wz = n1x * vy - n1y * vx
        alpha[k] = vx * n2x + vy * n2y + vz * n2z
        phi[k] = ang1
        theta[k] = atan2(wx * n2x + wy * n2y + wz * n2z,
                         n1x * n2x + n1y * n2y + n1z * n2z)
        dist[k] = d
        valid[k] = 1
    return alpha, phi, theta, dist, valid.view(np.bool_)
