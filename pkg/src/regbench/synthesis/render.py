"""Panoramic depth rendering against triangle meshes.

Each capture casts one pinhole view per (pitch, yaw) stop of the rig, keeps
first hits inside the sensor's working range, perturbs them with the noise
model and back-projects to a point cloud in the mesh frame. Depth means range
along the ray. Per-view RNG streams derive from (seed, view index) so serial
and parallel rendering agree.
"""

from __future__ import annotations

import numpy as np

from .._kernels import ray_cast
from ..geometry.cloud import PointCloud
from .mesh import TriangleMesh
from .sensor import NoiseModel, SensorModel


def pixel_directions(model: SensorModel) -> np.ndarray:
    """(H, W, 3) unit ray directions in the camera frame (x right, y down, z forward)."""
    width, height = model.image_size
    f_px = (height / 2.0) / np.tan(np.radians(model.vertical_fov_deg) / 2.0)
    u = (np.arange(width) + 0.5 - width / 2.0) / f_px
    v = (np.arange(height) + 0.5 - height / 2.0) / f_px
    uu, vv = np.meshgrid(u, v, indexing="xy")
    dirs = np.stack([uu, vv, np.ones_like(uu)], axis=-1)
    return dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)


def view_rotation(yaw_deg: float, pitch_deg: float) -> np.ndarray:
    """Camera-to-world rotation for a view (world +Z up, yaw about it)."""
    yaw = np.radians(yaw_deg)
    pitch = np.radians(pitch_deg)
    forward = np.array([np.cos(pitch) * np.cos(yaw),
                        np.cos(pitch) * np.sin(yaw),
                        np.sin(pitch)])
    right = np.array([np.sin(yaw), -np.cos(yaw), 0.0])
    down = np.cross(forward, right)
    return np.column_stack([right, down, forward])


def render_view(mesh: TriangleMesh, position, yaw_deg: float, pitch_deg: float,
                model: SensorModel):
    """Noise-free (range_image, triangle_index_image) for one pinhole view."""
    width, height = model.image_size
    cam_dirs = pixel_directions(model).reshape(-1, 3)
    rot = view_rotation(yaw_deg, pitch_deg)
    dirs = np.ascontiguousarray(cam_dirs @ rot.T)
    origins = np.ascontiguousarray(np.broadcast_to(np.asarray(position, dtype=float), dirs.shape))
    t, tri = ray_cast(origins, dirs, mesh.vertices, mesh.faces)
    return t.reshape(height, width), tri.reshape(height, width)


def _noise_fields(rng, shape):
    """All random draws for one image, fixed order and count."""
    jitter = rng.normal(size=(shape[0], shape[1], 2))
    axial = rng.standard_normal(size=shape)
    drop = rng.uniform(size=shape)
    return jitter, axial, drop


def _jitter_lookup(jitter, sigma_px, shape):
    """Source-pixel indices after lateral jitter (identity when sigma is 0)."""
    vv, uu = np.meshgrid(np.arange(shape[0]), np.arange(shape[1]), indexing="ij")
    if sigma_px <= 0:
        return vv, uu
    src_v = np.clip(np.rint(vv + jitter[..., 0] * sigma_px).astype(int), 0, shape[0] - 1)
    src_u = np.clip(np.rint(uu + jitter[..., 1] * sigma_px).astype(int), 0, shape[1] - 1)
    return src_v, src_u


def apply_sensor_noise(depth_image, model: NoiseModel, seed,
                       incidence_deg=None) -> np.ndarray:
    """Perturb a range image: lateral pixel jitter, axial Gaussian, dropout.

    Invalid pixels are NaN in and out. Dropout needs the per-pixel incidence
    angle (degrees from the surface normal) and is skipped without it.
    Deterministic per seed; the draw count depends only on the image shape,
    so masking cannot shift the stream.
    """
    depth = np.asarray(depth_image, dtype=float)
    rng = np.random.default_rng(seed)
    jitter, axial, drop = _noise_fields(rng, depth.shape)
    src_v, src_u = _jitter_lookup(jitter, model.lateral_sigma_px, depth.shape)
    out = depth[src_v, src_u]
    if incidence_deg is not None:
        incidence_deg = np.asarray(incidence_deg, dtype=float)[src_v, src_u]

    valid = np.isfinite(out)
    out = np.where(valid, out + axial * model.axial_sigma(np.where(valid, out, 0.0)), np.nan)
    if incidence_deg is not None:
        out = np.where(drop < model.dropout_probability(incidence_deg), np.nan, out)
    return out


def render_fragment(mesh: TriangleMesh, position, yaw_deg: float,
                    model: SensorModel, seed: int, noise: bool = True) -> PointCloud:
    """Full panoramic capture at one tripod pose, as a cloud in the mesh frame.

    Per-point normals come from the hit triangles, flipped toward the sensor.
    Raises "sensor occluded" when nothing inside the working range survives,
    which is what an embedded sensor (every hit closer than min_range) looks
    like.
    """
    position = np.asarray(position, dtype=float).reshape(3)
    face_normals = mesh.face_normals()
    cam_dirs_grid = pixel_directions(model)
    height, width = cam_dirs_grid.shape[:2]
    cam_dirs = cam_dirs_grid.reshape(-1, 3)

    points = []
    normals = []
    for view_index, (pitch, yaw) in enumerate(model.views(yaw_deg)):
        rot = view_rotation(yaw, pitch)
        dirs = np.ascontiguousarray(cam_dirs @ rot.T)
        origins = np.ascontiguousarray(np.broadcast_to(position, dirs.shape))
        t, tri = ray_cast(origins, dirs, mesh.vertices, mesh.faces)
        hit = np.isfinite(t)
        depth = np.where(hit, t, np.nan).reshape(height, width)
        tri_img = tri.reshape(height, width)

        if noise:
            rng = np.random.default_rng([int(seed), view_index])
            jitter, axial, drop = _noise_fields(rng, depth.shape)
            src_v, src_u = _jitter_lookup(jitter, model.noise.lateral_sigma_px, depth.shape)
            depth = depth[src_v, src_u]
            tri_img = tri_img[src_v, src_u]
            valid = np.isfinite(depth)
            depth = np.where(valid,
                             depth + axial * model.noise.axial_sigma(np.where(valid, depth, 0.0)),
                             np.nan)
            n_hit = face_normals[np.where(tri_img >= 0, tri_img, 0)]
            # incidence relative to the jittered pixel's own viewing ray
            view_dirs = dirs.reshape(height, width, 3)
            cos_inc = np.abs(np.sum(n_hit * view_dirs, axis=2))
            incidence = np.degrees(np.arccos(np.clip(cos_inc, -1.0, 1.0)))
            depth = np.where(drop < model.noise.dropout_probability(incidence), np.nan, depth)

        depth = depth.reshape(-1)
        tri_flat = tri_img.reshape(-1)
        keep = np.isfinite(depth) & (depth >= model.min_range) & (depth <= model.max_range)
        if not keep.any():
            continue
        pts = position + dirs[keep] * depth[keep][:, None]
        n = face_normals[tri_flat[keep]]
        flip = np.sum(n * dirs[keep], axis=1) > 0
        n = np.where(flip[:, None], -n, n)
        points.append(pts)
        normals.append(n)

    if not points:
        raise ValueError("sensor occluded")
    return PointCloud(np.vstack(points), np.vstack(normals))
