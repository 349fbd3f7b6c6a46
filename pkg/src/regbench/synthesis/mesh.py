"""Triangle meshes for depth-sensor simulation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..io import obj as obj_io
from ..io import ply as ply_io


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray  # (V, 3) float64
    faces: np.ndarray     # (F, 3) int64

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=float).reshape(-1, 3))
        f = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int64).reshape(-1, 3))
        if len(f) and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("face index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    def face_normals(self) -> np.ndarray:
        a = self.vertices[self.faces[:, 0]]
        e1 = self.vertices[self.faces[:, 1]] - a
        e2 = self.vertices[self.faces[:, 2]] - a
        n = np.cross(e1, e2)
        lengths = np.linalg.norm(n, axis=1)
        return n / np.where(lengths > 0, lengths, 1.0)[:, None]

    def face_areas(self) -> np.ndarray:
        a = self.vertices[self.faces[:, 0]]
        e1 = self.vertices[self.faces[:, 1]] - a
        e2 = self.vertices[self.faces[:, 2]] - a
        return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def surface_samples(self, spacing: float) -> np.ndarray:
        """Deterministic barycentric-lattice samples, roughly `spacing` apart.

        Every triangle contributes a lattice sized by its longest edge, so
        axis-aligned geometry cannot fall between samples. No RNG involved.
        """
        if spacing <= 0:
            raise ValueError("spacing must be positive")
        out = []
        a = self.vertices[self.faces[:, 0]]
        b = self.vertices[self.faces[:, 1]]
        c = self.vertices[self.faces[:, 2]]
        edges = np.stack([np.linalg.norm(b - a, axis=1),
                          np.linalg.norm(c - b, axis=1),
                          np.linalg.norm(a - c, axis=1)]).max(axis=0)
        density = np.maximum(1, np.ceil(edges / spacing).astype(int))
        for n in np.unique(density):
            sel = density == n
            i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
            keep = (i + j) <= n
            u = (i[keep] / n)[None, :, None]
            v = (j[keep] / n)[None, :, None]
            pts = a[sel][:, None, :] + u * (b - a)[sel][:, None, :] + v * (c - a)[sel][:, None, :]
            out.append(pts.reshape(-1, 3))
        return np.vstack(out) if out else np.zeros((0, 3))


def merge_meshes(meshes) -> TriangleMesh:
    meshes = list(meshes)
    verts = []
    faces = []
    offset = 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + offset)
        offset += len(m.vertices)
    return TriangleMesh(np.vstack(verts), np.vstack(faces))


def box(min_corner, max_corner) -> TriangleMesh:
    """Axis-aligned box as 12 triangles with outward winding."""
    lo = np.asarray(min_corner, dtype=float)
    hi = np.asarray(max_corner, dtype=float)
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    v = np.array([
        [x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
        [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1],
    ])
    f = np.array([
        [0, 2, 1], [0, 3, 2],  # bottom (z0), normal -z
        [4, 5, 6], [4, 6, 7],  # top (z1), normal +z
        [0, 1, 5], [0, 5, 4],  # y0 side
        [2, 3, 7], [2, 7, 6],  # y1 side
        [1, 2, 6], [1, 6, 5],  # x1 side
        [3, 0, 4], [3, 4, 7],  # x0 side
    ], dtype=np.int64)
    return TriangleMesh(v, f)


def load_mesh(path) -> TriangleMesh:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".obj":
        verts, faces = obj_io.read_mesh(path)
    elif suffix == ".ply":
        verts, faces = ply_io.read_mesh(path)
    else:
        raise ValueError(f"unsupported mesh format: {suffix}")
    if len(faces) == 0:
        raise ValueError("mesh has no triangles")
    return TriangleMesh(verts, faces)
