"""SE(3) rigid transforms as rotation matrix + translation vector."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class RigidTransform:
    """A proper rigid motion x -> R @ x + t.

    The rotation must be orthonormal with det +1 (checked at construction,
    tolerance 1e-9 per entry).
    """

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if not np.all(np.isfinite(r)) or not np.all(np.isfinite(t)):
            raise ValueError("non-finite transform")
        if np.max(np.abs(r.T @ r - np.eye(3))) > _ORTHO_TOL:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > _ORTHO_TOL:
            raise ValueError("rotation is not proper (det != +1)")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform()

    @staticmethod
    def from_matrix(m) -> "RigidTransform":
        m = np.asarray(m, dtype=float).reshape(4, 4)
        return RigidTransform(m[:3, :3], m[:3, 3])

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)


def compose(outer: RigidTransform, inner: RigidTransform) -> RigidTransform:
    """outer after inner: compose(A, B).apply(x) == A.apply(B.apply(x))."""
    return RigidTransform(outer.rotation @ inner.rotation,
                          outer.rotation @ inner.translation + outer.translation)


def rotation_angle_deg(rotation: np.ndarray) -> float:
    """Rotation angle in degrees; the trace argument is clamped to [-1, 1]."""
    c = (np.trace(rotation) - 1.0) / 2.0
    return float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))


def rotation_about_axis(axis, angle_rad: float) -> np.ndarray:
    """Rodrigues rotation matrix about a (not necessarily unit) axis."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    k = np.array([[0.0, -a[2], a[1]],
                  [a[2], 0.0, -a[0]],
                  [-a[1], a[0], 0.0]])
    return np.eye(3) + np.sin(angle_rad) * k + (1.0 - np.cos(angle_rad)) * (k @ k)


def rotation_log(rotation: np.ndarray) -> np.ndarray:
    """Axis-angle vector (radians) of a rotation matrix."""
    angle = np.arccos(np.clip((np.trace(rotation) - 1.0) / 2.0, -1.0, 1.0))
    if angle < 1e-10:
        return np.zeros(3)
    w = np.array([rotation[2, 1] - rotation[1, 2],
                  rotation[0, 2] - rotation[2, 0],
                  rotation[1, 0] - rotation[0, 1]])
    if np.pi - angle < 1e-6:
        # Near pi the antisymmetric part vanishes; recover the axis from the
        # symmetric part instead.
        s = (rotation + np.eye(3)) / 2.0
        axis = np.sqrt(np.maximum(np.diag(s), 0.0))
        k = int(np.argmax(axis))
        if axis[k] > 0:
            axis = s[:, k] / axis[k]
            axis = axis / np.linalg.norm(axis)
        signs = np.sign(w)
        signs[signs == 0] = 1.0
        axis = np.abs(axis) * signs
        return axis * angle
    return w / (2.0 * np.sin(angle)) * angle


def transform_log(t: RigidTransform) -> np.ndarray:
    """6-vector (rotation axis-angle, translation) used as a pose-graph residual."""
    return np.concatenate([rotation_log(t.rotation), t.translation])


def transform_exp(xi) -> RigidTransform:
    """Inverse of transform_log (small-motion convention: translation taken as-is)."""
    xi = np.asarray(xi, dtype=float).reshape(6)
    angle = np.linalg.norm(xi[:3])
    if angle < 1e-12:
        rot = np.eye(3)
    else:
        rot = rotation_about_axis(xi[:3], angle)
    return RigidTransform(rot, xi[3:])


def write_transform(path, t: RigidTransform) -> None:
    """16 whitespace-separated numbers, row-major 4x4, last row 0 0 0 1."""
    flat = t.matrix().reshape(-1)
    with open(path, "w") as fh:
        fh.write(" ".join(repr(float(v)) for v in flat) + "\n")


def read_transform(path) -> RigidTransform:
    with open(path) as fh:
        values = [float(v) for v in fh.read().split()]
    if len(values) != 16:
        raise ValueError(f"expected 16 numbers in transform file, got {len(values)}")
    return RigidTransform.from_matrix(np.array(values).reshape(4, 4))
