"""Panoramic multi-sensor rig description and its statistical noise model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class NoiseModel:
    """Depth-dependent sensor noise.

    Axial sigma follows the quadratic a + b*(z - z0)^2 characterization of
    structured-light depth cameras; lateral jitter is expressed in pixels;
    returns beyond the incidence threshold drop out with fixed probability.
    The default constants are artifact choices, not measured values.
    """

    axial_a: float = 0.0012      # m
    axial_b: float = 0.0019      # m^-1
    axial_z0: float = 0.4        # m
    lateral_sigma_px: float = 0.8
    dropout_incidence_deg: float = 75.0
    dropout_prob: float = 0.8

    def __post_init__(self):
        if self.axial_a < 0 or self.axial_b < 0 or self.lateral_sigma_px < 0:
            raise ValueError("noise magnitudes must be non-negative")
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise ValueError("dropout probability out of [0, 1]")

    def axial_sigma(self, depth):
        z = np.asarray(depth, dtype=float)
        return self.axial_a + self.axial_b * (z - self.axial_z0) ** 2

    def dropout_probability(self, incidence_deg):
        angle = np.asarray(incidence_deg, dtype=float)
        return np.where(angle > self.dropout_incidence_deg, self.dropout_prob, 0.0)

    @staticmethod
    def off() -> "NoiseModel":
        return NoiseModel(axial_a=0.0, axial_b=0.0, lateral_sigma_px=0.0, dropout_prob=0.0)


@dataclass(frozen=True)
class SensorModel:
    """Tripod-mounted panoramic rig: 3 pitched sensors swept over 6 yaw stops."""

    pitch_angles_deg: tuple = (-30.0, 0.0, 30.0)
    yaw_steps: int = 6
    vertical_fov_deg: float = 45.0
    image_size: tuple = (640, 480)   # (width, height)
    max_range: float = 4.5           # m
    min_range: float = 0.4           # m
    noise: NoiseModel = field(default_factory=NoiseModel)

    def __post_init__(self):
        if not (self.max_range > self.min_range > 0):
            raise ValueError("require max_range > min_range > 0")
        if self.yaw_steps < 1 or len(self.pitch_angles_deg) < 1:
            raise ValueError("need at least one view")
        # monotone non-decreasing axial sigma over the working range
        z = np.linspace(self.min_range, self.max_range, 64)
        s = self.noise.axial_sigma(z)
        if np.any(np.diff(s) < -1e-15) or np.any(s < 0):
            raise ValueError("axial sigma must be non-negative and non-decreasing in depth")

    @property
    def n_views(self) -> int:
        return len(self.pitch_angles_deg) * self.yaw_steps

    @property
    def yaw_interval_deg(self) -> float:
        return 360.0 / self.yaw_steps

    def views(self, base_yaw_deg: float = 0.0):
        """(pitch_deg, yaw_deg) per view, pitch-major order."""
        return [(pitch, base_yaw_deg + k * self.yaw_interval_deg)
                for pitch in self.pitch_angles_deg
                for k in range(self.yaw_steps)]
