"""Spatiotemporal point cloud registration benchmark toolkit."""

from . import geometry, io, metrics
from .geometry import PointCloud, RigidTransform

__version__ = "0.1.0"

__all__ = ["PointCloud", "RigidTransform", "geometry", "io", "metrics", "__version__"]
