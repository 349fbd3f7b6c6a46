from .cloud import PointCloud, apply_transform, merge
from .curvature import curvature_many, local_curvature
from .hull import ConvexHull, convex_hull
from .kabsch import kabsch_fit
from .spatial import SpatialIndex, nearest_neighbor
from .transforms import (
    RigidTransform,
    compose,
    read_transform,
    rotation_about_axis,
    rotation_angle_deg,
    rotation_log,
    transform_exp,
    transform_log,
    write_transform,
)
from .voxel import voxel_downsample

__all__ = [
    "PointCloud",
    "RigidTransform",
    "SpatialIndex",
    "ConvexHull",
    "apply_transform",
    "compose",
    "convex_hull",
    "curvature_many",
    "kabsch_fit",
    "local_curvature",
    "merge",
    "nearest_neighbor",
    "read_transform",
    "rotation_about_axis",
    "rotation_angle_deg",
    "rotation_log",
    "transform_exp",
    "transform_log",
    "voxel_downsample",
    "write_transform",
]
