from . import obj, ply
from .ply import read_point_cloud, write_point_cloud

__all__ = ["obj", "ply", "read_point_cloud", "write_point_cloud"]
