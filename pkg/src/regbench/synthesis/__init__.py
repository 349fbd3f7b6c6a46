from .mesh import TriangleMesh, box, load_mesh, merge_meshes
from .occupancy import (
    OccupancyMap,
    build_occupancy_map,
    build_probability_map,
    coverage_fraction,
    sample_sensor_locations,
    write_pgm,
)
from .render import apply_sensor_noise, render_fragment, render_view
from .sensor import NoiseModel, SensorModel

__all__ = [
    "NoiseModel",
    "OccupancyMap",
    "SensorModel",
    "TriangleMesh",
    "apply_sensor_noise",
    "box",
    "build_occupancy_map",
    "build_probability_map",
    "coverage_fraction",
    "load_mesh",
    "merge_meshes",
    "render_fragment",
    "render_view",
    "sample_sensor_locations",
    "write_pgm",
]
