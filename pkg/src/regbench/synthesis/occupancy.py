"""2D occupancy and probability maps for sensor-location sampling.

Obstacles are surface samples inside the [0.5, 2] m height band, rasterized
onto a 0.10 m grid; the probability map then prefers free cells away from
occupied ones (Euclidean distance, capped at 2 m) for placing the tripod.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import distance_transform_edt

from .mesh import TriangleMesh

DEFAULT_CELL = 0.10
HEIGHT_BAND = (0.5, 2.0)
DISTANCE_CAP = 2.0
HEIGHT_RANGE = (1.5, 1.75)
SPACING_RANGE = (1.0, 4.0)
SENSOR_MAX_RANGE = 4.5


@dataclass(frozen=True)
class OccupancyMap:
    origin: np.ndarray            # (2,) world xy of cell (0, 0)'s lower corner
    cell: float
    occupied: np.ndarray          # (nx, ny) bool
    probability: np.ndarray | None = None  # (nx, ny), zero on occupied cells

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(2))
        if self.probability is not None:
            p = np.asarray(self.probability, dtype=float)
            if p.shape != self.occupied.shape:
                raise ValueError("probability grid shape mismatch")
            if np.any(p[self.occupied] != 0.0):
                raise ValueError("probability must be zero on occupied cells")
            object.__setattr__(self, "probability", p)

    @property
    def shape(self):
        return self.occupied.shape

    def cell_center(self, ij) -> np.ndarray:
        ij = np.asarray(ij, dtype=float)
        return self.origin + (ij + 0.5) * self.cell

    def cell_of(self, xy) -> tuple:
        ij = np.floor((np.asarray(xy, dtype=float) - self.origin) / self.cell).astype(int)
        return int(ij[0]), int(ij[1])

    def is_free(self, xy) -> bool:
        i, j = self.cell_of(xy)
        if not (0 <= i < self.shape[0] and 0 <= j < self.shape[1]):
            return False
        return not bool(self.occupied[i, j])


def build_occupancy_map(mesh: TriangleMesh, cell: float = DEFAULT_CELL) -> OccupancyMap:
    """Mark cells whose XY column contains surface geometry in the height band."""
    if cell <= 0:
        raise ValueError("cell size must be positive")
    if mesh.n_faces == 0:
        raise ValueError("empty mesh")
    samples = mesh.surface_samples(spacing=cell / 2.0)
    lo, hi = mesh.bounds()
    origin = lo[:2]
    nx = max(1, int(np.ceil((hi[0] - lo[0]) / cell)))
    ny = max(1, int(np.ceil((hi[1] - lo[1]) / cell)))
    occupied = np.zeros((nx, ny), dtype=bool)
    band = (samples[:, 2] >= HEIGHT_BAND[0]) & (samples[:, 2] <= HEIGHT_BAND[1])
    pts = samples[band]
    ij = np.floor((pts[:, :2] - origin) / cell).astype(int)
    ij = np.clip(ij, 0, [nx - 1, ny - 1])
    occupied[ij[:, 0], ij[:, 1]] = True
    return OccupancyMap(origin, cell, occupied)


def build_probability_map(occ: OccupancyMap) -> OccupancyMap:
    """Weight free cells by min(distance to nearest occupied, 2 m), normalized."""
    free = ~occ.occupied
    if not free.any():
        raise ValueError("fully occupied")
    if occ.occupied.any():
        dist = distance_transform_edt(free) * occ.cell
    else:
        dist = np.full(occ.shape, np.inf)
    weight = np.minimum(dist, DISTANCE_CAP)
    weight[occ.occupied] = 0.0
    return OccupancyMap(occ.origin, occ.cell, occ.occupied, weight / weight.sum())


def coverage_fraction(occ: OccupancyMap, locations, reach: float = SENSOR_MAX_RANGE) -> float:
    """Fraction of free cells within `reach` of any location (XY distance)."""
    free_ij = np.argwhere(~occ.occupied)
    if len(free_ij) == 0:
        return 1.0
    centers = occ.origin + (free_ij + 0.5) * occ.cell
    if len(locations) == 0:
        return 0.0
    loc = np.asarray(locations, dtype=float).reshape(-1, 2)
    d2 = ((centers[:, None, :] - loc[None, :, :]) ** 2).sum(axis=2)
    return float((d2.min(axis=1) <= reach * reach).mean())


def sample_sensor_locations(prob_map: OccupancyMap, seed: int,
                            spacing=SPACING_RANGE,
                            height_range=HEIGHT_RANGE,
                            coverage_target: float = 0.98,
                            max_rejections: int = 200,
                            max_locations: int | None = None):
    """Draw tripod locations from the probability map.

    The first location is a straight probability-weighted draw; later
    candidates are accepted when their distance to the nearest accepted
    location falls in `spacing`. Sampling stops once free-cell coverage
    (cells within sensor reach) passes `coverage_target` or after
    `max_rejections` consecutive rejections. Deterministic per seed.
    Returns a list of (xy, height).
    """
    if prob_map.probability is None:
        raise ValueError("probability map required; call build_probability_map first")
    rng = np.random.default_rng(seed)
    p = prob_map.probability.ravel()
    if p.sum() <= 0:
        raise ValueError("cannot place first point")
    cells = np.arange(p.size)

    def draw_xy():
        flat = rng.choice(cells, p=p)
        ij = np.unravel_index(flat, prob_map.shape)
        return prob_map.cell_center(ij)

    accepted = [draw_xy()]
    rejections = 0
    while rejections < max_rejections:
        if max_locations is not None and len(accepted) >= max_locations:
            break
        if coverage_fraction(prob_map, accepted) >= coverage_target:
            break
        xy = draw_xy()
        dmin = np.min(np.linalg.norm(np.asarray(accepted) - xy, axis=1))
        if spacing[0] <= dmin <= spacing[1]:
            accepted.append(xy)
            rejections = 0
        else:
            rejections += 1
    heights = rng.uniform(height_range[0], height_range[1], size=len(accepted))
    return [(xy, float(h)) for xy, h in zip(accepted, heights)]


def write_pgm(path, occ: OccupancyMap) -> None:
    """Dump the map as a binary PGM (free=255, occupied=0) for inspection."""
    img = np.where(occ.occupied.T[::-1], 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
