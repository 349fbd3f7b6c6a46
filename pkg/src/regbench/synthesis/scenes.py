"""Procedurally built indoor scenes with scripted change between stages.

These meshes feed the synthetic benchmark: a shell room that acquires stud
rows, finished partition walls and relocated crates from stage to stage, so
different-stage fragment pairs exhibit genuine geometric and topological
change while same-stage pairs share identical geometry.
"""

from __future__ import annotations

import numpy as np

from .mesh import TriangleMesh, box, merge_meshes

WALL_THICKNESS = 0.1
STUD_SPACING = 0.4
STUD_SECTION = (0.05, 0.08)


def empty_room(width: float, depth: float, height: float = 3.0) -> TriangleMesh:
    """Shell: floor and ceiling slabs plus four perimeter walls (inside the footprint)."""
    t = WALL_THICKNESS
    parts = [
        box([0, 0, -t], [width, depth, 0]),            # floor
        box([0, 0, height], [width, depth, height + t]),  # ceiling
        box([0, 0, 0], [width, t, height]),
        box([0, depth - t, 0], [width, depth, height]),
        box([0, 0, 0], [t, depth, height]),
        box([width - t, 0, 0], [width, depth, height]),
    ]
    return merge_meshes(parts)


def crate(x: float, y: float, size: float = 0.8, height: float = 1.0) -> TriangleMesh:
    return box([x, y, 0], [x + size, y + size, height])


def stud_row(x0: float, y0: float, length: float, axis: int = 0,
             height: float = 2.4) -> TriangleMesh:
    """A framing line of vertical studs, spaced STUD_SPACING apart."""
    sx, sy = STUD_SECTION
    studs = []
    n = max(2, int(np.floor(length / STUD_SPACING)) + 1)
    for k in range(n):
        off = k * STUD_SPACING
        if axis == 0:
            studs.append(box([x0 + off, y0, 0], [x0 + off + sx, y0 + sy, height]))
        else:
            studs.append(box([x0, y0 + off, 0], [x0 + sy, y0 + off + sx, height]))
    return merge_meshes(studs)


def partition_wall(x0: float, y0: float, length: float, axis: int = 0,
                   height: float = 2.4) -> TriangleMesh:
    """A finished (boarded) wall where a stud row used to be."""
    t = WALL_THICKNESS
    if axis == 0:
        return box([x0, y0, 0], [x0 + length, y0 + t, height])
    return box([x0, y0, 0], [x0 + t, y0 + length, height])


def construction_site(area_seed: int, stage: int, width: float = 12.0,
                      depth: float = 10.0) -> TriangleMesh:
    """Deterministic scene for (area, stage): a shell room under fit-out.

    Stage 0 is mostly open with framing lines and stray crates; later stages
    board up earlier framing, add new framing elsewhere and move the crates.
    """
    rng = np.random.default_rng([int(area_seed), 9173])
    parts = [empty_room(width, depth)]

    # fixed candidate lines for interior walls, chosen once per area
    n_lines = 4
    lines = []
    for _ in range(n_lines):
        axis = int(rng.integers(0, 2))
        if axis == 0:
            x0 = rng.uniform(1.0, width - 5.0)
            y0 = rng.uniform(1.5, depth - 1.5)
            length = rng.uniform(3.0, min(5.5, width - x0 - 1.0))
        else:
            x0 = rng.uniform(1.5, width - 1.5)
            y0 = rng.uniform(1.0, depth - 5.0)
            length = rng.uniform(3.0, min(5.5, depth - y0 - 1.0))
        lines.append((x0, y0, length, axis))

    # line k is framed at stage k and boarded from stage k+1 on
    for k, (x0, y0, length, axis) in enumerate(lines):
        if stage == k:
            parts.append(stud_row(x0, y0, length, axis))
        elif stage > k:
            parts.append(partition_wall(x0, y0, length, axis))

    # crates relocate every stage
    crate_rng = np.random.default_rng([int(area_seed), 551, int(stage)])
    for _ in range(5):
        cx = crate_rng.uniform(1.0, width - 2.0)
        cy = crate_rng.uniform(1.0, depth - 2.0)
        parts.append(crate(cx, cy,
                           size=crate_rng.uniform(0.5, 1.0),
                           height=crate_rng.uniform(0.6, 1.4)))
    return merge_meshes(parts)
