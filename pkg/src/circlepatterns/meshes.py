"""Generators for disk-shaped medial meshes.

Both families are medial complexes of lattice balls, truncated by
Euclidean distance so the resulting complex fills an approximate disk:

* ``square-medial``: the square lattice; every face is a quadrilateral
  and every interior vertex has degree 4.
* ``hex-medial``: the triangular lattice; faces alternate between
  hexagons (one per lattice vertex) and triangles (one per lattice
  triangle), and every interior vertex has degree 4.

With constant intersection angle pi/2 the interior vertex angle sums are
exactly 2*pi, so generated meshes always pass validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cell_complex import AngleData, DiskComplex

FAMILIES = ("square-medial", "hex-medial", "imported")


@dataclass
class MeshSpec:
    """Recipe for a generated mesh.

    ``depth`` is the truncation radius measured in lattice spacings.
    ``theta`` is the constant intersection angle; per-edge angles come
    from pattern files instead (family ``imported``).
    """

    family: str = "square-medial"
    depth: int = 4
    theta: float = math.pi / 2
    epsilon0: float = 0.05
    source: str | None = None


def gen_mesh(spec: MeshSpec) -> tuple[DiskComplex, AngleData]:
    """Build the complex and angle data described by ``spec``."""
    if spec.family == "imported":
        if not spec.source:
            raise ValueError("imported family requires a source file")
        from .pattern_file import load_pattern_file

        data = load_pattern_file(spec.source)
        return data.complex, data.angles
    if spec.depth < 1:
        raise ValueError("depth must be >= 1")
    if spec.family == "square-medial":
        complex_ = square_medial(spec.depth)
    elif spec.family == "hex-medial":
        complex_ = hex_medial(spec.depth)
    else:
        raise ValueError(f"unsupported mesh family {spec.family!r}")
    angles = AngleData.constant(complex_, spec.theta, epsilon0=spec.epsilon0)
    return complex_, angles


def square_medial(depth: int) -> DiskComplex:
    """Disk-shaped patch of the unit square lattice, centred on a vertex.

    Includes every unit square whose centre lies within Euclidean
    distance ``depth`` of the origin.  Depth 1 gives the smallest valid
    complex (a 2x2 block around the origin).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    r2 = float(depth) ** 2 + 1e-9
    cells = []
    for a in range(-depth - 1, depth + 1):
        for b in range(-depth - 1, depth + 1):
            if (a + 0.5) ** 2 + (b + 0.5) ** 2 <= r2:
                cells.append((a, b))

    vid: dict[tuple[int, int], int] = {}

    def vertex(p: tuple[int, int]) -> int:
        if p not in vid:
            vid[p] = len(vid)
        return vid[p]

    faces = []
    for a, b in cells:
        loop = [(a, b), (a + 1, b), (a + 1, b + 1), (a, b + 1)]
        faces.append([vertex(p) for p in loop])
    return DiskComplex(len(vid), faces)


def square_grid(nx: int, ny: int | None = None) -> DiskComplex:
    """Rectangular nx-by-ny block of unit squares (test workhorse)."""
    if ny is None:
        ny = nx
    if nx < 1 or ny < 1:
        raise ValueError("grid dimensions must be >= 1")

    def vertex(a: int, b: int) -> int:
        return a * (ny + 1) + b

    faces = []
    for a in range(nx):
        for b in range(ny):
            faces.append([vertex(a, b), vertex(a + 1, b), vertex(a + 1, b + 1), vertex(a, b + 1)])
    return DiskComplex((nx + 1) * (ny + 1), faces)


_SQRT3 = math.sqrt(3.0)


def _tri_pos(a: int, b: int) -> tuple[float, float]:
    return (a + 0.5 * b, 0.5 * _SQRT3 * b)


def hex_medial(depth: int) -> DiskComplex:
    """Medial complex of the triangular-lattice ball of radius ``depth``.

    Medial vertices are lattice-edge midpoints; faces are the medial
    triangles of included lattice triangles plus a hexagon around every
    lattice vertex whose six triangles are all included.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    r2 = float(depth) ** 2 + 1e-9
    span = depth + 2
    in_ball = set()
    for a in range(-span, span + 1):
        for b in range(-span, span + 1):
            x, y = _tri_pos(a, b)
            if x * x + y * y <= r2:
                in_ball.add((a, b))

    def up_tri(a, b):
        return ((a, b), (a + 1, b), (a, b + 1))

    def down_tri(a, b):
        return ((a + 1, b), (a + 1, b + 1), (a, b + 1))

    triangles = []
    tri_set = set()
    for a in range(-span, span + 1):
        for b in range(-span, span + 1):
            for kind, corners in (("u", up_tri(a, b)), ("d", down_tri(a, b))):
                if all(p in in_ball for p in corners):
                    triangles.append(corners)
                    tri_set.add((kind, a, b))

    def full_fan(a, b):
        fans = [("u", a, b), ("u", a - 1, b), ("u", a, b - 1),
                ("d", a - 1, b), ("d", a, b - 1), ("d", a - 1, b - 1)]
        return all(t in tri_set for t in fans)

    hex_centers = [p for p in sorted(in_ball) if full_fan(*p)]

    vid: dict[frozenset, int] = {}

    def midpoint(p, q) -> int:
        key = frozenset((p, q))
        if key not in vid:
            vid[key] = len(vid)
        return vid[key]

    faces = []
    for corners in triangles:
        aa, bb, cc = corners  # ccw in the plane
        faces.append([midpoint(aa, bb), midpoint(bb, cc), midpoint(cc, aa)])
    # the six lattice neighbours in ccw angular order
    neighbour_steps = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]
    for a, b in hex_centers:
        loop = [midpoint((a, b), (a + da, b + db)) for da, db in neighbour_steps]
        faces.append(loop)
    return DiskComplex(len(vid), faces)
