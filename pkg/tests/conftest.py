import numpy as np
import pytest

from circlepatterns import (
    AngleData,
    FaceField,
    hex_medial,
    layout,
    square_medial,
    uniformize,
)


@pytest.fixture(scope="session")
def square8():
    """Uniform square-medial pattern at depth 8 with its layout."""
    c = square_medial(8)
    th = AngleData.constant(c, np.pi / 2)
    sol = uniformize(c, th, FaceField.from_boundary(c, 0.0), tol=1e-12)
    return c, th, sol, layout(c, sol)


@pytest.fixture(scope="session")
def hex4():
    """Uniform hex-medial pattern at depth 4: the exact two-radius solution."""
    c = hex_medial(4)
    th = AngleData.constant(c, np.pi / 2)
    deg = c.face_degrees()
    bnd = FaceField(np.where(deg == 6, 0.5 * np.log(3.0), 0.0), ~c.boundary_faces)
    sol = uniformize(c, th, bnd, tol=1e-12)
    return c, th, sol, layout(c, sol)


def sample_boundary_faces(c, lay, fn, amplitude=1.0):
    """Boundary FaceField from a sampler applied to normalized positions."""
    from circlepatterns.analysis import layout_center, layout_scale

    center = layout_center(c, lay)
    r = layout_scale(c, lay, center)
    f = FaceField.zeros(c)
    m = ~f.free
    z = (lay.z_F - center) / r
    vals = amplitude * fn(np.where(np.isfinite(z), z, 0.0))
    f.values[m] = np.real(vals[m])
    return f


def sample_boundary_vertices(c, lay, fn, amplitude=1.0):
    from circlepatterns import VertexField
    from circlepatterns.analysis import layout_center, layout_scale

    center = layout_center(c, lay)
    r = layout_scale(c, lay, center)
    f = VertexField.zeros(c)
    m = ~f.free
    z = (lay.z_V - center) / r
    vals = amplitude * fn(np.where(np.isfinite(z), z, 0.0))
    f.values[m] = np.where(np.isfinite(lay.z_V[m]), np.real(vals[m]), 0.0)
    return f
