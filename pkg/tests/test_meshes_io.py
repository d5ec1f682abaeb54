import json

import numpy as np
import pytest

from circlepatterns import (
    AngleData,
    FaceField,
    MeshSpec,
    VertexField,
    gen_mesh,
    hex_medial,
    layout,
    square_medial,
    uniformize,
    validate_complex,
    validate_theta,
)
from circlepatterns.pattern_file import (
    PatternFile,
    load_pattern_file,
    pattern_from_dict,
    pattern_to_dict,
    save_pattern_file,
)


def test_square_medial_depth1_hand_count():
    c = square_medial(1)
    # four unit squares around the origin: 3x3 vertices, 12 edges
    assert (c.num_vertices, c.num_edges, c.num_faces) == (9, 12, 4)
    assert len(c.interior_edges) == 4
    assert len(c.interior_vertices()) == 1


def test_hex_medial_depth2_structure():
    c = hex_medial(2)
    deg = c.vertex_degrees()
    assert np.all(deg[c.interior_vertices()] == 4)
    th = AngleData.constant(c, np.pi / 2)
    assert validate_theta(c, th).ok


def test_gen_mesh_depth_zero_and_bad_family():
    with pytest.raises(ValueError):
        gen_mesh(MeshSpec(family="square-medial", depth=0))
    with pytest.raises(ValueError):
        gen_mesh(MeshSpec(family="pentagonal", depth=3))


def test_gen_mesh_deterministic():
    a, tha = gen_mesh(MeshSpec(family="hex-medial", depth=3))
    b, thb = gen_mesh(MeshSpec(family="hex-medial", depth=3))
    assert a.faces == b.faces
    assert np.array_equal(tha.theta, thb.theta, equal_nan=True)


def test_generators_always_valid():
    for family in ("square-medial", "hex-medial"):
        for depth in (1, 2, 5):
            c, th = gen_mesh(MeshSpec(family=family, depth=depth))
            assert validate_complex(c).ok
            assert validate_theta(c, th).ok


def full_pattern_file(tmp_path):
    c = square_medial(3)
    th = AngleData.constant(c, np.pi / 2)
    sol = uniformize(c, th, FaceField.from_boundary(c, 0.0), tol=1e-12)
    lay = layout(c, sol)
    rng = np.random.default_rng(0)
    pf = PatternFile(
        complex=c,
        angles=th,
        radii=sol.radii * np.exp(rng.uniform(-0.2, 0.2, c.num_faces)),
        face_field=FaceField(rng.uniform(-1, 1, c.num_faces), ~c.boundary_faces),
        vertex_field=VertexField(rng.uniform(-1, 1, c.num_vertices), ~c.boundary_vertices),
        layout=lay,
        provenance={"command": "test", "parameters": {"seed": 0}, "created": "now"},
    )
    return pf


def test_pattern_file_roundtrip_bit_exact(tmp_path):
    pf = full_pattern_file(tmp_path)
    path = tmp_path / "pattern.json"
    save_pattern_file(pf, str(path))
    back = load_pattern_file(str(path))
    assert back.complex.faces == pf.complex.faces
    assert back.complex.num_vertices == pf.complex.num_vertices
    assert np.array_equal(back.angles.theta, pf.angles.theta, equal_nan=True)
    assert back.angles.epsilon0 == pf.angles.epsilon0
    assert np.array_equal(back.radii, pf.radii)  # bitwise float equality
    assert np.array_equal(back.face_field.values, pf.face_field.values)
    assert np.array_equal(back.face_field.free, pf.face_field.free)
    assert np.array_equal(back.vertex_field.values, pf.vertex_field.values)
    assert np.array_equal(back.layout.z_V, pf.layout.z_V, equal_nan=True)
    assert np.array_equal(back.layout.z_F, pf.layout.z_F, equal_nan=True)
    assert back.layout.gluing_residual == pf.layout.gluing_residual
    assert back.provenance == pf.provenance
    # serialize-parse-serialize is a fixed point
    doc = pattern_to_dict(pf)
    doc2 = pattern_to_dict(pattern_from_dict(json.loads(json.dumps(doc))))
    assert doc == doc2


def test_pattern_file_schema(tmp_path):
    import jsonschema

    with open("docs/schema.json") as fh:
        schema = json.load(fh)
    pf = full_pattern_file(tmp_path)
    jsonschema.validate(pattern_to_dict(pf), schema)
    minimal = PatternFile(complex=pf.complex, angles=pf.angles)
    jsonschema.validate(pattern_to_dict(minimal), schema)


def test_pattern_file_rejects_unknown_schema():
    with pytest.raises(ValueError):
        pattern_from_dict({"schema": "circle-pattern/v999"})
