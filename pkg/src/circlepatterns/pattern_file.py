"""JSON persistence for patterns (schema ``circle-pattern/v1``).

A pattern file bundles the combinatorial complex, the intersection
angles, and optionally radii, a log-radius deformation field, a
central-angle field, and a developed layout, together with a provenance
block.  Integers round-trip bit exactly; floats are written with the
shortest representation that parses back to the identical value.  NaN
entries (boundary angles, unplaced layout positions) are stored as null.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .cell_complex import AngleData, DiskComplex
from .functionals import FaceField, VertexField
from .pattern_engine import Layout

SCHEMA_ID = "circle-pattern/v1"


@dataclass
class PatternFile:
    """In-memory form of a pattern file."""

    complex: DiskComplex
    angles: AngleData
    radii: np.ndarray | None = None
    face_field: FaceField | None = None
    vertex_field: VertexField | None = None
    layout: Layout | None = None
    provenance: dict = field(default_factory=dict)


def make_provenance(command: str, parameters: dict) -> dict:
    return {
        "command": command,
        "parameters": parameters,
        "created": datetime.now(timezone.utc).isoformat(),
    }


def _reals(arr) -> list:
    return [None if not np.isfinite(x) else float(x) for x in np.asarray(arr, dtype=float)]


def _from_reals(lst) -> np.ndarray:
    return np.array([np.nan if x is None else float(x) for x in lst], dtype=float)


def _complex_pairs(arr) -> list:
    out = []
    for z in np.asarray(arr, dtype=complex):
        if np.isfinite(z):
            out.append([float(z.real), float(z.imag)])
        else:
            out.append(None)
    return out


def _from_complex_pairs(lst) -> np.ndarray:
    out = np.full(len(lst), np.nan + 0j, dtype=complex)
    for k, p in enumerate(lst):
        if p is not None:
            out[k] = complex(p[0], p[1])
    return out


def pattern_to_dict(pf: PatternFile) -> dict:
    doc = {
        "schema": SCHEMA_ID,
        "complex": {
            "num_vertices": pf.complex.num_vertices,
            "max_degree": pf.complex.max_degree,
            "faces": [list(map(int, loop)) for loop in pf.complex.faces],
        },
        "angles": {
            "epsilon0": float(pf.angles.epsilon0),
            "theta": _reals(pf.angles.theta),
        },
        "provenance": pf.provenance,
    }
    if pf.radii is not None:
        doc["radii"] = _reals(pf.radii)
    if pf.face_field is not None:
        doc["face_field"] = {
            "values": _reals(pf.face_field.values),
            "free": [bool(x) for x in pf.face_field.free],
        }
    if pf.vertex_field is not None:
        doc["vertex_field"] = {
            "values": _reals(pf.vertex_field.values),
            "free": [bool(x) for x in pf.vertex_field.free],
        }
    if pf.layout is not None:
        doc["layout"] = {
            "z_v": _complex_pairs(pf.layout.z_V),
            "z_f": _complex_pairs(pf.layout.z_F),
            "gluing_residual": float(pf.layout.gluing_residual),
            "diameter": float(pf.layout.diameter),
            "free_wedges": int(pf.layout.free_wedges),
        }
    return doc


def pattern_from_dict(doc: dict) -> PatternFile:
    if doc.get("schema") != SCHEMA_ID:
        raise ValueError(f"unsupported schema {doc.get('schema')!r}")
    cx = doc["complex"]
    complex_ = DiskComplex(cx["num_vertices"], cx["faces"], max_degree=cx.get("max_degree", 24))
    ang = AngleData(theta=_from_reals(doc["angles"]["theta"]),
                    epsilon0=float(doc["angles"]["epsilon0"]))
    pf = PatternFile(complex=complex_, angles=ang, provenance=doc.get("provenance", {}))
    if "radii" in doc:
        pf.radii = _from_reals(doc["radii"])
    if "face_field" in doc:
        ff = doc["face_field"]
        pf.face_field = FaceField(_from_reals(ff["values"]), np.array(ff["free"], dtype=bool))
    if "vertex_field" in doc:
        vf = doc["vertex_field"]
        pf.vertex_field = VertexField(_from_reals(vf["values"]), np.array(vf["free"], dtype=bool))
    if "layout" in doc:
        ly = doc["layout"]
        pf.layout = Layout(z_V=_from_complex_pairs(ly["z_v"]),
                           z_F=_from_complex_pairs(ly["z_f"]),
                           gluing_residual=float(ly["gluing_residual"]),
                           diameter=float(ly["diameter"]),
                           free_wedges=int(ly.get("free_wedges", 0)))
    return pf


def save_pattern_file(pf: PatternFile, target) -> None:
    """Write to a path or file object."""
    doc = pattern_to_dict(pf)
    if hasattr(target, "write"):
        json.dump(doc, target, allow_nan=False)
        target.write("\n")
    else:
        with open(target, "w") as fh:
            json.dump(doc, fh, allow_nan=False)
            fh.write("\n")


def load_pattern_file(source) -> PatternFile:
    """Read from a path or file object."""
    if hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source) as fh:
            doc = json.load(fh)
    return pattern_from_dict(doc)
