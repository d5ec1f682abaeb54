"""Command-line interface.

Every subcommand reads and writes pattern files (JSON, schema
``circle-pattern/v1``), defaulting to stdin/stdout so commands pipe:

    circlepatterns gen --family square-medial --depth 8 \
        | circlepatterns uniformize --boundary-radii 1.0 \
        | circlepatterns layout | circlepatterns render -o pattern.svg

Analysis subcommands emit delimited tables (CSV) and can render
matplotlib figures next to them via ``--plot``.

Exit codes: 0 success, 2 validation or input failure, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .analysis import (
    BoundarySample,
    beltrami_field,
    boundary_vertex_order,
    dirichlet_energy,
    good_embedding_report,
    hilbert_transform_theta,
    layout_center,
    layout_scale,
    parse_harmonic_spec,
    verify_pairing_identity,
    wp_indicators,
)
from .cell_complex import AngleData, validate_complex, validate_theta
from .functionals import FaceField, SolverError, VertexField
from .kite_geometry import beltrami_modulus_bound
from .meshes import FAMILIES, MeshSpec, gen_mesh
from .pattern_engine import (
    ClosednessFailure,
    InadmissibleBoundaryError,
    conjugate_u_to_v,
    deform_angles,
    deform_radii,
    embeddedness_check,
    layout,
    mean_normalize,
    pattern_from_radii,
    uniformize,
)
from .pattern_file import PatternFile, load_pattern_file, make_provenance, save_pattern_file
from .svg_render import RenderOptions, render_svg

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


def _read_pattern(args) -> PatternFile:
    src = getattr(args, "input", "-")
    try:
        if src == "-":
            return load_pattern_file(io.StringIO(sys.stdin.read()))
        return load_pattern_file(src)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as ex:
        raise CliError(f"cannot read pattern file: {ex}") from ex


def _write_pattern(pf: PatternFile, args) -> None:
    dst = getattr(args, "output", "-")
    if dst == "-":
        save_pattern_file(pf, sys.stdout)
    else:
        save_pattern_file(pf, dst)


def _write_text(text: str, dst: str) -> None:
    if dst == "-":
        sys.stdout.write(text)
    else:
        with open(dst, "w") as fh:
            fh.write(text)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise CliError(message)


def _validated(pf: PatternFile, loop_len_cap: int = 12) -> None:
    rep = validate_complex(pf.complex)
    if rep.ok:
        rep = validate_theta(pf.complex, pf.angles, loop_len_cap)
    if not rep.ok:
        raise CliError("validation failed:\n" + "\n".join(rep.violations))


def _reference_pattern(pf: PatternFile):
    _require(pf.radii is not None, "pattern file carries no radii; run uniformize first")
    return pattern_from_radii(pf.complex, pf.angles, pf.radii)


def _current_pattern(pf: PatternFile, use: str = "deformed"):
    ref = _reference_pattern(pf)
    if use == "deformed" and pf.face_field is not None:
        return pattern_from_radii(pf.complex, pf.angles,
                                  pf.radii * np.exp(pf.face_field.values))
    return ref


def _layout_of(pf: PatternFile, use: str = "deformed", seed_edge: int | None = None):
    if pf.layout is not None and seed_edge is None:
        return pf.layout
    return layout(pf.complex, _current_pattern(pf, use), seed_edge=seed_edge)


def _figure(path: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


# -- subcommands -------------------------------------------------------------


def cmd_gen(args) -> int:
    spec = MeshSpec(family=args.family, depth=args.depth, theta=args.theta,
                    epsilon0=args.epsilon0, source=args.source)
    complex_, angles = gen_mesh(spec)
    pf = PatternFile(complex=complex_, angles=angles,
                     provenance=make_provenance("gen", {
                         "family": args.family, "depth": args.depth,
                         "theta": args.theta, "epsilon0": args.epsilon0}))
    _validated(pf)
    _write_pattern(pf, args)
    return EXIT_OK


def cmd_uniformize(args) -> int:
    pf = _read_pattern(args)
    _validated(pf)
    c = pf.complex
    bnd = FaceField.zeros(c)
    bmask = ~bnd.free
    if args.boundary_radii_by_degree:
        table = {}
        for item in args.boundary_radii_by_degree.split(","):
            d, _, r = item.partition(":")
            table[int(d)] = float(r)
        deg = c.face_degrees()
        for f in np.flatnonzero(bmask):
            _require(int(deg[f]) in table,
                     f"no boundary radius for face degree {deg[f]}")
            bnd.values[f] = math.log(table[int(deg[f])])
    else:
        _require(args.boundary_radii > 0, "boundary radius must be positive")
        bnd.values[bmask] = math.log(args.boundary_radii)
    sol = uniformize(c, pf.angles, bnd, tol=args.tol, max_iter=args.max_iter)
    pf.radii = sol.radii
    pf.provenance = make_provenance("uniformize", {
        "boundary_radii": args.boundary_radii, "tol": args.tol,
        "residual": sol.residual, "iterations": sol.report.iterations})
    _write_pattern(pf, args)
    return EXIT_OK


def _sample_boundary_faces(pf: PatternFile, spec: str, amplitude: float) -> FaceField:
    ref = _reference_pattern(pf)
    lay = layout(pf.complex, ref)
    center = layout_center(pf.complex, lay)
    r = layout_scale(pf.complex, lay, center)
    fn = parse_harmonic_spec(spec)
    bu = FaceField.zeros(pf.complex)
    bmask = ~bu.free
    z = (lay.z_F - center) / r
    vals = amplitude * fn(np.where(np.isfinite(z), z, 0.0))
    bu.values[bmask] = np.real(vals[bmask])
    return bu


def cmd_deform_radii(args) -> int:
    pf = _read_pattern(args)
    _validated(pf)
    ref = _reference_pattern(pf)
    bu = _sample_boundary_faces(pf, args.boundary, args.amplitude)
    result = deform_radii(ref, bu, tol=args.tol, max_iter=args.max_iter)
    pf.face_field = result.u
    pf.layout = None
    pf.provenance = make_provenance("deform-radii", {
        "boundary": args.boundary, "amplitude": args.amplitude,
        "residual": result.pattern.residual,
        "dirichlet_energy": result.dirichlet_energy,
        "iterations": result.report.iterations})
    _write_pattern(pf, args)
    return EXIT_OK


def cmd_deform_angles(args) -> int:
    pf = _read_pattern(args)
    _validated(pf)
    ref = _reference_pattern(pf)
    lay = layout(pf.complex, ref)
    center = layout_center(pf.complex, lay)
    r = layout_scale(pf.complex, lay, center)
    fn = parse_harmonic_spec(args.boundary)
    bv = VertexField.zeros(pf.complex)
    vmask = ~bv.free
    z = (lay.z_V - center) / r
    vals = args.amplitude * fn(np.where(np.isfinite(z), z, 0.0))
    bv.values[vmask] = np.where(np.isfinite(lay.z_V[vmask]), np.real(vals[vmask]), 0.0)
    result = deform_angles(ref, bv, tol=args.tol, max_iter=args.max_iter)
    pf.vertex_field = result.v
    pf.provenance = make_provenance("deform-angles", {
        "boundary": args.boundary, "amplitude": args.amplitude,
        "holonomy_residual": result.holonomy_residual,
        "iterations": result.report.iterations})
    _write_pattern(pf, args)
    return EXIT_OK


def cmd_conjugate(args) -> int:
    pf = _read_pattern(args)
    _validated(pf)
    _require(pf.face_field is not None, "pattern file carries no log-radius field")
    ref = _reference_pattern(pf)
    result = conjugate_u_to_v(ref, pf.face_field, root=args.root,
                              closedness_tol=args.closedness_tol)
    v = result.v
    if args.gauge == "mean":
        v = VertexField(mean_normalize(v.values, result.reachable), v.free)
    pf.vertex_field = v
    pf.provenance = make_provenance("conjugate", {
        "gauge": args.gauge,
        "closedness_residual": result.closedness_residual,
        "holonomy_residual": result.holonomy_residual})
    _write_pattern(pf, args)
    return EXIT_OK


def cmd_layout(args) -> int:
    pf = _read_pattern(args)
    _validated(pf)
    pat = _current_pattern(pf, args.use)
    pf.layout = layout(pf.complex, pat, seed_edge=args.seed_edge)
    pf.provenance = make_provenance("layout", {
        "use": args.use, "seed_edge": args.seed_edge,
        "gluing_residual": pf.layout.gluing_residual})
    _write_pattern(pf, args)
    return EXIT_OK


def cmd_render(args) -> int:
    pf = _read_pattern(args)
    pat = _current_pattern(pf, args.use)
    lay = _layout_of(pf, args.use, None)
    color = None
    if args.color_by == "u" and pf.face_field is not None:
        color = pf.face_field.values
    opts = RenderOptions(show_circles=args.circles, show_primal=args.primal,
                         show_dual=args.dual, color_by=color)
    _write_text(render_svg(lay, pat, opts), args.output)
    return EXIT_OK


def cmd_analyze_pairing(args) -> int:
    depths = [int(d) for d in args.depths.split(",") if d.strip()]
    _require(bool(depths), "need at least one depth")
    rows = []
    for depth in depths:
        complex_, angles = gen_mesh(MeshSpec(family=args.family, depth=depth,
                                             theta=args.theta, epsilon0=args.epsilon0))
        bnd = FaceField.zeros(complex_)
        bnd.values[~bnd.free] = 0.0
        sol = uniformize(complex_, angles, bnd, tol=args.tol)
        lay = layout(complex_, sol)
        chk = verify_pairing_identity(lay, complex_, args.u, args.v)
        rows.append((depth, chk.b, chk.two_pi_omega, chk.rel_error))
    buf = io.StringIO()
    wr = csv.writer(buf)
    wr.writerow(["depth", "b", "two_pi_omega", "rel_error"])
    for row in rows:
        wr.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3])])
    _write_text(buf.getvalue(), args.output)
    if args.plot:
        plt = _figure(args.plot)
        fig, ax = plt.subplots(figsize=(5, 3.4))
        ax.semilogy([r[0] for r in rows], [r[3] for r in rows], "o-")
        ax.set_xlabel("truncation depth")
        ax.set_ylabel("relative error of  b  vs  2πω")
        ax.set_title(f"pairing identity: u={args.u}, v={args.v}")
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)
    return EXIT_OK


def cmd_analyze_beltrami(args) -> int:
    pf = _read_pattern(args)
    _require(pf.face_field is not None, "pattern file carries no log-radius field")
    ref = _reference_pattern(pf)
    deformed = _current_pattern(pf, "deformed")
    lay = layout(pf.complex, ref)
    field = beltrami_field(pf.complex, ref.kites, deformed.kites, lay)
    bound = beltrami_modulus_bound(field.angle_floor)
    buf = io.StringIO()
    wr = csv.writer(buf)
    wr.writerow(["edge", "abs_mu_tail", "abs_mu_head", "area_tail", "area_head"])
    for k, e in enumerate(field.edges):
        wr.writerow([int(e), repr(abs(field.mu[k, 0])), repr(abs(field.mu[k, 1])),
                     repr(field.area_hyp[k, 0]), repr(field.area_hyp[k, 1])])
    _write_text(buf.getvalue(), args.output)
    print(f"sup|mu| = {field.sup_abs_mu():.6g}  bound(eta={field.angle_floor:.4g}) = {bound:.6g}",
          file=sys.stderr)
    if args.plot:
        plt = _figure(args.plot)
        fig, ax = plt.subplots(figsize=(5, 3.4))
        ax.hist(np.abs(field.mu).ravel(), bins=48)
        ax.axvline(bound, color="crimson", ls="--", label="angle-floor bound")
        ax.set_xlabel("|mu| per triangle")
        ax.set_ylabel("count")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)
    return EXIT_OK


def cmd_analyze_embedding(args) -> int:
    pf = _read_pattern(args)
    lay = _layout_of(pf, "deformed", None)
    rep = good_embedding_report(lay, pf.complex, D=args.dmax, eta=args.eta)
    embedded, pairs = embeddedness_check(lay, pf.complex)
    doc = {
        "min_angle": rep.min_angle,
        "max_angle": rep.max_angle,
        "max_ratio": rep.max_ratio,
        "passes": rep.passes,
        "embedded": embedded,
        "overlapping_pairs": pairs[:50],
    }
    _write_text(json.dumps(doc, indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_analyze_wp(args) -> int:
    pf = _read_pattern(args)
    _require(pf.face_field is not None, "pattern file carries no log-radius field")
    ref = _reference_pattern(pf)
    deformed = _current_pattern(pf, "deformed")
    lay = layout(pf.complex, ref)
    field = beltrami_field(pf.complex, ref.kites, deformed.kites, lay)
    ind = wp_indicators(pf.face_field, field)
    doc = {
        "sup_gradient": ind.sup_gradient,
        "dirichlet_energy": ind.energy,
        "mu_l2_hyperbolic": ind.mu_l2_hyperbolic,
        "sup_abs_mu": field.sup_abs_mu(),
        "max_disk_area": field.max_disk_area,
        "angle_floor": field.angle_floor,
    }
    _write_text(json.dumps(doc, indent=2) + "\n", args.output)
    if args.plot:
        plt = _figure(args.plot)
        du = np.abs(pf.face_field.values[field.edge_left] - pf.face_field.values[field.edge_right])
        fig, ax = plt.subplots(figsize=(5, 3.4))
        ax.plot(np.repeat(du, 2), np.abs(field.mu).ravel(), ".", ms=3, alpha=0.5)
        ax.set_xlabel("|du| across edge")
        ax.set_ylabel("|mu| per triangle")
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)
    return EXIT_OK


def cmd_hilbert(args) -> int:
    pf = _read_pattern(args)
    _validated(pf)
    ref = _reference_pattern(pf)
    lay = layout(pf.complex, ref)
    fn = parse_harmonic_spec(args.input_spec)
    grid = np.linspace(0.0, 2.0 * math.pi, args.samples, endpoint=False)
    sample = BoundarySample(grid, args.amplitude * np.asarray(fn(np.exp(1j * grid)), dtype=float))
    out = hilbert_transform_theta(ref, lay, sample, tol=args.tol, gauge=args.gauge)
    buf = io.StringIO()
    wr = csv.writer(buf)
    wr.writerow(["angle", "value"])
    for a, v in zip(out.angles, out.values):
        wr.writerow([repr(float(a)), repr(float(v))])
    _write_text(buf.getvalue(), args.output)
    if args.plot:
        plt = _figure(args.plot)
        fig, ax = plt.subplots(figsize=(5.5, 3.4))
        ax.plot(sample.angles, sample.values, label="input", lw=1)
        ax.plot(out.angles, out.values, ".", ms=3, label="conjugate boundary values")
        ax.set_xlabel("angle")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _add_io(p, output_only: bool = False):
    if not output_only:
        p.add_argument("-i", "--input", default="-", help="pattern file (default stdin)")
    p.add_argument("-o", "--output", default="-", help="output file (default stdout)")


def _add_solver(p):
    p.add_argument("--tol", type=float, default=1e-11, help="gradient sup-norm tolerance")
    p.add_argument("--max-iter", type=int, default=200)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="circlepatterns",
                                 description="Delaunay circle patterns: solve, deform, analyze.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a mesh and angle data")
    p.add_argument("--family", choices=FAMILIES, default="square-medial")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--theta", type=float, default=math.pi / 2)
    p.add_argument("--epsilon0", type=float, default=0.05)
    p.add_argument("--source", default=None, help="pattern file for family 'imported'")
    _add_io(p, output_only=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("uniformize", help="solve the angle-sum equation for boundary radii")
    p.add_argument("--boundary-radii", type=float, default=1.0)
    p.add_argument("--boundary-radii-by-degree", default=None,
                   help="comma list deg:radius, e.g. '6:1.732,3:1.0'")
    _add_solver(p)
    _add_io(p)
    p.set_defaults(func=cmd_uniformize)

    p = sub.add_parser("deform-radii", help="deform by boundary log-radius data")
    p.add_argument("--boundary", default="re:1", help="harmonic spec (re:n, im:n, poly:...)")
    p.add_argument("--amplitude", type=float, default=0.1)
    _add_solver(p)
    _add_io(p)
    p.set_defaults(func=cmd_deform_radii)

    p = sub.add_parser("deform-angles", help="deform by boundary central-angle data")
    p.add_argument("--boundary", default="im:1")
    p.add_argument("--amplitude", type=float, default=0.05)
    _add_solver(p)
    _add_io(p)
    p.set_defaults(func=cmd_deform_angles)

    p = sub.add_parser("conjugate", help="integrate the conjugate central-angle data")
    p.add_argument("--root", type=int, default=None, help="root vertex (value pinned to 0)")
    p.add_argument("--gauge", choices=("root", "mean"), default="root")
    p.add_argument("--closedness-tol", type=float, default=1e-9)
    _add_io(p)
    p.set_defaults(func=cmd_conjugate)

    p = sub.add_parser("layout", help="develop the pattern into the plane")
    p.add_argument("--use", choices=("deformed", "reference"), default="deformed")
    p.add_argument("--seed-edge", type=int, default=None)
    _add_io(p)
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("render", help="render the layout as SVG")
    p.add_argument("--use", choices=("deformed", "reference"), default="deformed")
    p.add_argument("--circles", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--primal", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--dual", action=argparse.BooleanOptionalAction, default=False)
    p.add_argument("--color-by", choices=("none", "u"), default="none")
    _add_io(p)
    p.set_defaults(func=cmd_render)

    pa = sub.add_parser("analyze", help="diagnostics")
    asub = pa.add_subparsers(dest="analysis", required=True)

    p = asub.add_parser("pairing", help="edge pairing vs boundary symplectic form")
    p.add_argument("--u", default="re:1")
    p.add_argument("--v", default="im:1")
    p.add_argument("--depths", default="4,8,16")
    p.add_argument("--family", choices=FAMILIES, default="square-medial")
    p.add_argument("--theta", type=float, default=math.pi / 2)
    p.add_argument("--epsilon0", type=float, default=0.05)
    p.add_argument("--tol", type=float, default=1e-11)
    p.add_argument("--plot", default=None, help="write a convergence figure (png)")
    _add_io(p, output_only=True)
    p.set_defaults(func=cmd_analyze_pairing)

    p = asub.add_parser("beltrami", help="piecewise-affine Beltrami field")
    p.add_argument("--plot", default=None, help="write a |mu| histogram (png)")
    _add_io(p)
    p.set_defaults(func=cmd_analyze_beltrami)

    p = asub.add_parser("embedding", help="good-embedding report and overlap check")
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--dmax", type=float, default=None)
    _add_io(p)
    p.set_defaults(func=cmd_analyze_embedding)

    p = asub.add_parser("wp", help="Weil-Petersson style indicators")
    p.add_argument("--plot", default=None, help="write a |mu| vs |du| figure (png)")
    _add_io(p)
    p.set_defaults(func=cmd_analyze_wp)

    p = sub.add_parser("hilbert", help="boundary-to-boundary conjugation pipeline")
    p.add_argument("--input-spec", default="re:1", help="boundary function on the circle")
    p.add_argument("--amplitude", type=float, default=0.05)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--gauge", choices=("mean", "none"), default="mean")
    p.add_argument("--plot", default=None)
    _add_solver(p)
    _add_io(p)
    p.set_defaults(func=cmd_hilbert)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return ex.code
    except (SolverError, ClosednessFailure, InadmissibleBoundaryError) as ex:
        print(f"solver failure: {ex}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
