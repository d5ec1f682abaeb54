"""Delaunay circle patterns with prescribed intersection angles.

Library for building finite disk-type cell complexes, solving the
angle-sum equation for circle pattern radii, deforming patterns in
log-radius or central-angle coordinates, developing them into the plane,
and running quasiconformal / boundary-pairing diagnostics.
"""

from .analysis import (
    BeltramiField,
    BoundarySample,
    FourierCoeffs,
    GoodEmbeddingReport,
    PairingCheck,
    WpIndicators,
    beltrami_field,
    boundary_sample_to_coeffs,
    dirichlet_energy,
    fourier_symplectic,
    good_embedding_report,
    harmonic_extension,
    hilbert_transform_theta,
    pairing_b,
    parse_harmonic_spec,
    verify_pairing_identity,
    wp_indicators,
)
from .cell_complex import (
    AngleData,
    DiskComplex,
    ValidationReport,
    dual_edges,
    validate_complex,
    validate_theta,
)
from .functionals import (
    AdmissibilityGuard,
    FaceField,
    InadmissibleStartError,
    LineSearchFailure,
    MaxIterationsError,
    SolveReport,
    SolverError,
    VertexField,
    grad_w,
    grad_wstar,
    hessian_w,
    hessian_wstar,
    k_edge,
    kstar_edge,
    newton_solve,
    w_edge,
    wstar_edge,
)
from .kite_geometry import (
    EdgeWeights,
    KiteAngles,
    KiteTable,
    beltrami_coefficient,
    chord_length,
    clausen,
    edge_weight,
    half_angle_log_form,
    half_angles,
    im_dilog,
    lobachevsky,
)
from .meshes import MeshSpec, gen_mesh, hex_medial, square_grid, square_medial
from .pattern_engine import (
    ClosednessFailure,
    InadmissibleBoundaryError,
    Layout,
    PatternSolution,
    conjugate_u_to_v,
    deform_angles,
    deform_radii,
    embeddedness_check,
    harmonic_conjugate_tangent,
    harmonic_conjugate_vertex,
    layout,
    pattern_from_angles,
    pattern_from_radii,
    similarity_align,
    uniformize,
)
from .pattern_file import PatternFile, load_pattern_file, save_pattern_file
from .svg_render import RenderOptions, render_svg

__version__ = "0.1.0"
