"""Diagnostics connecting discrete patterns to boundary function theory.

Dirichlet energies and harmonic extensions on either side of the duality,
the bilinear edge pairing and its boundary symplectic counterpart in
Fourier coordinates, good-embedding measurements of developed layouts,
piecewise-affine Beltrami fields with hyperbolic-area weights, and the
conjugation pipeline that plays the role of a Hilbert transform on
boundary samples.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cell_complex import DiskComplex
from .functionals import FaceField, VertexField, graph_laplacian
from .kite_geometry import KiteTable, beltrami_coefficient
from .pattern_engine import Layout, PatternSolution, conjugate_u_to_v, deform_radii

TWO_PI = 2.0 * np.pi


# -- energies and harmonic extension ----------------------------------------


def _edge_nodes(c: DiskComplex, field) -> tuple[np.ndarray, np.ndarray]:
    ie = c.interior_edges
    if isinstance(field, FaceField) or (hasattr(field, "values") and len(field.values) == c.num_faces):
        return c.edge_left[ie], c.edge_right[ie]
    return c.edge_tail[ie], c.edge_head[ie]


def dirichlet_energy(c: DiskComplex, field, weights: np.ndarray | None = None) -> float:
    """Weighted sum of squared differences over interior edges.

    ``weights`` is a per-edge array (full length); omitted means the
    combinatorial weight 1.  Face fields difference across dual edges,
    vertex fields along primal edges.
    """
    a, b = _edge_nodes(c, field)
    vals = field.values if hasattr(field, "values") else np.asarray(field, dtype=float)
    d = vals[a] - vals[b]
    if weights is None:
        return float(d @ d)
    w = np.asarray(weights, dtype=float)[c.interior_edges]
    return float(np.sum(w * d * d))


def harmonic_extension(c: DiskComplex, boundary, weights: np.ndarray | None = None):
    """Solve the weighted Laplace equation for the free entries.

    ``boundary`` is a FaceField or VertexField whose fixed entries carry
    the Dirichlet data; the returned field of the same kind agrees with
    them and has zero weighted Laplacian (residual below 1e-12) at every
    free node.
    """
    on_faces = len(boundary.values) == c.num_faces
    ie = c.interior_edges
    if on_faces:
        a, b, n = c.edge_left[ie], c.edge_right[ie], c.num_faces
    else:
        a, b, n = c.edge_tail[ie], c.edge_head[ie], c.num_vertices
    w = np.ones(len(ie)) if weights is None else np.asarray(weights, dtype=float)[ie]
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    lap = graph_laplacian(n, a, b, w)
    out = boundary.values.copy()
    idx = np.flatnonzero(boundary.free)
    if idx.size:
        sub = lap[idx][:, idx].tocsc()
        diag = sub.diagonal()
        if np.any(diag == 0.0):
            sub = sub + sp.diags((diag == 0.0).astype(float))
        rhs = -(lap[idx] @ np.where(boundary.free, 0.0, out))
        out[idx] = spla.spsolve(sub, rhs)
        resid = np.abs(lap @ out)[idx][diag > 0.0]
        scale = max(1.0, float(np.max(np.abs(out))))
        assert resid.size == 0 or float(resid.max()) < 1e-10 * scale, \
            "harmonic extension did not solve the Laplace system"
    cls = FaceField if on_faces else VertexField
    return cls(out, boundary.free.copy())


def pairing_b(c: DiskComplex, u, v) -> float:
    """Bilinear pairing over interior edges between a face field and a
    vertex field: sum of (u_right - u_left)(v_head - v_tail)."""
    ie = c.interior_edges
    uvals = u.values if hasattr(u, "values") else np.asarray(u, dtype=float)
    vvals = v.values if hasattr(v, "values") else np.asarray(v, dtype=float)
    du = uvals[c.edge_right[ie]] - uvals[c.edge_left[ie]]
    dv = vvals[c.edge_head[ie]] - vvals[c.edge_tail[ie]]
    return float(du @ dv)


# -- boundary samples and Fourier coefficients -------------------------------


@dataclass
class BoundarySample:
    """Values at strictly increasing angles in [0, 2*pi) on a reference circle."""

    angles: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.angles.shape != self.values.shape or self.angles.ndim != 1:
            raise ValueError("angles and values must be matching 1-d arrays")
        if self.angles.size and (np.any(np.diff(self.angles) <= 0)
                                 or self.angles[0] < 0 or self.angles[-1] >= TWO_PI):
            raise ValueError("angles must be strictly increasing within [0, 2*pi)")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sample values must be finite")


@dataclass
class FourierCoeffs:
    """Coefficients c_n for n in [-N, N] of a real function on the circle.

    Stored as an array of length 2N+1 with n = index - N; the reality
    constraint c_{-n} = conj(c_n) holds to 1e-12.
    """

    coefficients: np.ndarray
    aliasing_warning: bool = False

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if self.coefficients.ndim != 1 or self.coefficients.size % 2 != 1:
            raise ValueError("need coefficients for n = -N..N")
        n = self.order
        flipped = np.conj(self.coefficients[::-1])
        if np.max(np.abs(self.coefficients - flipped)) > 1e-12 * max(1.0, np.max(np.abs(self.coefficients))):
            raise ValueError("coefficients violate the reality constraint")

    @property
    def order(self) -> int:
        return (self.coefficients.size - 1) // 2

    def __getitem__(self, n: int) -> complex:
        return complex(self.coefficients[n + self.order])

    def evaluate(self, angles: np.ndarray) -> np.ndarray:
        n = np.arange(-self.order, self.order + 1)
        return np.real(np.exp(1j * np.outer(angles, n)) @ self.coefficients)


def boundary_sample_to_coeffs(sample: BoundarySample, n_max: int,
                              aliasing_rel_tol: float = 0.25) -> FourierCoeffs:
    """Fourier coefficients by trapezoidal quadrature on the sample angles.

    Requires at least 2*n_max + 1 samples.  Reality is enforced by
    averaging c_n with conj(c_{-n}).  If reconstructing the coefficients
    at the sample points misses the data by more than ``aliasing_rel_tol``
    in relative RMS, the result is flagged (and a warning is emitted):
    the sample likely contains unresolved high-frequency content.
    """
    m = sample.angles.size
    if m < 2 * n_max + 1:
        raise ValueError(f"need at least {2 * n_max + 1} samples for order {n_max}, got {m}")
    ang = sample.angles
    vals = sample.values
    gaps = np.diff(np.concatenate([ang, [ang[0] + TWO_PI]]))
    w = 0.5 * (gaps + np.roll(gaps, 1))  # cyclic trapezoid weights
    n = np.arange(-n_max, n_max + 1)
    coeff = (np.exp(-1j * np.outer(n, ang)) * (w * vals)).sum(axis=1) / TWO_PI
    coeff = 0.5 * (coeff + np.conj(coeff[::-1]))
    fc = FourierCoeffs(coeff)
    recon = fc.evaluate(ang)
    scale = float(np.sqrt(np.mean(vals ** 2))) + 1e-300
    rel = float(np.sqrt(np.mean((recon - vals) ** 2))) / scale
    if rel > aliasing_rel_tol and scale > 1e-12:
        warnings.warn(
            f"Fourier reconstruction misses the samples by {rel:.1%} RMS; "
            "data may be undersampled (aliasing)", RuntimeWarning, stacklevel=2)
        fc.aliasing_warning = True
    return fc


def fourier_symplectic(u: FourierCoeffs, v: FourierCoeffs) -> float:
    """Symplectic form (1/i) sum_n n u_n conj(v_n); real for real data."""
    order = min(u.order, v.order)
    n = np.arange(-order, order + 1)
    uu = u.coefficients[u.order - order:u.order + order + 1]
    vv = v.coefficients[v.order - order:v.order + order + 1]
    val = np.sum(n * uu * np.conj(vv)) / 1j
    return float(val.real)


def parse_harmonic_spec(spec: str):
    """Parse a harmonic test-function spec into a sampler z -> value.

    Forms: ``re:n`` / ``im:n`` for Re z^n, Im z^n, and ``poly:c0,c1,...``
    for Re(sum c_k z^k) with real coefficients.
    """
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    if kind in ("re", "im"):
        n = int(arg)
        if kind == "re":
            return lambda z: np.real(np.asarray(z, dtype=complex) ** n)
        return lambda z: np.imag(np.asarray(z, dtype=complex) ** n)
    if kind == "poly":
        coeffs = [float(x) for x in arg.split(",") if x.strip()]
        if not coeffs:
            raise ValueError("poly spec needs coefficients")

        def sampler(z, coeffs=tuple(coeffs)):
            z = np.asarray(z, dtype=complex)
            acc = np.zeros_like(z)
            for ck in reversed(coeffs):
                acc = acc * z + ck
            return np.real(acc)

        return sampler
    raise ValueError(f"unknown harmonic spec {spec!r}")


def layout_center(c: DiskComplex, l: Layout) -> complex:
    """Centroid of the placed boundary vertices.

    The development pins the seed face at the origin, so measurements in
    polar coordinates must recenter first.
    """
    bv = np.flatnonzero(c.boundary_vertices & np.isfinite(l.z_V))
    if bv.size == 0:
        raise ValueError("layout has no placed boundary vertices")
    return complex(np.mean(l.z_V[bv]))


def boundary_vertex_order(c: DiskComplex, l: Layout, center: complex | None = None) -> np.ndarray:
    """Placed boundary vertices sorted by argument about the center."""
    if center is None:
        center = layout_center(c, l)
    bv = np.flatnonzero(c.boundary_vertices & np.isfinite(l.z_V))
    ang = np.mod(np.angle(l.z_V[bv] - center), TWO_PI)
    order = np.argsort(ang, kind="stable")
    return bv[order]


def layout_scale(c: DiskComplex, l: Layout, center: complex | None = None) -> float:
    """Mean boundary-vertex distance from the center (reference radius)."""
    if center is None:
        center = layout_center(c, l)
    bv = np.flatnonzero(c.boundary_vertices & np.isfinite(l.z_V))
    if bv.size == 0:
        raise ValueError("layout has no placed boundary vertices")
    return float(np.mean(np.abs(l.z_V[bv] - center)))


@dataclass
class PairingCheck:
    b: float
    two_pi_omega: float
    rel_error: float


def verify_pairing_identity(ref_layout: Layout, c: DiskComplex, smooth_u, smooth_v,
                            n_modes: int | None = None) -> PairingCheck:
    """Compare the edge pairing of sampled harmonic functions against
    2*pi times the Fourier symplectic form of their boundary values.

    The layout is rescaled by the mean boundary-vertex radius so it
    approximately fills the unit disk; ``smooth_u`` is sampled at the
    circumcenters and ``smooth_v`` at the intersection points.  Boundary
    Fourier data is taken on the unit circle at the angular positions of
    the boundary vertices.
    """
    if isinstance(smooth_u, str):
        smooth_u = parse_harmonic_spec(smooth_u)
    if isinstance(smooth_v, str):
        smooth_v = parse_harmonic_spec(smooth_v)
    center = layout_center(c, ref_layout)
    r = layout_scale(c, ref_layout, center)
    zf = (ref_layout.z_F - center) / r
    zv = (ref_layout.z_V - center) / r
    u = np.where(np.isfinite(zf), smooth_u(np.where(np.isfinite(zf), zf, 0.0)), 0.0)
    v = np.where(np.isfinite(zv), smooth_v(np.where(np.isfinite(zv), zv, 0.0)), 0.0)
    b = pairing_b(c, u, v)

    order = boundary_vertex_order(c, ref_layout, center)
    ang = np.mod(np.angle(ref_layout.z_V[order] - center), TWO_PI)
    ang, keep = np.unique(ang, return_index=True)
    circle = np.exp(1j * ang)
    if n_modes is None:
        n_modes = min(8, (ang.size - 1) // 2)
    cu = boundary_sample_to_coeffs(BoundarySample(ang, smooth_u(circle)), n_modes)
    cv = boundary_sample_to_coeffs(BoundarySample(ang, smooth_v(circle)), n_modes)
    omega = fourier_symplectic(cu, cv)
    two_pi_omega = TWO_PI * omega
    denom = max(abs(b), abs(two_pi_omega), 1e-300)
    return PairingCheck(b=b, two_pi_omega=two_pi_omega,
                        rel_error=abs(b - two_pi_omega) / denom)


# -- good embedding measurements ---------------------------------------------


@dataclass
class GoodEmbeddingReport:
    """Measured angle and length-ratio bounds of a developed pattern.

    Interior angles are collected from the faces of both the primal
    decomposition (intersection points) and the dual one (circumcenters);
    the adjacent-edge ratio is the spoke ratio of each kite, i.e. the
    ratio of the two circle radii meeting at every intersection point.
    """

    min_angle: float
    max_angle: float
    max_ratio: float
    passes: bool | None = None


def _polygon_angles(points: np.ndarray) -> np.ndarray:
    n = len(points)
    out = []
    for k in range(n):
        a, b, cpt = points[k - 1], points[k], points[(k + 1) % n]
        if not (np.isfinite(a) and np.isfinite(b) and np.isfinite(cpt)):
            out.append(np.nan)
            continue
        ang = np.angle((a - b) / (cpt - b))
        out.append(abs(ang))
    return np.asarray(out)


def good_embedding_report(l: Layout, c: DiskComplex, D: float | None = None,
                          eta: float | None = None) -> GoodEmbeddingReport:
    """Exact min/max interior angles and adjacent-edge length ratios."""
    angles = []
    for loop in c.faces:
        pts = l.z_V[loop]
        a = _polygon_angles(pts)
        angles.extend(a[np.isfinite(a)])
    for v in c.interior_vertices():
        fan = c.face_fan(v)
        pts = l.z_F[fan]
        if np.all(np.isfinite(pts)) and len(fan) >= 3:
            a = _polygon_angles(pts)
            angles.extend(a[np.isfinite(a)])
    ie = c.interior_edges
    ratios = [1.0]
    for e in ie:
        e = int(e)
        zl, zr = l.z_F[c.edge_left[e]], l.z_F[c.edge_right[e]]
        for vtx in (c.edge_tail[e], c.edge_head[e]):
            zv = l.z_V[vtx]
            if np.isfinite(zl) and np.isfinite(zr) and np.isfinite(zv):
                s1, s2 = abs(zl - zv), abs(zr - zv)
                ratios.append(max(s1, s2) / min(s1, s2))
    min_angle = float(np.min(angles)) if angles else np.nan
    max_angle = float(np.max(angles)) if angles else np.nan
    max_ratio = float(np.max(ratios))
    passes = None
    if D is not None and eta is not None:
        passes = bool(min_angle >= eta and max_angle <= np.pi - eta and max_ratio <= D)
    return GoodEmbeddingReport(min_angle=min_angle, max_angle=max_angle,
                               max_ratio=max_ratio, passes=passes)


# -- Beltrami fields ----------------------------------------------------------

# Degree-5 Radon rule on the triangle: barycentric points and weights.
_QA = 0.059715871789770
_QB = 0.797426985353087
_TRI_QUAD = [
    ((1 / 3, 1 / 3, 1 / 3), 0.225),
    ((_QA, _QA, 1 - 2 * _QA), 0.132394152788506),
    ((_QA, 1 - 2 * _QA, _QA), 0.132394152788506),
    ((1 - 2 * _QA, _QA, _QA), 0.132394152788506),
    ((_QB, _QB, 1 - 2 * _QB), 0.125939180544827),
    ((_QB, 1 - 2 * _QB, _QB), 0.125939180544827),
    ((1 - 2 * _QB, _QB, _QB), 0.125939180544827),
]


def hyperbolic_triangle_area(za: complex, zb: complex, zc: complex) -> float:
    """Hyperbolic area of a Euclidean triangle inside the unit disk by
    7-point barycentric quadrature of the density 4/(1-|z|^2)^2."""
    eucl = 0.5 * abs(((zb - za) * np.conj(zc - za)).imag)
    total = 0.0
    for (wa, wb, wc), wt in _TRI_QUAD:
        z = wa * za + wb * zb + wc * zc
        r2 = z.real * z.real + z.imag * z.imag
        if r2 >= 1.0:
            raise ValueError("triangle leaves the unit disk")
        total += wt * 4.0 / (1.0 - r2) ** 2
    return eucl * total


def hyperbolic_disk_area(center_abs: float, radius: float) -> float:
    """Hyperbolic area of a Euclidean disk strictly inside the unit disk."""
    b = center_abs + radius
    a = center_abs - radius
    if b >= 1.0:
        raise ValueError("disk reaches the unit circle")
    # hyperbolic distance between the diameter endpoints is 2|atanh b - atanh a|
    rho = abs(math.atanh(b) - math.atanh(a))
    return 4.0 * math.pi * math.sinh(rho / 2.0) ** 2


@dataclass
class BeltramiField:
    """Per-triangle Beltrami coefficients and hyperbolic areas.

    Row k corresponds to interior edge ``edges[k]``; column 0 is the
    triangle through the edge tail, column 1 through the head.  Areas are
    measured in the rescaled reference layout.  ``max_disk_area`` is the
    largest hyperbolic circumdisk area (the area constant of the
    L2-bound), ``angle_floor`` the measured angle floor of all triangles.
    """

    mu: np.ndarray
    area_hyp: np.ndarray
    edges: np.ndarray
    edge_left: np.ndarray
    edge_right: np.ndarray
    max_disk_area: float
    angle_floor: float

    def sup_abs_mu(self) -> float:
        return float(np.max(np.abs(self.mu))) if self.mu.size else 0.0


def beltrami_field(c: DiskComplex, kites_ref: KiteTable, kites_def: KiteTable,
                   layout_ref: Layout, rho: float = 0.99) -> BeltramiField:
    """Beltrami coefficients of the kite-to-kite piecewise affine map.

    Each interior edge carries two triangles (left center, right center,
    one intersection point).  Source and target angle triples come from
    the two kite tables; coefficients follow the exact sine formula with
    the orientation of the developed reference layout.  Hyperbolic areas
    are taken after rescaling the reference layout so every circumdisk is
    contained in the disk of radius ``rho``.
    """
    ie = c.interior_edges
    lf, rf = c.edge_left[ie], c.edge_right[ie]
    ti, hj = c.edge_tail[ie], c.edge_head[ie]

    # measured circumradii from the layout spokes
    radii = np.full(c.num_faces, np.nan)
    for k, e in enumerate(ie):
        for f, vtx in ((lf[k], ti[k]), (lf[k], hj[k]), (rf[k], ti[k]), (rf[k], hj[k])):
            s = abs(layout_ref.z_F[f] - layout_ref.z_V[vtx])
            if np.isfinite(s):
                radii[f] = s if np.isnan(radii[f]) else max(radii[f], s)
    extent = np.nanmax(np.abs(layout_ref.z_F) + radii)
    if not np.isfinite(extent) or extent <= 0:
        raise ValueError("layout has no placed circumdisks")
    scale = rho / extent
    zf = layout_ref.z_F * scale
    zv = layout_ref.z_V * scale
    if np.nanmax(np.abs(zf) + radii * scale) >= 1.0:
        raise ValueError("layout exceeds the unit disk after rescaling")

    n = len(ie)
    mu = np.zeros((n, 2), dtype=complex)
    area = np.zeros((n, 2))
    floor = np.pi
    for k in range(n):
        e = int(ie[k])
        src = (kites_ref.alpha_left[e], kites_ref.alpha_right[e], kites_ref.theta[e])
        dst = (kites_def.alpha_left[e], kites_def.alpha_right[e], kites_def.theta[e])
        floor = min(floor, *(min(x, np.pi - x) for x in src), *(min(x, np.pi - x) for x in dst))
        m = beltrami_coefficient(src, dst)
        # the coefficient is a (-1,1)-differential: rotating the source
        # triangle from canonical position into the layout multiplies it
        # by e^{2i delta}; the tail triangle is traversed clockwise and
        # additionally conjugates the canonical value
        dual = zf[rf[k]] - zf[lf[k]]
        twist = dual / np.conj(dual) if dual != 0 else 1.0  # e^{2i arg(dual)}
        mu[k, 0] = np.conj(m) * twist
        mu[k, 1] = m * twist
        area[k, 0] = hyperbolic_triangle_area(zf[lf[k]], zf[rf[k]], zv[ti[k]])
        area[k, 1] = hyperbolic_triangle_area(zf[lf[k]], zf[rf[k]], zv[hj[k]])

    disks = radii * scale
    ok = np.isfinite(disks)
    max_disk = max(hyperbolic_disk_area(abs(zf[f]), disks[f])
                   for f in np.flatnonzero(ok)) if ok.any() else 0.0
    return BeltramiField(mu=mu, area_hyp=area, edges=np.asarray(ie, dtype=np.int64),
                         edge_left=lf, edge_right=rf, max_disk_area=float(max_disk),
                         angle_floor=float(floor))


@dataclass
class WpIndicators:
    """Weil-Petersson style indicators of a log-radius deformation."""

    sup_gradient: float
    energy: float
    mu_l2_hyperbolic: float


def wp_indicators(u: FaceField, field: BeltramiField) -> WpIndicators:
    """Sup gradient and combinatorial energy of ``u`` together with the
    hyperbolically weighted squared L2 mass of the Beltrami field."""
    du = u.values[field.edge_left] - u.values[field.edge_right]
    sup = float(np.max(np.abs(du))) if du.size else 0.0
    energy = float(du @ du)
    l2 = float(np.sum(np.abs(field.mu) ** 2 * field.area_hyp))
    return WpIndicators(sup_gradient=sup, energy=energy, mu_l2_hyperbolic=l2)


# -- Hilbert transform analogue ----------------------------------------------


def periodic_interp(angles_src: np.ndarray, values_src: np.ndarray,
                    angles_query: np.ndarray) -> np.ndarray:
    """Linear interpolation of a 2*pi-periodic sample."""
    ext_a = np.concatenate([angles_src, [angles_src[0] + TWO_PI]])
    ext_v = np.concatenate([values_src, [values_src[0]]])
    q = np.mod(angles_query - angles_src[0], TWO_PI) + angles_src[0]
    return np.interp(q, ext_a, ext_v)


def hilbert_transform_theta(ref: PatternSolution, layout_ref: Layout,
                            boundary_u: BoundarySample, tol: float = 1e-11,
                            gauge: str = "mean") -> BoundarySample:
    """Boundary values of the conjugate deformation.

    Interpolates the sample onto the boundary circumcenters, deforms the
    pattern radially, integrates the conjugate central-angle data and
    restricts it to the boundary vertices (mean-normalized by default),
    with angles taken from the reference layout.
    """
    c = ref.complex
    center = layout_center(c, layout_ref)
    bf = np.flatnonzero(c.boundary_faces & np.isfinite(layout_ref.z_F))
    ang_f = np.mod(np.angle(layout_ref.z_F[bf] - center), TWO_PI)
    bu = FaceField.zeros(c)
    bu.values[bf] = periodic_interp(boundary_u.angles, boundary_u.values, ang_f)

    deformed = deform_radii(ref, bu, tol=tol)
    conj = conjugate_u_to_v(ref, deformed.u)

    order = boundary_vertex_order(c, layout_ref, center)
    order = order[conj.reachable[order]]
    ang = np.mod(np.angle(layout_ref.z_V[order] - center), TWO_PI)
    ang, keep = np.unique(ang, return_index=True)
    vals = conj.v.values[order][keep]
    if gauge == "mean":
        vals = vals - float(np.mean(vals))
    return BoundarySample(angles=ang, values=vals)
