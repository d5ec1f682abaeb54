import math

import numpy as np
import pytest

from circlepatterns import (
    AngleData,
    BoundarySample,
    FaceField,
    VertexField,
    beltrami_field,
    boundary_sample_to_coeffs,
    deform_radii,
    dirichlet_energy,
    fourier_symplectic,
    good_embedding_report,
    harmonic_extension,
    hilbert_transform_theta,
    layout,
    pairing_b,
    square_grid,
    square_medial,
    uniformize,
    verify_pairing_identity,
    wp_indicators,
)
from circlepatterns.analysis import hyperbolic_disk_area, hyperbolic_triangle_area
from circlepatterns.kite_geometry import beltrami_modulus_bound

from conftest import sample_boundary_faces

SQRT3 = math.sqrt(3.0)


# -- Dirichlet energy and harmonic extension -----------------------------------


def test_dirichlet_energy_constant_and_checkerboard():
    c = square_grid(2)
    u = FaceField(np.full(c.num_faces, 3.3), ~c.boundary_faces)
    assert dirichlet_energy(c, u) == 0.0
    # 2x2 faces in column-major construction order: (0,0),(0,1),(1,0),(1,1);
    # checkerboard assigns 0/1 across each of the four dual edges
    vals = np.array([0.0, 1.0, 1.0, 0.0])
    u2 = FaceField(vals, ~c.boundary_faces)
    assert dirichlet_energy(c, u2) == pytest.approx(4.0)


def test_dirichlet_energy_scaling():
    c = square_grid(4)
    rng = np.random.default_rng(0)
    u = FaceField(rng.standard_normal(c.num_faces), ~c.boundary_faces)
    e1 = dirichlet_energy(c, u)
    u2 = FaceField(2.5 * u.values, u.free)
    assert dirichlet_energy(c, u2) == pytest.approx(2.5 ** 2 * e1, rel=1e-12)


def test_harmonic_extension_constant_and_max_principle():
    c = square_grid(6)
    bnd = FaceField.zeros(c)
    bnd.values[~bnd.free] = 1.5
    ext = harmonic_extension(c, bnd)
    assert np.max(np.abs(ext.values - 1.5)) <= 1e-12
    rng = np.random.default_rng(1)
    bnd.values[~bnd.free] = rng.uniform(-2, 3, (~bnd.free).sum())
    ext = harmonic_extension(c, bnd)
    lo, hi = bnd.values[~bnd.free].min(), bnd.values[~bnd.free].max()
    assert np.all(ext.values >= lo - 1e-12) and np.all(ext.values <= hi + 1e-12)


def test_harmonic_extension_dirichlet_principle():
    c = square_grid(6)
    rng = np.random.default_rng(2)
    bnd = FaceField.zeros(c)
    bnd.values[~bnd.free] = rng.uniform(-1, 1, (~bnd.free).sum())
    ext = harmonic_extension(c, bnd)
    e0 = dirichlet_energy(c, ext)
    for _ in range(10):
        competitor = ext.values.copy()
        competitor[ext.free] += rng.standard_normal(ext.free.sum()) * 0.3
        e = dirichlet_energy(c, FaceField(competitor, ext.free))
        assert e >= e0 - 1e-12


def test_harmonic_extension_vertex_side():
    c = square_grid(5)
    rng = np.random.default_rng(3)
    bnd = VertexField.zeros(c)
    bnd.values[~bnd.free] = rng.uniform(-1, 1, (~bnd.free).sum())
    ext = harmonic_extension(c, bnd)
    # interior vertices satisfy the mean value property with unit weights
    for v in c.interior_vertices():
        nbrs = [o for _, o in c.vertex_fan(v)]
        assert ext.values[v] == pytest.approx(np.mean(ext.values[nbrs]), abs=1e-11)


# -- pairing --------------------------------------------------------------------


def test_pairing_constant_inputs_vanish():
    c = square_grid(4)
    rng = np.random.default_rng(4)
    u = rng.standard_normal(c.num_faces)
    v = rng.standard_normal(c.num_vertices)
    assert pairing_b(c, u, np.full(c.num_vertices, 2.0)) == pytest.approx(0.0, abs=1e-12)
    assert pairing_b(c, np.full(c.num_faces, -1.3), v) == pytest.approx(0.0, abs=1e-12)


def test_pairing_bilinear_and_cauchy_schwarz():
    c = square_grid(4)
    rng = np.random.default_rng(5)
    u1 = rng.standard_normal(c.num_faces)
    u2 = rng.standard_normal(c.num_faces)
    v = rng.standard_normal(c.num_vertices)
    lhs = pairing_b(c, 2.0 * u1 - 0.7 * u2, v)
    rhs = 2.0 * pairing_b(c, u1, v) - 0.7 * pairing_b(c, u2, v)
    assert lhs == pytest.approx(rhs, abs=1e-12)
    eu = dirichlet_energy(c, FaceField(u1, ~c.boundary_faces))
    ev = dirichlet_energy(c, VertexField(v, ~c.boundary_vertices))
    assert abs(pairing_b(c, u1, v)) <= math.sqrt(eu * ev) + 1e-12


def test_pairing_face_indicator_telescopes():
    c = square_grid(5)
    rng = np.random.default_rng(6)
    v = rng.standard_normal(c.num_vertices)
    for f in c.interior_faces():
        chi = np.zeros(c.num_faces)
        chi[f] = 1.0
        assert pairing_b(c, chi, v) == pytest.approx(0.0, abs=1e-12)


# -- Fourier ----------------------------------------------------------------------


def test_fourier_symplectic_examples():
    ang = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    for n in (1, 2, 3):
        u = boundary_sample_to_coeffs(BoundarySample(ang, np.cos(n * ang)), 8)
        v = boundary_sample_to_coeffs(BoundarySample(ang, np.sin(n * ang)), 8)
        assert fourier_symplectic(u, v) == pytest.approx(n / 2, abs=1e-10)
        assert fourier_symplectic(u, u) == pytest.approx(0.0, abs=1e-12)
    const = boundary_sample_to_coeffs(BoundarySample(ang, np.ones_like(ang)), 8)
    w = boundary_sample_to_coeffs(BoundarySample(ang, np.sin(2 * ang)), 8)
    assert fourier_symplectic(const, w) == pytest.approx(0.0, abs=1e-12)


def test_boundary_sample_coeffs_constant_and_cos():
    ang = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    fc = boundary_sample_to_coeffs(BoundarySample(ang, np.full(64, 2.0)), 6)
    assert fc[0] == pytest.approx(2.0, abs=1e-12)
    assert max(abs(fc[n]) for n in range(1, 7)) < 1e-12
    fc = boundary_sample_to_coeffs(BoundarySample(ang, np.cos(ang)), 6)
    assert abs(fc[1] - 0.5) < 1e-10 and abs(fc[-1] - 0.5) < 1e-10
    assert max(abs(fc[n]) for n in (0, 2, 3, 4, 5, 6)) < 1e-10
    assert not fc.aliasing_warning


def test_boundary_sample_insufficient():
    ang = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    with pytest.raises(ValueError):
        boundary_sample_to_coeffs(BoundarySample(ang, np.cos(ang)), 4)


def test_boundary_sample_aliasing_guard():
    n_high = 8
    ang = np.linspace(0, 2 * np.pi, 2 * n_high, endpoint=False)
    vals = np.cos(n_high * ang)  # alternating +-1, invisible below order 8
    with pytest.warns(RuntimeWarning):
        fc = boundary_sample_to_coeffs(BoundarySample(ang, vals), n_high - 1)
    assert fc.aliasing_warning


# -- pairing identity ----------------------------------------------------------------


def test_verify_pairing_identity_constant_zero(square8):
    c, th, sol, lay = square8
    chk = verify_pairing_identity(lay, c, "poly:1.0", "im:1")
    assert chk.b == pytest.approx(0.0, abs=1e-12)
    assert chk.two_pi_omega == pytest.approx(0.0, abs=1e-10)


def test_verify_pairing_symmetric_pair_vanishes(square8):
    c, th, sol, lay = square8
    chk = verify_pairing_identity(lay, c, "re:1", "re:1")
    assert abs(chk.b) < 1e-12
    assert abs(chk.two_pi_omega) < 1e-10


def test_verify_pairing_trend_higher_mode():
    errs = []
    for depth in (4, 8):
        c = square_medial(depth)
        th = AngleData.constant(c, np.pi / 2)
        sol = uniformize(c, th, FaceField.from_boundary(c, 0.0), tol=1e-12)
        lay = layout(c, sol)
        chk = verify_pairing_identity(lay, c, "re:2", "im:2")
        assert chk.two_pi_omega == pytest.approx(2 * np.pi, rel=0.05)  # omega = 1
        errs.append(chk.rel_error)
    assert errs[1] < errs[0] * 1.1


# -- good embedding --------------------------------------------------------------------


def test_good_embedding_square_exact(square8):
    c, th, sol, lay = square8
    rep = good_embedding_report(lay, c)
    assert rep.min_angle == pytest.approx(np.pi / 2, abs=1e-12)
    assert rep.max_angle == pytest.approx(np.pi / 2, abs=1e-12)
    assert rep.max_ratio == pytest.approx(1.0, abs=1e-12)


def test_good_embedding_hex_closed_forms(hex4):
    c, th, sol, lay = hex4
    rep = good_embedding_report(lay, c)
    assert rep.min_angle == pytest.approx(np.pi / 3, abs=1e-12)
    assert rep.max_ratio == pytest.approx(SQRT3, abs=1e-12)
    rep2 = good_embedding_report(lay, c, D=1.0, eta=np.pi / 2)
    assert rep2.passes is False
    rep3 = good_embedding_report(lay, c, D=2.0, eta=0.5)
    assert rep3.passes is True


# -- Beltrami field -----------------------------------------------------------------


def test_hyperbolic_areas():
    # quadrature at the origin against the closed disk formula
    r = 0.25
    tri = hyperbolic_triangle_area(r + 0j, r * np.exp(2j * np.pi / 3), r * np.exp(-2j * np.pi / 3))
    assert tri > 0
    disk = hyperbolic_disk_area(0.0, r)
    rho = 2 * math.atanh(r)
    assert disk == pytest.approx(4 * np.pi * math.sinh(rho / 2) ** 2, rel=1e-12)
    with pytest.raises(ValueError):
        hyperbolic_disk_area(0.9, 0.2)


def test_beltrami_field_trivial_deformation(square8):
    c, th, sol, lay = square8
    field = beltrami_field(c, sol.kites, sol.kites, lay)
    assert field.sup_abs_mu() <= 1e-12
    assert np.all(field.area_hyp > 0)


def test_beltrami_field_matches_affine_oracle(square8):
    c, th, sol, lay = square8
    bu = sample_boundary_faces(c, lay, lambda z: np.real(z * z), 0.3)
    rd = deform_radii(sol, bu, tol=1e-12)
    lay_def = layout(c, rd.pattern)
    field = beltrami_field(c, sol.kites, rd.pattern.kites, lay)
    ie = c.interior_edges

    def mu_from_points(s0, s1, s2, t0, t1, t2):
        A = np.array([[(s1 - s0).real, (s2 - s0).real], [(s1 - s0).imag, (s2 - s0).imag]])
        B = np.array([[(t1 - t0).real, (t2 - t0).real], [(t1 - t0).imag, (t2 - t0).imag]])
        L = B @ np.linalg.inv(A)
        fz = complex(L[0, 0] + L[1, 1], L[1, 0] - L[0, 1]) / 2
        fzb = complex(L[0, 0] - L[1, 1], L[1, 0] + L[0, 1]) / 2
        return fzb / fz

    worst = 0.0
    for k in range(len(ie)):
        e = int(ie[k])
        lf, rf = c.edge_left[e], c.edge_right[e]
        for col, vtx in ((0, c.edge_tail[e]), (1, c.edge_head[e])):
            mu_direct = mu_from_points(lay.z_F[lf], lay.z_F[rf], lay.z_V[vtx],
                                       lay_def.z_F[lf], lay_def.z_F[rf], lay_def.z_V[vtx])
            worst = max(worst, abs(mu_direct - field.mu[k, col]))
    assert worst < 1e-10


def test_beltrami_field_bound(square8):
    c, th, sol, lay = square8
    rng = np.random.default_rng(8)
    bu = FaceField.zeros(c)
    bu.values[~bu.free] = rng.uniform(-0.5, 0.5, (~bu.free).sum())
    rd = deform_radii(sol, bu, tol=1e-12)
    field = beltrami_field(c, sol.kites, rd.pattern.kites, lay)
    assert field.sup_abs_mu() < beltrami_modulus_bound(field.angle_floor)


def test_wp_indicators(square8):
    c, th, sol, lay = square8
    field0 = beltrami_field(c, sol.kites, sol.kites, lay)
    zero = wp_indicators(FaceField(np.full(c.num_faces, 1.0), ~c.boundary_faces), field0)
    assert (zero.sup_gradient, zero.energy) == (0.0, 0.0)
    assert zero.mu_l2_hyperbolic <= 1e-24

    bu = sample_boundary_faces(c, lay, lambda z: np.real(z * z), 0.3)
    rd = deform_radii(sol, bu, tol=1e-12)
    field = beltrami_field(c, sol.kites, rd.pattern.kites, lay)
    ind = wp_indicators(rd.u, field)
    # measured constants realize the L2 bound
    du = rd.u.values[field.edge_left] - rd.u.values[field.edge_right]
    nz = np.abs(du) > 0
    c1 = np.max(np.abs(field.mu[nz]) / np.abs(du[nz])[:, None])
    assert ind.mu_l2_hyperbolic <= 4 * c1 ** 2 * field.max_disk_area * ind.energy + 1e-12
    # doubling the differences quadruples the energy
    ind2 = wp_indicators(FaceField(2 * rd.u.values, rd.u.free), field)
    assert ind2.energy == pytest.approx(4 * ind.energy, rel=1e-12)
    assert ind2.sup_gradient == pytest.approx(2 * ind.sup_gradient, rel=1e-12)


# -- Hilbert transform --------------------------------------------------------------


def test_hilbert_constant_maps_to_zero(square8):
    c, th, sol, lay = square8
    ang = np.linspace(0, 2 * np.pi, 128, endpoint=False)
    out = hilbert_transform_theta(sol, lay, BoundarySample(ang, 0.4 * np.ones_like(ang)))
    assert np.max(np.abs(out.values)) < 1e-11
