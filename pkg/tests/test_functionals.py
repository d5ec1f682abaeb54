import math

import numpy as np
import pytest

from circlepatterns import (
    AdmissibilityGuard,
    AngleData,
    FaceField,
    InadmissibleStartError,
    KiteTable,
    LineSearchFailure,
    MaxIterationsError,
    VertexField,
    k_edge,
    kstar_edge,
    newton_solve,
    square_grid,
    uniformize,
    w_edge,
    wstar_edge,
)
from circlepatterns.functionals import (
    grad_w,
    grad_wstar,
    hessian_w,
    hessian_wstar,
    w_total,
    wstar_total,
)
from circlepatterns.pattern_engine import _AngleSumEnergy, _LobachevskyEnergy

SQRT3 = math.sqrt(3.0)


def make_grid(n=5, seed=0, amp=0.4):
    c = square_grid(n)
    th = AngleData.constant(c, np.pi / 2)
    rng = np.random.default_rng(seed)
    ref = FaceField(rng.uniform(-0.3, 0.3, c.num_faces), ~c.boundary_faces)
    u = FaceField(rng.uniform(-amp, amp, c.num_faces), ~c.boundary_faces)
    return c, th.theta, ref, u, rng


# -- W* edge functions ---------------------------------------------------------


def test_wstar_edge_zero_and_symmetry():
    assert wstar_edge(0.7, 0.7, 0.3, 1.1) == pytest.approx(0.0, abs=1e-14)
    rng = np.random.default_rng(1)
    for _ in range(100):
        a, b, rho = rng.uniform(-1, 1, 3)
        th = rng.uniform(0.1, np.pi - 0.1)
        assert wstar_edge(a, b, rho, th) == pytest.approx(
            wstar_edge(b, a, -rho, th), abs=1e-12)


def test_wstar_edge_derivative_matches_kstar():
    h = 1e-6
    rho, th = 0.0, np.pi / 2
    u1, u2 = 0.3, 0.0
    fd = (wstar_edge(u1 + h, u2, rho, th) - wstar_edge(u1 - h, u2, rho, th)) / (2 * h)
    assert fd == pytest.approx(kstar_edge(u1, u2, rho, th), abs=1e-6)


def test_kstar_edge_values_and_antisymmetry():
    assert kstar_edge(0.4, 0.4, 1.0, 2.0) == 0.0
    assert kstar_edge(math.log(SQRT3), 0.0, 0.0, np.pi / 2) == pytest.approx(
        2 * (np.pi / 4 - np.pi / 6), abs=1e-13)
    rng = np.random.default_rng(2)
    for _ in range(100):
        a, b, rho = rng.uniform(-1, 1, 3)
        th = rng.uniform(0.1, np.pi - 0.1)
        assert kstar_edge(a, b, rho, th) == pytest.approx(
            -kstar_edge(b, a, -rho, th), abs=1e-13)


def test_grad_wstar_zero_on_constants():
    c, theta, ref, _, _ = make_grid()
    for const in (0.0, 1.7):
        u = FaceField(np.full(c.num_faces, const), ~c.boundary_faces)
        g = grad_wstar(c, theta, ref, u)
        assert np.max(np.abs(g)) <= 1e-13


def test_grad_wstar_finite_differences():
    c, theta, ref, u, rng = make_grid(5)
    g = grad_wstar(c, theta, ref, u)
    h = 1e-5
    for f in rng.choice(c.num_faces, size=12, replace=False):
        up = u.copy()
        up.values[f] += h
        um = u.copy()
        um.values[f] -= h
        fd = (wstar_total(c, theta, ref, up) - wstar_total(c, theta, ref, um)) / (2 * h)
        assert fd == pytest.approx(g[f], abs=2e-6, rel=1e-5)


def test_hessian_wstar_is_dual_weight_laplacian():
    c, theta, ref, u, _ = make_grid(4)
    h = hessian_wstar(c, theta, ref, u).toarray()
    # independent assembly from scalar edge weights
    lap = np.zeros_like(h)
    log_r = ref.values + u.values
    for e in c.interior_edges:
        a, b = c.edge_left[e], c.edge_right[e]
        rho = log_r[a] - log_r[b]
        th = theta[e]
        w = 2 * math.exp(rho) * math.sin(th) / (1 + math.exp(2 * rho)
                                                - 2 * math.exp(rho) * math.cos(th))
        lap[a, a] += w
        lap[b, b] += w
        lap[a, b] -= w
        lap[b, a] -= w
    assert np.max(np.abs(h - lap)) <= 1e-14
    const = np.ones(c.num_faces)
    assert np.max(np.abs(h @ const)) <= 1e-13


def test_hessian_wstar_matches_gradient_differences():
    c, theta, ref, u, rng = make_grid(4, seed=5)
    hmat = hessian_wstar(c, theta, ref, u).toarray()
    step = 1e-5
    for _ in range(5):
        d = rng.standard_normal(c.num_faces)
        up = u.copy()
        up.values = u.values + step * d
        um = u.copy()
        um.values = u.values - step * d
        fd = (grad_wstar(c, theta, ref, up) - grad_wstar(c, theta, ref, um)) / (2 * step)
        hv = hmat @ d
        denom = max(1.0, np.max(np.abs(hv)))
        assert np.max(np.abs(fd - hv)) / denom < 1e-4


# -- W edge functions -----------------------------------------------------------


def test_w_edge_zero_and_derivative():
    assert w_edge(0.2, 0.2, 0.8, 0.9) == pytest.approx(0.0, abs=1e-14)
    h = 1e-6
    vi, vj, al, ar = 0.1, 0.25, 0.7, 0.9
    fd = (w_edge(vi, vj + h, al, ar) - w_edge(vi, vj - h, al, ar)) / (2 * h)
    assert fd == pytest.approx(-k_edge(vi, vj, al, ar), abs=1e-6)
    # second derivative equals minus the primal weight (larger step: the
    # second difference loses eps/h^2 to roundoff)
    h2 = 1e-4
    fd2 = (w_edge(vi, vj + h2, al, ar) - 2 * w_edge(vi, vj, al, ar)
           + w_edge(vi, vj - h2, al, ar)) / h2 ** 2
    d = 0.5 * (vj - vi)
    c = 0.5 * (1 / math.tan(al + d) + 1 / math.tan(ar - d))
    assert fd2 == pytest.approx(-c, rel=1e-4)
    assert fd2 < 0


def test_k_edge_closed_form_and_antisymmetry():
    assert k_edge(0.0, np.pi / 6, np.pi / 4, np.pi / 4) == pytest.approx(
        math.log(SQRT3), abs=1e-14)
    rng = np.random.default_rng(3)
    for _ in range(100):
        al = rng.uniform(0.3, 1.2)
        ar = rng.uniform(0.3, 1.2)
        dv = rng.uniform(-0.4, 0.4)
        assert k_edge(0.0, dv, al, ar) == pytest.approx(
            -k_edge(dv, 0.0, ar, al), abs=1e-13)


def test_w_edge_domain():
    with pytest.raises(ValueError):
        w_edge(0.0, 3.0, 0.3, 0.3)  # shifted angle far beyond the interval
    with pytest.raises(ValueError):
        k_edge(0.0, 0.6, 0.3, 0.3)  # right angle hits zero


def uniform_grid_pattern(n=4):
    c = square_grid(n)
    ang = AngleData.constant(c, np.pi / 2)
    sol = uniformize(c, ang, FaceField.from_boundary(c, 0.0), tol=1e-13)
    return c, ang, sol


def test_grad_w_zero_and_finite_differences():
    c, ang, sol = uniform_grid_pattern(5)
    v0 = VertexField.zeros(c)
    assert np.max(np.abs(grad_w(c, sol.kites, v0))) <= 1e-13
    rng = np.random.default_rng(4)
    v = VertexField(rng.uniform(-0.15, 0.15, c.num_vertices), ~c.boundary_vertices)
    g = grad_w(c, sol.kites, v)
    h = 1e-5
    for i in rng.choice(c.num_vertices, size=12, replace=False):
        vp = v.copy()
        vp.values[i] += h
        vm = v.copy()
        vm.values[i] -= h
        fd = (w_total(c, sol.kites, vp) - w_total(c, sol.kites, vm)) / (2 * h)
        assert fd == pytest.approx(g[i], abs=2e-6, rel=1e-5)


def test_hessian_w_negative_definite_on_free():
    c, ang, sol = uniform_grid_pattern(4)
    rng = np.random.default_rng(5)
    v = VertexField(rng.uniform(-0.1, 0.1, c.num_vertices), ~c.boundary_vertices)
    h = hessian_w(c, sol.kites, v).toarray()
    free = np.flatnonzero(v.free)
    sub = h[np.ix_(free, free)]
    eig = np.linalg.eigvalsh(sub)
    assert eig.max() < 0.0


def test_gauge_invariance_of_gradients():
    c, theta, ref, u, _ = make_grid(4, seed=7)
    g0 = grad_wstar(c, theta, ref, u)
    shifted = u.copy()
    shifted.values = u.values + 3.7
    g1 = grad_wstar(c, theta, ref, shifted)
    assert np.max(np.abs(g0 - g1)) <= 1e-12
    _, ang, sol = uniform_grid_pattern(4)
    rng = np.random.default_rng(8)
    cv = sol.complex
    v = VertexField(rng.uniform(-0.1, 0.1, cv.num_vertices), ~cv.boundary_vertices)
    gv0 = grad_w(cv, sol.kites, v)
    v.values = v.values - 2.9
    gv1 = grad_w(cv, sol.kites, v)
    assert np.max(np.abs(gv0 - gv1)) <= 1e-12


def test_convexity_concavity_along_segments():
    c, theta, ref, u, rng = make_grid(4, seed=9)
    free = np.flatnonzero(u.free)
    for _ in range(50):
        d = np.zeros(c.num_faces)
        d[free] = rng.standard_normal(free.size)
        vals = []
        for t in (-0.2, 0.0, 0.2):
            ut = u.copy()
            ut.values = u.values + t * d
            vals.append(wstar_total(c, theta, ref, ut))
        assert vals[0] + vals[2] - 2 * vals[1] >= -1e-10  # convex
    _, ang, sol = uniform_grid_pattern(4)
    cv = sol.complex
    freev = np.flatnonzero(~cv.boundary_vertices)
    base = VertexField.zeros(cv)
    for _ in range(50):
        d = np.zeros(cv.num_vertices)
        d[freev] = rng.standard_normal(freev.size)
        d *= 0.05 / max(1e-9, np.max(np.abs(d)))
        vals = [w_total(cv, sol.kites, VertexField(base.values + t * d, base.free))
                for t in (-1.0, 0.0, 1.0)]
        assert vals[0] + vals[2] - 2 * vals[1] <= 1e-10  # concave


# -- Newton solver ----------------------------------------------------------------


def test_newton_starts_at_solution():
    c = square_grid(5)
    ang = AngleData.constant(c, np.pi / 2)
    energy = _AngleSumEnergy(c, ang.theta)
    x0 = np.zeros(c.num_faces)
    x, rep = newton_solve(energy, x0, ~c.boundary_faces, tol=1e-10)
    assert rep.iterations <= 1
    assert np.array_equal(x, x0)
    assert rep.converged


def test_newton_grid_7x7_random_boundary():
    c = square_grid(7)
    ang = AngleData.constant(c, np.pi / 2)
    rng = np.random.default_rng(10)
    bnd = FaceField.zeros(c)
    bnd.values[~bnd.free] = rng.uniform(-0.2, 0.2, (~bnd.free).sum())
    energy = _AngleSumEnergy(c, ang.theta)
    x0 = bnd.values.copy()
    x, rep = newton_solve(energy, x0, bnd.free, tol=1e-10)
    assert rep.converged and rep.gradient_norm < 1e-10
    assert rep.iterations <= 20


def test_newton_monotone_line_search():
    c = square_grid(7)
    ang = AngleData.constant(c, np.pi / 2)
    rng = np.random.default_rng(11)
    bnd = FaceField.zeros(c)
    bnd.values[~bnd.free] = rng.uniform(-0.5, 0.5, (~bnd.free).sum())
    energy = _AngleSumEnergy(c, ang.theta)
    _, rep = newton_solve(energy, bnd.values.copy(), bnd.free, tol=1e-10)
    energies = [e for _, e in rep.steps]
    assert all(b < a for a, b in zip(energies, energies[1:])) or len(energies) <= 1


def test_newton_guard_keeps_iterates_admissible():
    c, ang, sol = uniform_grid_pattern(6)
    kites = sol.kites
    guard = AdmissibilityGuard(c, kites)
    rng = np.random.default_rng(12)
    # scale random boundary data until the harmonic start sits 1e-3 from
    # the admissibility boundary
    from circlepatterns.pattern_engine import combinatorial_harmonic_interior

    raw = rng.uniform(-1.0, 1.0, c.num_vertices)
    bnd = VertexField.zeros(c)
    fixed = ~bnd.free

    def min_slack(scale):
        vals = bnd.values.copy()
        vals[fixed] = scale * raw[fixed]
        start = combinatorial_harmonic_interior(c, vals, bnd.free, "vertices")
        ie = c.interior_edges
        d = 0.5 * (start[c.edge_head[ie]] - start[c.edge_tail[ie]])
        return min((kites.alpha_left[ie] + d).min(), (kites.alpha_right[ie] - d).min()), start

    lo, hi = 0.0, 4.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        s, _ = min_slack(mid)
        if s > 1e-3:
            lo = mid
        else:
            hi = mid
    scale = lo
    s, start = min_slack(scale)
    assert 0 < s < 2e-3
    bnd.values[fixed] = scale * raw[fixed]

    energy = _LobachevskyEnergy(c, kites)

    class InstrumentedGuard(AdmissibilityGuard):
        def max_step(self, x, dx):
            assert self.admissible(x)
            return super().max_step(x, dx)

    g = InstrumentedGuard(c, kites)
    x, rep = newton_solve(energy, start, bnd.free, sense="maximize", guard=g, tol=1e-10)
    assert rep.converged
    assert g.admissible(x)


def test_newton_inadmissible_start():
    c, ang, sol = uniform_grid_pattern(4)
    guard = AdmissibilityGuard(c, sol.kites)
    energy = _LobachevskyEnergy(c, sol.kites)
    bad = np.zeros(c.num_vertices)
    e = int(c.interior_edges[0])
    bad[c.edge_head[e]] = 4.0  # pushes a shifted angle past pi and below 0
    with pytest.raises(InadmissibleStartError):
        newton_solve(energy, bad, ~c.boundary_vertices, sense="maximize", guard=guard)


def test_newton_max_iterations():
    c = square_grid(6)
    ang = AngleData.constant(c, np.pi / 2)
    rng = np.random.default_rng(13)
    bnd = FaceField.zeros(c)
    bnd.values[~bnd.free] = rng.uniform(-0.8, 0.8, (~bnd.free).sum())
    energy = _AngleSumEnergy(c, ang.theta)
    with pytest.raises(MaxIterationsError):
        newton_solve(energy, bnd.values.copy(), bnd.free, tol=1e-14, max_iter=1)
