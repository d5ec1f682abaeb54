"""High-level circle pattern workflows.

``uniformize`` solves the angle-sum equation (sum of half-angles pi at
every free circumcenter) for prescribed boundary radii by convex
minimization in log-radius coordinates.  ``deform_radii`` and
``deform_angles`` move a solved pattern by boundary data in the two
conjugate coordinate systems; ``conjugate_u_to_v`` passes between them.
``layout`` develops a pattern into the plane by gluing kites over the
dual graph and records the gluing residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cell_complex import AngleData, DiskComplex
from .functionals import (
    AdmissibilityGuard,
    FaceField,
    SolveReport,
    VertexField,
    dual_weights,
    graph_laplacian,
    grad_w,
    half_angle,
    hessian_w,
    im_dilog,
    newton_solve,
    w_total,
)
from .kite_geometry import KiteTable, center_distance

TWO_PI = 2.0 * np.pi


class InadmissibleBoundaryError(RuntimeError):
    """No strictly admissible extension of the boundary angle data."""


class ClosednessFailure(RuntimeError):
    """Integrated 1-form disagrees with the prescription on co-tree edges."""


@dataclass
class PatternSolution:
    """A solved circle pattern: radii, kite table, angle-sum residual."""

    complex: DiskComplex
    angles: AngleData
    radii: np.ndarray
    kites: KiteTable
    residual: float
    report: SolveReport | None = None

    @property
    def log_radii(self) -> np.ndarray:
        return np.log(self.radii)


@dataclass
class Layout:
    """Planar development: circumcenters, intersection points, residuals.

    Vertices not touched by any kite have undefined (NaN) positions.
    ``free_wedges`` counts direction choices not determined by kites
    (possible on exotic complexes; zero for the generated meshes).
    """

    z_V: np.ndarray
    z_F: np.ndarray
    gluing_residual: float
    diameter: float
    free_wedges: int = 0


def mean_normalize(values: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    """Shift so the (masked) mean is zero; gauge companion to root pinning."""
    sel = values if mask is None else values[mask]
    return values - float(np.mean(sel))


def angle_sums(complex_: DiskComplex, theta: np.ndarray, log_radii: np.ndarray) -> np.ndarray:
    """Total angle 2*sum(alpha) at each circumcenter (NaN-free faces only
    get contributions from their interior edges)."""
    ie = complex_.interior_edges
    rho = log_radii[complex_.edge_left[ie]] - log_radii[complex_.edge_right[ie]]
    th = theta[ie]
    a_left = half_angle(rho, th)
    a_right = half_angle(-rho, th)
    sums = np.zeros(complex_.num_faces)
    np.add.at(sums, complex_.edge_left[ie], 2.0 * a_left)
    np.add.at(sums, complex_.edge_right[ie], 2.0 * a_right)
    return sums


def pattern_residual(complex_: DiskComplex, theta: np.ndarray, log_radii: np.ndarray,
                     free: np.ndarray | None = None) -> float:
    """Max deviation of the circumcenter angle sum from 2*pi on free faces."""
    if free is None:
        free = ~complex_.boundary_faces
    if not free.any():
        return 0.0
    return float(np.max(np.abs(angle_sums(complex_, theta, log_radii)[free] - TWO_PI)))


class _AngleSumEnergy:
    """Convex energy in log radii whose gradient is 2*pi minus the
    circumcenter angle sum; Hessian is the dual-weight Laplacian."""

    def __init__(self, complex_: DiskComplex, theta: np.ndarray):
        self.c = complex_
        self.theta = theta
        ie = complex_.interior_edges
        self.lf = complex_.edge_left[ie]
        self.rf = complex_.edge_right[ie]
        self.th = theta[ie]
        lin = np.full(complex_.num_faces, TWO_PI)
        np.add.at(lin, self.lf, -(np.pi - self.th))
        np.add.at(lin, self.rf, -(np.pi - self.th))
        self.lin = lin

    def value(self, ell: np.ndarray) -> float:
        x = ell[self.lf] - ell[self.rf]
        return float(np.sum(im_dilog(x, self.th) + im_dilog(-x, self.th)) + self.lin @ ell)

    def gradient(self, ell: np.ndarray) -> np.ndarray:
        return TWO_PI - angle_sums(self.c, self.theta, ell)

    def hessian(self, ell: np.ndarray):
        w = dual_weights(self.c, self.theta, ell)
        return graph_laplacian(self.c.num_faces, self.lf, self.rf, w)


def combinatorial_harmonic_interior(complex_: DiskComplex, values: np.ndarray,
                                    free: np.ndarray, on: str) -> np.ndarray:
    """Replace free entries by the combinatorial harmonic extension of the
    fixed ones (smooth initial guesses for the solvers)."""
    import scipy.sparse.linalg as spla

    ie = complex_.interior_edges
    if on == "faces":
        a, b, n = complex_.edge_left[ie], complex_.edge_right[ie], complex_.num_faces
    else:
        a, b, n = complex_.edge_tail[ie], complex_.edge_head[ie], complex_.num_vertices
    lap = graph_laplacian(n, a, b, np.ones(len(ie)))
    out = values.copy()
    idx = np.flatnonzero(free)
    if idx.size == 0:
        return out
    sub = lap[idx][:, idx].tocsc()
    rhs = -(lap[idx] @ np.where(free, 0.0, values))
    # isolated free nodes (no interior edges) keep their value
    diag = sub.diagonal()
    if np.any(diag == 0.0):
        import scipy.sparse as sp

        sub = sub + sp.diags((diag == 0.0).astype(float))
    out[idx] = spla.spsolve(sub, rhs)
    return out


def uniformize(complex_: DiskComplex, angles: AngleData, boundary_log_radii: FaceField,
               tol: float = 1e-12, max_iter: int = 200) -> PatternSolution:
    """Solve the angle-sum equation with prescribed boundary radii.

    ``boundary_log_radii`` fixes log radii on its non-free entries; free
    entries are initialised by harmonic extension and solved for.
    """
    theta = angles.theta
    if boundary_log_radii.free.all():
        raise ValueError("at least one face must be fixed (scale gauge)")
    ell0 = combinatorial_harmonic_interior(
        complex_, boundary_log_radii.values, boundary_log_radii.free, "faces")
    energy = _AngleSumEnergy(complex_, theta)
    ell, report = newton_solve(energy, ell0, boundary_log_radii.free,
                               sense="minimize", tol=tol, max_iter=max_iter)
    radii = np.exp(ell)
    kites = KiteTable.from_radii(complex_, theta, radii)
    res = pattern_residual(complex_, theta, ell, boundary_log_radii.free)
    return PatternSolution(complex_, angles, radii, kites, res, report)


def pattern_from_radii(complex_: DiskComplex, angles: AngleData, radii: np.ndarray) -> PatternSolution:
    """Wrap stored radii as a PatternSolution (recomputing the residual)."""
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0) or not np.all(np.isfinite(radii)):
        raise ValueError("radii must be positive and finite")
    kites = KiteTable.from_radii(complex_, angles.theta, radii)
    res = pattern_residual(complex_, angles.theta, np.log(radii))
    return PatternSolution(complex_, angles, radii, kites, res, None)


@dataclass
class RadialDeformation:
    """Result of a log-radius deformation: the field, the new pattern and
    the combinatorial Dirichlet energy of the field."""

    u: FaceField
    pattern: PatternSolution
    dirichlet_energy: float
    report: SolveReport


def deform_radii(ref: PatternSolution, boundary_u: FaceField,
                 tol: float = 1e-11, max_iter: int = 200) -> RadialDeformation:
    """Deform a solved pattern by boundary log-radius data.

    Interior values minimize the relative volume along the slice with the
    given boundary; equivalently the new radii e^u R solve the angle-sum
    equation again.
    """
    c = ref.complex
    if not np.all(np.isfinite(boundary_u.values[~boundary_u.free])):
        raise ValueError("boundary log-radius data must be finite")
    base = ref.log_radii
    bnd = boundary_u.copy()
    bnd.values = base + boundary_u.values
    sol = uniformize(c, ref.angles, bnd, tol=tol, max_iter=max_iter)
    u_vals = sol.log_radii - base
    u = FaceField(u_vals, boundary_u.free.copy())
    ie = c.interior_edges
    du = u_vals[c.edge_left[ie]] - u_vals[c.edge_right[ie]]
    return RadialDeformation(u=u, pattern=sol, dirichlet_energy=float(du @ du),
                             report=sol.report)


class _LobachevskyEnergy:
    def __init__(self, complex_: DiskComplex, kites: KiteTable):
        self.c = complex_
        self.kites = kites

    def value(self, x: np.ndarray) -> float:
        return w_total(self.c, self.kites, x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return grad_w(self.c, self.kites, x)

    def hessian(self, x: np.ndarray):
        return hessian_w(self.c, self.kites, x)


@dataclass
class AngularDeformation:
    """Result of a central-angle deformation."""

    v: VertexField
    holonomy_residual: float
    report: SolveReport


def _admissible_start(c: DiskComplex, kites: KiteTable, boundary_v: VertexField) -> np.ndarray:
    guard = AdmissibilityGuard(c, kites)
    start = combinatorial_harmonic_interior(c, boundary_v.values, boundary_v.free, "vertices")
    if guard.admissible(start):
        return start
    # flatten the free part toward the boundary mean, keeping the boundary
    fixed = ~boundary_v.free
    mean = float(np.mean(boundary_v.values[fixed])) if fixed.any() else 0.0
    for t in (0.5, 0.25, 0.1, 0.01, 0.0):
        cand = start.copy()
        cand[boundary_v.free] = mean + t * (start[boundary_v.free] - mean)
        if guard.admissible(cand):
            return cand
    raise InadmissibleBoundaryError(
        "no strictly admissible extension of the boundary data was found")


def deform_angles(ref: PatternSolution, boundary_v: VertexField,
                  tol: float = 1e-11, max_iter: int = 200) -> AngularDeformation:
    """Deform a solved pattern by boundary central-angle data.

    Interior values maximize the Lobachevsky energy on the admissible
    slice; at the maximizer the scaling holonomy around every free vertex
    vanishes and all shifted half-angles stay strictly inside (0, pi).
    """
    c = ref.complex
    if boundary_v.free.all():
        raise ValueError("at least one vertex must be fixed (rotation gauge)")
    if not np.all(np.isfinite(boundary_v.values[~boundary_v.free])):
        raise ValueError("boundary angle data must be finite")
    kites = ref.kites
    x0 = _admissible_start(c, kites, boundary_v)
    energy = _LobachevskyEnergy(c, kites)
    guard = AdmissibilityGuard(c, kites)
    x, report = newton_solve(energy, x0, boundary_v.free, sense="maximize",
                             guard=guard, tol=tol, max_iter=max_iter)
    v = VertexField(x, boundary_v.free.copy())
    g = grad_w(c, kites, v)
    res = float(np.max(np.abs(g[boundary_v.free]))) if boundary_v.free.any() else 0.0
    return AngularDeformation(v=v, holonomy_residual=res, report=report)


# -- conjugation and tree integration ---------------------------------------


def _interior_bfs_tree(c: DiskComplex, on: str, root: int | None):
    """Breadth-first spanning forest of the interior-edge graph.

    Returns (order, parent_edge, sign, reachable) where traversing
    parent_edge with the given sign moves from the parent node to the
    node, plus the list of co-tree edges.
    """
    ie = c.interior_edges
    if on == "vertices":
        a, b, n = c.edge_tail[ie], c.edge_head[ie], c.num_vertices
    else:
        a, b, n = c.edge_left[ie], c.edge_right[ie], c.num_faces
    adj: list[list[tuple[int, int, float]]] = [[] for _ in range(n)]
    for k, e in enumerate(ie):
        adj[a[k]].append((int(b[k]), int(e), +1.0))
        adj[b[k]].append((int(a[k]), int(e), -1.0))
    if root is None:
        candidates = np.flatnonzero([len(x) > 0 for x in adj])
        if candidates.size == 0:
            raise ValueError("complex has no interior edges")
        root = int(candidates[0])
    order = [root]
    parent = {root: None}
    tree_edges = set()
    queue = [root]
    while queue:
        node = queue.pop(0)
        for nbr, e, s in adj[node]:
            if nbr not in parent:
                parent[nbr] = (node, e, s)
                tree_edges.add(e)
                order.append(nbr)
                queue.append(nbr)
    cotree = [int(e) for e in ie if int(e) not in tree_edges]
    return order, parent, cotree, root


def _integrate_tree(c: DiskComplex, on: str, delta: dict[int, float], root: int | None):
    """Integrate per-edge differences over a spanning tree; returns the
    values (zero at the root and on unreachable nodes), the co-tree
    closedness residual and the reachability mask."""
    order, parent, cotree, root = _interior_bfs_tree(c, on, root)
    n = c.num_vertices if on == "vertices" else c.num_faces
    vals = np.zeros(n)
    reach = np.zeros(n, dtype=bool)
    for node in order:
        reach[node] = True
        info = parent[node]
        if info is None:
            continue
        par, e, s = info
        vals[node] = vals[par] + s * delta[e]
    res = 0.0
    ends = (c.edge_tail, c.edge_head) if on == "vertices" else (c.edge_left, c.edge_right)
    for e in cotree:
        a, b = int(ends[0][e]), int(ends[1][e])
        res = max(res, abs(vals[b] - vals[a] - delta[e]))
    return vals, float(res), reach


@dataclass
class ConjugateResult:
    """Vertex data conjugate to a log-radius deformation."""

    v: VertexField
    closedness_residual: float
    holonomy_residual: float
    reachable: np.ndarray


def conjugate_u_to_v(ref: PatternSolution, u: FaceField, root: int | None = None,
                     closedness_tol: float = 1e-9) -> ConjugateResult:
    """Integrate the central-angle data conjugate to ``u``.

    Per oriented interior edge the conjugate satisfies
    v_head - v_tail = 2 (alpha_deformed - alpha_reference) at the left
    face.  The prescription is closed exactly when both patterns solve
    the angle-sum equation; the co-tree residual certifies this and a
    violation raises ``ClosednessFailure``.
    """
    c = ref.complex
    ie = c.interior_edges
    th = ref.angles.theta[ie]
    rho = ref.log_radii[c.edge_left[ie]] - ref.log_radii[c.edge_right[ie]]
    x = u.values[c.edge_left[ie]] - u.values[c.edge_right[ie]]
    dv = 2.0 * (half_angle(rho + x, th) - half_angle(rho, th))
    delta = {int(e): float(d) for e, d in zip(ie, dv)}
    vals, res, reach = _integrate_tree(c, "vertices", delta, root)
    if res > closedness_tol:
        raise ClosednessFailure(
            f"conjugate data is not closed: co-tree residual {res:.3e} > {closedness_tol:.1e}")
    v = VertexField(vals, ~c.boundary_vertices)
    g = grad_w(c, ref.kites, v)
    interior = np.flatnonzero(~c.boundary_vertices)
    hres = float(np.max(np.abs(g[interior]))) if interior.size else 0.0
    return ConjugateResult(v=v, closedness_residual=res, holonomy_residual=hres,
                           reachable=reach)


def pattern_from_angles(ref: PatternSolution, v: VertexField, root_face: int | None = None,
                        closedness_tol: float = 1e-9) -> tuple[PatternSolution, float]:
    """Rebuild a pattern from central-angle data.

    Radii are integrated over a dual spanning tree from the sine law
    log R_right - log R_left = log(sin a_left / sin a_right) at the
    shifted angles, pinned to the reference radius at the root face.
    """
    c = ref.complex
    ie = c.interior_edges
    d = 0.5 * (v.values[c.edge_head[ie]] - v.values[c.edge_tail[ie]])
    a = ref.kites.alpha_left[ie] + d
    b = ref.kites.alpha_right[ie] - d
    if np.any(a <= 0) or np.any(b <= 0):
        raise InadmissibleBoundaryError("angle data leaves the admissible set")
    dlog = np.log(np.sin(a) / np.sin(b))  # log R_right - log R_left
    delta = {int(e): float(x) for e, x in zip(ie, dlog)}
    vals, res, reach = _integrate_tree(c, "faces", delta, root_face)
    if res > closedness_tol:
        raise ClosednessFailure(
            f"angle data is not closed: co-tree residual {res:.3e} > {closedness_tol:.1e}")
    order, parent, _, root = _interior_bfs_tree(c, "faces", root_face)
    ell = vals + ref.log_radii[root]
    radii = np.exp(ell)
    kites = KiteTable.from_radii(c, ref.angles.theta, radii)
    resid = pattern_residual(c, ref.angles.theta, ell)
    sol = PatternSolution(c, ref.angles, radii, kites, resid, None)
    return sol, res


def harmonic_conjugate_tangent(c: DiskComplex, weights, w: FaceField,
                               root: int | None = None, harmonic_tol: float = 1e-8,
                               closedness_tol: float = 1e-8) -> tuple[VertexField, float]:
    """Harmonic conjugate of a dual-harmonic face field.

    The conjugate satisfies w~_head - w~_tail = c*(w_right - w_left) per
    interior edge and is integrated over a spanning tree; its Dirichlet
    energy with primal weights equals the input's with dual weights.
    """
    ie = c.interior_edges
    cd = weights.c_dual[ie]
    diff = w.values[c.edge_right[ie]] - w.values[c.edge_left[ie]]
    lap = np.zeros(c.num_faces)
    np.add.at(lap, c.edge_left[ie], cd * diff)
    np.add.at(lap, c.edge_right[ie], -cd * diff)
    free = w.free
    if free.any() and float(np.max(np.abs(lap[free]))) > harmonic_tol:
        raise ValueError(
            f"input is not discrete harmonic (residual {np.max(np.abs(lap[free])):.3e})")
    delta = {int(e): float(x) for e, x in zip(ie, cd * diff)}
    vals, res, _ = _integrate_tree(c, "vertices", delta, root)
    if res > closedness_tol:
        raise ClosednessFailure(
            f"conjugate 1-form is not closed: co-tree residual {res:.3e}")
    return VertexField(vals, ~c.boundary_vertices), res


def harmonic_conjugate_vertex(c: DiskComplex, weights, v: VertexField,
                              root_face: int | None = None, harmonic_tol: float = 1e-8,
                              closedness_tol: float = 1e-8) -> tuple[FaceField, float]:
    """Harmonic conjugate of a primal-harmonic vertex field.

    Orientation follows the quarter-turn of the crossing rule, so
    conjugating twice returns the negative of the original field up to an
    additive constant.
    """
    ie = c.interior_edges
    cp = weights.c_primal[ie]
    diff = v.values[c.edge_head[ie]] - v.values[c.edge_tail[ie]]
    lap = np.zeros(c.num_vertices)
    np.add.at(lap, c.edge_tail[ie], cp * diff)
    np.add.at(lap, c.edge_head[ie], -cp * diff)
    free = v.free
    if free.any() and float(np.max(np.abs(lap[free]))) > harmonic_tol:
        raise ValueError(
            f"input is not discrete harmonic (residual {np.max(np.abs(lap[free])):.3e})")
    # x_right - x_left = c * (v_tail - v_head)
    delta = {int(e): float(x) for e, x in zip(ie, -cp * diff)}
    vals, res, _ = _integrate_tree(c, "faces", delta, root_face)
    if res > closedness_tol:
        raise ClosednessFailure(
            f"conjugate 1-form is not closed: co-tree residual {res:.3e}")
    return FaceField(vals, ~c.boundary_faces), res


# -- planar development ------------------------------------------------------


def layout(c: DiskComplex, pattern: PatternSolution, seed_edge: int | None = None) -> Layout:
    """Develop the pattern into the plane by gluing kites over the dual graph.

    The seed kite is placed canonically: the left circumcenter at the
    origin and the shared chord along the positive real axis.  Every node
    position is the average of all its kite placements and the maximum
    spread is recorded as the gluing residual.  Embeddedness is not
    guaranteed.
    """
    ie = c.interior_edges
    if len(ie) == 0:
        return Layout(np.full(c.num_vertices, np.nan, dtype=complex),
                      np.full(c.num_faces, np.nan, dtype=complex), 0.0, 0.0, 0)
    if seed_edge is None:
        seed_edge = int(ie[0])
    elif c.edge_boundary[seed_edge]:
        raise ValueError("seed edge must be interior")

    radii = pattern.radii
    th = pattern.angles.theta
    kt = pattern.kites
    dist = np.full(c.num_edges, np.nan)
    dist[ie] = center_distance(radii[c.edge_left[ie]], radii[c.edge_right[ie]], th[ie])

    def alpha_at(face: int, e: int) -> float:
        return kt.alpha_left[e] if c.edge_left[e] == face else kt.alpha_right[e]

    # per-face slot of each edge in the face cycle
    slot = [dict() for _ in range(c.num_faces)]
    for f in range(c.num_faces):
        for pos, (e, _) in enumerate(c.face_edges[f]):
            slot[f][e] = pos

    dirs: list[dict[int, float]] = [dict() for _ in range(c.num_faces)]  # edge -> direction
    z_f = np.full(c.num_faces, np.nan + 0j, dtype=complex)
    placed = np.zeros(c.num_faces, dtype=bool)
    free_wedges = 0

    from collections import deque

    seed_face = int(c.edge_left[seed_edge])
    z_f[seed_face] = 0.0 + 0.0j
    placed[seed_face] = True
    dirs[seed_face][seed_edge] = -np.pi / 2.0
    work = deque([(seed_face, seed_edge)])
    pending = set(int(e) for e in ie)

    def propagate(f: int, e: int):
        # sweep the face cycle in both directions through interior runs
        ring = c.face_edges[f]
        n = len(ring)
        pos = slot[f][e]
        for step in (1, -1):
            p = pos
            while True:
                q = (p + step) % n
                e_p, e_q = ring[p][0], ring[q][0]
                if c.edge_boundary[e_q] or e_q in dirs[f]:
                    break
                inc = alpha_at(f, e_p) + alpha_at(f, e_q)
                dirs[f][e_q] = dirs[f][e_p] + step * inc
                work.append((f, e_q))
                p = q

    while True:
        while work:
            f, e = work.popleft()
            pending.discard(e)
            propagate(f, e)
            g = int(c.edge_right[e]) if int(c.edge_left[e]) == f else int(c.edge_left[e])
            if e not in dirs[g]:
                dirs[g][e] = dirs[f][e] + np.pi
                if not placed[g]:
                    z_f[g] = z_f[f] + dist[e] * np.exp(1j * dirs[f][e])
                    placed[g] = True
                work.append((g, e))
        # restart at an undirected edge on a placed face (free wedge)
        rest = [e for e in pending if placed[c.edge_left[e]] or placed[c.edge_right[e]]]
        if not rest:
            break
        e = min(rest)
        f = int(c.edge_left[e]) if placed[c.edge_left[e]] else int(c.edge_right[e])
        dirs[f][e] = -np.pi / 2.0
        free_wedges += 1
        work.append((f, e))

    # accumulate kite placements and average
    acc_f = np.zeros(c.num_faces, dtype=complex)
    cnt_f = np.zeros(c.num_faces)
    acc_v = np.zeros(c.num_vertices, dtype=complex)
    cnt_v = np.zeros(c.num_vertices)
    spread_f: list[list[complex]] = [[] for _ in range(c.num_faces)]
    spread_v: list[list[complex]] = [[] for _ in range(c.num_vertices)]

    for f in range(c.num_faces):
        if placed[f]:
            acc_f[f] += z_f[f]
            cnt_f[f] += 1
            spread_f[f].append(z_f[f])
    for e in ie:
        e = int(e)
        ti, hj = int(c.edge_tail[e]), int(c.edge_head[e])
        for f, other in ((int(c.edge_left[e]), int(c.edge_right[e])),
                         (int(c.edge_right[e]), int(c.edge_left[e]))):
            if e not in dirs[f] or not placed[f]:
                continue
            d = dirs[f][e]
            a = alpha_at(f, e)
            r = radii[f]
            zc = z_f[f] + dist[e] * np.exp(1j * d)
            acc_f[other] += zc
            cnt_f[other] += 1
            spread_f[other].append(zc)
            if c.edge_left[e] == f:
                zt = z_f[f] + r * np.exp(1j * (d - a))
                zh = z_f[f] + r * np.exp(1j * (d + a))
            else:
                zt = z_f[f] + r * np.exp(1j * (d + a))
                zh = z_f[f] + r * np.exp(1j * (d - a))
            acc_v[ti] += zt
            cnt_v[ti] += 1
            spread_v[ti].append(zt)
            acc_v[hj] += zh
            cnt_v[hj] += 1
            spread_v[hj].append(zh)

    with np.errstate(invalid="ignore"):
        mean_f = np.where(cnt_f > 0, acc_f / np.maximum(cnt_f, 1), np.nan + 0j)
        mean_v = np.where(cnt_v > 0, acc_v / np.maximum(cnt_v, 1), np.nan + 0j)
    residual = 0.0
    for mean, spreads in ((mean_f, spread_f), (mean_v, spread_v)):
        for k, pts in enumerate(spreads):
            for p in pts:
                residual = max(residual, abs(p - mean[k]))
    finite = mean_v[np.isfinite(mean_v)]
    diameter = 0.0
    if finite.size:
        diameter = float(max(np.ptp(finite.real), np.ptp(finite.imag)))
    return Layout(z_V=mean_v, z_F=mean_f, gluing_residual=float(residual),
                  diameter=diameter, free_wedges=free_wedges)


def embeddedness_check(l: Layout, c: DiskComplex, eps: float = 1e-12):
    """Pairwise open-overlap test of the face polygons.

    Returns (embedded flag, list of face index pairs whose interiors
    overlap by more than ``eps`` relative to the smaller face).  Faces
    with fewer than three placed corners are skipped.
    """
    from shapely.geometry import Polygon
    from shapely.strtree import STRtree

    polys = []
    ids = []
    for f, loop in enumerate(c.faces):
        pts = [(l.z_V[v].real, l.z_V[v].imag) for v in loop if np.isfinite(l.z_V[v])]
        if len(pts) < 3:
            continue
        poly = Polygon(pts)
        if poly.area <= 0 or not poly.is_valid:
            poly = poly.buffer(0)
            if poly.is_empty:
                continue
        polys.append(poly)
        ids.append(f)
    tree = STRtree(polys)
    overlaps = []
    for a_idx, poly in enumerate(polys):
        for b_idx in tree.query(poly):
            b_idx = int(b_idx)
            if b_idx <= a_idx:
                continue
            inter = poly.intersection(polys[b_idx])
            if inter.is_empty:
                continue
            min_area = min(poly.area, polys[b_idx].area)
            if inter.area > eps * min_area:
                overlaps.append((ids[a_idx], ids[b_idx]))
    return (len(overlaps) == 0, overlaps)


def similarity_align(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, complex, complex]:
    """Least-squares alignment of complex point sets by rotation, scaling
    and translation (no reflection); returns (aligned src, scale*rot, shift)."""
    mask = np.isfinite(src) & np.isfinite(dst)
    s, d = src[mask], dst[mask]
    sm, dm = s.mean(), d.mean()
    denom = np.vdot(s - sm, s - sm).real
    w = np.vdot(s - sm, d - dm) / denom  # vdot conjugates the first argument
    aligned = np.where(mask, w * (src - sm) + dm, np.nan + 0j)
    return aligned, w, dm - w * sm
