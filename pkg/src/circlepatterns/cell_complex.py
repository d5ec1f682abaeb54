"""Finite disk-type cell complexes with primal/dual incidence.

A complex is stored as dense integer arrays: every edge carries a tail
vertex, a head vertex, a left face and a right face.  Boundary edges have
no right face (index -1).  Faces are counterclockwise vertex loops; the
rotation system around vertices is derived from the face loops by corner
linking.  Instances are immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

# Angle sums at interior vertices are checked exactly up to accumulated
# floating point roundoff.
VERTEX_SUM_TOL = 1e-12


@dataclass
class ValidationReport:
    """Outcome of a structural or angle-data check."""

    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str) -> None:
        self.violations.append(message)

    def __bool__(self) -> bool:  # truthy iff valid
        return self.ok


class DiskComplex:
    """Cell decomposition of a closed disk with boundary marking.

    Parameters
    ----------
    num_vertices:
        Number of vertices; faces index into ``range(num_vertices)``.
    faces:
        One counterclockwise vertex loop per face.
    max_degree:
        Configured bound on vertex and face degrees.
    """

    def __init__(self, num_vertices: int, faces: list[list[int]], max_degree: int = 24):
        self.num_vertices = int(num_vertices)
        self.faces = [list(map(int, loop)) for loop in faces]
        self.num_faces = len(self.faces)
        self.max_degree = int(max_degree)
        self._build_edges()
        self._build_rotations()

    # -- construction -------------------------------------------------

    def _build_edges(self) -> None:
        edge_index: dict[tuple[int, int], int] = {}
        tail, head, left, right, count = [], [], [], [], []
        # face_edges[f] lists (edge id, forward) around the face; forward is
        # True when the stored tail->head direction matches the loop.
        self.face_edges: list[list[tuple[int, bool]]] = []
        for f, loop in enumerate(self.faces):
            ring = []
            n = len(loop)
            for k in range(n):
                a, b = loop[k], loop[(k + 1) % n]
                if a == b:
                    raise ValueError(f"face {f} repeats vertex {a} consecutively")
                key = (min(a, b), max(a, b))
                if key not in edge_index:
                    edge_index[key] = len(tail)
                    tail.append(a)
                    head.append(b)
                    left.append(f)
                    right.append(-1)
                    count.append(1)
                    ring.append((edge_index[key], True))
                else:
                    e = edge_index[key]
                    count[e] += 1
                    if right[e] == -1:
                        right[e] = f
                    ring.append((e, (tail[e], head[e]) == (a, b)))
            self.face_edges.append(ring)
        self.edge_face_count = np.asarray(count, dtype=np.int64)
        self.num_edges = len(tail)
        self.edge_tail = np.asarray(tail, dtype=np.int64)
        self.edge_head = np.asarray(head, dtype=np.int64)
        self.edge_left = np.asarray(left, dtype=np.int64)
        self.edge_right = np.asarray(right, dtype=np.int64)
        self.edge_boundary = self.edge_right == -1
        self.interior_edges = np.flatnonzero(~self.edge_boundary & (self.edge_right >= 0))

        bf = np.zeros(self.num_faces, dtype=bool)
        bv = np.zeros(self.num_vertices, dtype=bool)
        for e in np.flatnonzero(self.edge_boundary):
            bf[self.edge_left[e]] = True
            bv[self.edge_tail[e]] = True
            bv[self.edge_head[e]] = True
        self.boundary_faces = bf
        self.boundary_vertices = bv

    def _build_rotations(self) -> None:
        # Corner linking: in a ccw face loop ... u -> v -> w ... the edge vw
        # is the counterclockwise predecessor of uv around v, i.e. rotating
        # ccw from vw reaches vu across the face interior.
        self.vertex_edges: list[list[int]] = [[] for _ in range(self.num_vertices)]
        nxt: list[dict[int, int]] = [dict() for _ in range(self.num_vertices)]
        corner_face: list[dict[int, int]] = [dict() for _ in range(self.num_vertices)]
        for f, loop in enumerate(self.faces):
            ring = self.face_edges[f]
            n = len(loop)
            for k in range(n):
                e_in = ring[k][0]            # edge loop[k] -> loop[k+1]
                e_out = ring[(k + 1) % n][0]  # edge loop[k+1] -> loop[k+2]
                v = loop[(k + 1) % n]
                nxt[v][e_out] = e_in
                corner_face[v][e_out] = f
        self._corner_next = nxt
        self._corner_face = corner_face
        for v in range(self.num_vertices):
            links = nxt[v]
            if not links:
                continue
            incident = set(links.keys()) | set(links.values())
            if self.boundary_vertices[v]:
                # open fan: start from the edge that is nobody's successor
                starts = incident - set(links.values())
                start = min(starts) if starts else min(incident)
            else:
                start = min(incident)
            order = [start]
            seen = {start}
            cur = start
            while cur in links and links[cur] not in seen:
                cur = links[cur]
                order.append(cur)
                seen.add(cur)
            self.vertex_edges[v] = order

    # -- queries -------------------------------------------------------

    def vertex_degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_vertices, dtype=np.int64)
        np.add.at(deg, self.edge_tail, 1)
        np.add.at(deg, self.edge_head, 1)
        return deg

    def face_degrees(self) -> np.ndarray:
        return np.asarray([len(loop) for loop in self.faces], dtype=np.int64)

    def interior_vertices(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_vertices)

    def interior_faces(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_faces)

    def oriented(self, e: int, tail: int) -> tuple[int, int, int, int]:
        """Return (tail, head, left face, right face) for the edge directed
        so that it starts at ``tail``; flipping the direction swaps sides."""
        if tail == self.edge_tail[e]:
            return (self.edge_tail[e], self.edge_head[e], self.edge_left[e], self.edge_right[e])
        if tail == self.edge_head[e]:
            return (self.edge_head[e], self.edge_tail[e], self.edge_right[e], self.edge_left[e])
        raise ValueError(f"vertex {tail} is not an endpoint of edge {e}")

    def vertex_fan(self, v: int) -> list[tuple[int, int]]:
        """Incident edges around ``v`` in rotation order as (edge, other end)."""
        out = []
        for e in self.vertex_edges[v]:
            other = self.edge_head[e] if self.edge_tail[e] == v else self.edge_tail[e]
            out.append((e, int(other)))
        return out

    def face_fan(self, v: int) -> list[int]:
        """Faces around ``v`` in rotation order (full cycle for interior
        vertices, open fan for boundary ones)."""
        links = self._corner_face[v]
        return [links[e] for e in self.vertex_edges[v] if e in links]


def dual_edges(complex_: DiskComplex):
    """Iterate interior edges once as (edge id, left face, right face).

    The orientation convention is the stored tail->head direction with the
    left face on the left; the sequence is deterministic.
    """
    for e in complex_.interior_edges:
        yield int(e), int(complex_.edge_left[e]), int(complex_.edge_right[e])


@dataclass
class AngleData:
    """Intersection angles on interior (dual) edges.

    ``theta`` has one entry per edge of the complex; entries on boundary
    edges are ignored (conventionally NaN).  All used angles must lie in
    the open interval (epsilon0, pi - epsilon0).
    """

    theta: np.ndarray
    epsilon0: float = 0.05

    @classmethod
    def constant(cls, complex_: DiskComplex, value: float, epsilon0: float = 0.05) -> "AngleData":
        theta = np.full(complex_.num_edges, np.nan)
        theta[complex_.interior_edges] = value
        return cls(theta=theta, epsilon0=epsilon0)


def validate_complex(complex_: DiskComplex) -> ValidationReport:
    """Check the structural invariants of a disk-type complex.

    The report lists every violated invariant; an empty list means valid.
    """
    rep = ValidationReport()
    c = complex_

    for e in range(c.num_edges):
        if c.edge_face_count[e] > 2:
            rep.add(f"edge {e} ({c.edge_tail[e]},{c.edge_head[e]}): more than two incident faces")
        if c.edge_right[e] >= 0 and c.edge_left[e] == c.edge_right[e]:
            rep.add(f"edge {e}: degenerate edge, left face equals right face")
        if c.edge_tail[e] == c.edge_head[e]:
            rep.add(f"edge {e}: loop edge at vertex {c.edge_tail[e]}")

    euler = c.num_vertices - c.num_edges + c.num_faces
    if euler != 1:
        rep.add(f"Euler characteristic V-E+F = {euler}, expected 1 for a closed disk")

    deg_v = c.vertex_degrees()
    if deg_v.size and deg_v.min() == 0:
        for v in np.flatnonzero(deg_v == 0):
            rep.add(f"vertex {v} is isolated")
    if deg_v.size and deg_v.max() > c.max_degree:
        rep.add(f"max vertex degree {deg_v.max()} exceeds bound {c.max_degree}")
    deg_f = c.face_degrees()
    if deg_f.size and deg_f.max() > c.max_degree:
        rep.add(f"max face degree {deg_f.max()} exceeds bound {c.max_degree}")
    if deg_f.size and deg_f.min() < 3:
        rep.add(f"face degree {deg_f.min()} below 3")

    # rotation system must cover every incident edge exactly once per vertex
    for v in range(c.num_vertices):
        fan = c.vertex_edges[v]
        if deg_v[v] and len(fan) != deg_v[v]:
            rep.add(f"vertex {v}: rotation covers {len(fan)} of {deg_v[v]} edges (pinched disk)")

    # the complex must be connected through its faces
    if c.num_faces > 1:
        seen = np.zeros(c.num_faces, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            f = stack.pop()
            for e, _ in c.face_edges[f]:
                for g in (c.edge_left[e], c.edge_right[e]):
                    if g >= 0 and not seen[g]:
                        seen[g] = True
                        stack.append(int(g))
        if not seen.all():
            rep.add("face adjacency graph is disconnected")

    return rep


def validate_theta(complex_: DiskComplex, angles: AngleData, loop_len_cap: int = 12) -> ValidationReport:
    """Check angle data: range, vertex angle sums, and dual-loop sums.

    Every interior vertex must have its incident angles sum to 2*pi
    exactly.  Simple loops in the dual graph that enclose more than one
    dual face must have angle sum strictly above 2*pi + epsilon0; loops
    are enumerated up to ``loop_len_cap`` edges with pruning (a partial
    path already above the threshold cannot fail).
    """
    rep = ValidationReport()
    c = complex_
    th = angles.theta
    eps0 = angles.epsilon0

    for e in c.interior_edges:
        t = th[e]
        if not np.isfinite(t) or not (eps0 < t < np.pi - eps0):
            rep.add(f"edge {e}: angle {t} outside ({eps0}, pi - {eps0})")
    if not rep.ok:
        return rep

    interior_v = c.interior_vertices()
    for v in interior_v:
        s = sum(th[e] for e in c.vertex_edges[v])
        if abs(s - TWO_PI) > VERTEX_SUM_TOL:
            rep.add(f"vertex {v}: incident angle sum {s!r} != 2*pi")

    # Dual-face boundary loops (the fans around interior vertices) are the
    # loops bounding exactly one dual face; they are covered by the vertex
    # sums above and excluded from the loop search.
    single_face_loops = {frozenset(int(e) for e in c.vertex_edges[v]) for v in interior_v}

    adj: list[list[tuple[int, int]]] = [[] for _ in range(c.num_faces)]
    for e, lf, rf in dual_edges(c):
        adj[lf].append((rf, e))
        adj[rf].append((lf, e))

    threshold = TWO_PI + eps0
    cap = max(2, int(loop_len_cap))
    failing: dict[frozenset, tuple[list[int], float]] = {}

    def search(root: int):
        # Simple cycles with smallest node = root; the second-vs-last node
        # comparison keeps one traversal direction per cycle.
        stack = [(root, [root], [], 0.0)]
        while stack:
            node, path, edges_used, total = stack.pop()
            for nbr, e in adj[node]:
                if nbr < root or e in edges_used:
                    continue
                if nbr == root:
                    if len(path) >= 3 and path[1] > path[-1]:
                        continue
                    key = frozenset(edges_used + [e])
                    s = total + th[e]
                    if s <= threshold and key not in single_face_loops:
                        failing.setdefault(key, (path, s))
                    continue
                if nbr in path or len(path) >= cap:
                    continue
                s = total + th[e]
                if s > threshold:
                    continue  # every completion passes
                stack.append((nbr, path + [nbr], edges_used + [e], s))

    for root in range(c.num_faces):
        search(root)
    for path, s in failing.values():
        rep.add(
            f"dual loop through faces {path}: angle sum {s:.12g}"
            f" <= 2*pi + epsilon0 = {threshold:.12g}"
        )
    return rep
