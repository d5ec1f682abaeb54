"""Variational energies for circle pattern deformation and their solver.

Two energies drive everything:

* the relative volume in log-radius coordinates, convex along the slice
  of interior faces, built from the imaginary dilogarithm; its gradient
  is the per-edge curvature change (twice the half-angle defect) and its
  Hessian is the graph Laplacian with dual geometric weights;
* the Lobachevsky energy in central-angle coordinates, concave on the
  admissible slice; its gradient is the log-sin ratio change and its
  Hessian is minus the Laplacian with primal geometric weights.

``newton_solve`` is a damped Newton iteration with Armijo backtracking,
an optional fraction-to-boundary guard for angle admissibility, and a
gradient-descent fallback, shared by both senses (minimize / maximize).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cell_complex import DiskComplex
from .kite_geometry import half_angle, im_dilog, lobachevsky

DENSE_SOLVE_LIMIT = 20_000  # direct factorization below, CG above


class SolverError(RuntimeError):
    """Base class for Newton solver failures."""


class MaxIterationsError(SolverError):
    pass


class LineSearchFailure(SolverError):
    pass


class InadmissibleStartError(SolverError):
    pass


@dataclass
class FaceField:
    """Real values on faces with a free/fixed mask (fixed = Dirichlet)."""

    values: np.ndarray
    free: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.free = np.asarray(self.free, dtype=bool)
        if self.values.shape != self.free.shape:
            raise ValueError("values and free mask must have the same shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @classmethod
    def zeros(cls, complex_: DiskComplex, free: np.ndarray | None = None) -> "FaceField":
        if free is None:
            free = ~complex_.boundary_faces
        return cls(np.zeros(complex_.num_faces), np.array(free, dtype=bool))

    @classmethod
    def from_boundary(cls, complex_: DiskComplex, boundary_values) -> "FaceField":
        """Field fixed on boundary faces, free (zero-initialised) inside."""
        f = cls.zeros(complex_)
        b = ~f.free
        vals = np.asarray(boundary_values, dtype=float)
        f.values[b] = vals if vals.ndim else np.full(b.sum(), float(vals))
        return f

    def copy(self) -> "FaceField":
        return FaceField(self.values.copy(), self.free.copy())


@dataclass
class VertexField:
    """Real values on vertices with a free/fixed mask."""

    values: np.ndarray
    free: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.free = np.asarray(self.free, dtype=bool)
        if self.values.shape != self.free.shape:
            raise ValueError("values and free mask must have the same shape")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @classmethod
    def zeros(cls, complex_: DiskComplex, free: np.ndarray | None = None) -> "VertexField":
        if free is None:
            free = ~complex_.boundary_vertices
        return cls(np.zeros(complex_.num_vertices), np.array(free, dtype=bool))

    def copy(self) -> "VertexField":
        return VertexField(self.values.copy(), self.free.copy())


@dataclass
class SolveReport:
    """Iteration record of a Newton solve."""

    iterations: int = 0
    gradient_norm: float = np.inf
    energy: float = np.nan
    converged: bool = False
    steps: list = field(default_factory=list)  # (step length, energy)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "gradient_norm": self.gradient_norm,
            "energy": self.energy,
            "converged": self.converged,
            "steps": [[float(a), float(e)] for a, e in self.steps],
        }


# -- log-radius side -------------------------------------------------------


def wstar_edge(u_phi, u_psi, ref_log_ratio, theta):
    """Relative volume of one kite under the log-radius change (u_phi, u_psi).

    ``ref_log_ratio`` is log(R_phi / R_psi) in the reference pattern.
    Symmetric under swapping the two sides; zero when u_phi == u_psi.
    """
    x = np.asarray(u_phi, dtype=float) - np.asarray(u_psi, dtype=float)
    rho = np.asarray(ref_log_ratio, dtype=float)
    a_left = half_angle(rho, theta)
    a_right = half_angle(-rho, theta)
    return (
        im_dilog(x + rho, theta)
        + im_dilog(-x - rho, theta)
        - im_dilog(rho, theta)
        - im_dilog(-rho, theta)
        + (a_left - a_right) * x
    )


def kstar_edge(u_phi, u_psi, ref_log_ratio, theta):
    """Curvature change 2 alpha_ref - 2 alpha across one kite.

    Antisymmetric under swapping the sides; the derivative of
    ``wstar_edge`` in ``u_phi``.
    """
    x = np.asarray(u_phi, dtype=float) - np.asarray(u_psi, dtype=float)
    rho = np.asarray(ref_log_ratio, dtype=float)
    return 2.0 * half_angle(rho, theta) - 2.0 * half_angle(rho + x, theta)


def _edge_arrays(complex_: DiskComplex, theta, ref_values, u_values):
    ie = complex_.interior_edges
    lf = complex_.edge_left[ie]
    rf = complex_.edge_right[ie]
    rho = ref_values[lf] - ref_values[rf]
    x = u_values[lf] - u_values[rf]
    return ie, lf, rf, rho, x, theta[ie]


def wstar_total(complex_: DiskComplex, theta: np.ndarray, ref: FaceField, u: FaceField) -> float:
    """Sum of ``wstar_edge`` over all interior edges."""
    _, _, _, rho, x, th = _edge_arrays(complex_, theta, ref.values, u.values)
    a_left = half_angle(rho, th)
    a_right = half_angle(-rho, th)
    terms = (
        im_dilog(x + rho, th) + im_dilog(-x - rho, th)
        - im_dilog(rho, th) - im_dilog(-rho, th)
        + (a_left - a_right) * x
    )
    return float(np.sum(terms))


def grad_wstar(complex_: DiskComplex, theta: np.ndarray, ref: FaceField, u: FaceField) -> np.ndarray:
    """Gradient of the relative volume: entry at a face is the sum of
    curvature changes over its incident kites.  Vanishes on free faces
    exactly when the deformed radii solve the angle-sum equation relative
    to the reference."""
    _, lf, rf, rho, x, th = _edge_arrays(complex_, theta, ref.values, u.values)
    k = 2.0 * half_angle(rho, th) - 2.0 * half_angle(rho + x, th)
    g = np.zeros(complex_.num_faces)
    np.add.at(g, lf, k)
    np.add.at(g, rf, -k)
    return g


def dual_weights(complex_: DiskComplex, theta: np.ndarray, log_radii: np.ndarray) -> np.ndarray:
    """Dual geometric weights c* per interior edge at the given log radii."""
    ie = complex_.interior_edges
    rho = log_radii[complex_.edge_left[ie]] - log_radii[complex_.edge_right[ie]]
    th = theta[ie]
    r = np.exp(rho)
    return 2.0 * r * np.sin(th) / (1.0 + r * r - 2.0 * r * np.cos(th))


def graph_laplacian(n: int, rows: np.ndarray, cols: np.ndarray, weights: np.ndarray) -> sp.csr_matrix:
    """Weighted graph Laplacian as a sparse symmetric positive matrix."""
    i = np.concatenate([rows, cols, rows, cols])
    j = np.concatenate([cols, rows, rows, cols])
    v = np.concatenate([-weights, -weights, weights, weights])
    return sp.coo_matrix((v, (i, j)), shape=(n, n)).tocsr()


def hessian_wstar(complex_: DiskComplex, theta: np.ndarray, ref: FaceField, u: FaceField) -> sp.csr_matrix:
    """Hessian of the relative volume: Laplacian with dual weights at the
    deformed radii.  Positive semidefinite with constants in the kernel."""
    ie = complex_.interior_edges
    w = dual_weights(complex_, theta, ref.values + u.values)
    return graph_laplacian(complex_.num_faces, complex_.edge_left[ie], complex_.edge_right[ie], w)


# -- central-angle side ----------------------------------------------------


def w_edge(v_i, v_j, alpha_left_ref, alpha_right_ref):
    """Lobachevsky energy of one kite under the half-angle shift.

    The shift moves the left half-angle to alpha_left_ref + (v_j - v_i)/2
    and the right one to alpha_right_ref - (v_j - v_i)/2; both must stay
    in the closed interval [0, pi] (the open interval for derivatives).
    Symmetric in orientation.
    """
    d = 0.5 * (np.asarray(v_j, dtype=float) - np.asarray(v_i, dtype=float))
    a = np.asarray(alpha_left_ref, dtype=float) + d
    b = np.asarray(alpha_right_ref, dtype=float) - d
    if np.any(a < -1e-15) or np.any(b < -1e-15) or np.any(a > np.pi) or np.any(b > np.pi):
        raise ValueError("shifted half-angles leave the closed admissible interval")
    return (
        2.0 * (lobachevsky(a) + lobachevsky(b)
               - lobachevsky(alpha_left_ref) - lobachevsky(alpha_right_ref))
        - 2.0 * d * np.log(np.sin(alpha_right_ref) / np.sin(alpha_left_ref))
    )


def k_edge(v_i, v_j, alpha_left_ref, alpha_right_ref):
    """Normalized log-sin ratio change across one kite; antisymmetric.

    Requires strict admissibility of the shifted angles.
    """
    d = 0.5 * (np.asarray(v_j, dtype=float) - np.asarray(v_i, dtype=float))
    a = np.asarray(alpha_left_ref, dtype=float) + d
    b = np.asarray(alpha_right_ref, dtype=float) - d
    if np.any(a <= 0.0) or np.any(b <= 0.0) or np.any(a >= np.pi) or np.any(b >= np.pi):
        raise ValueError("shifted half-angles must lie strictly in (0, pi)")
    return np.log(np.sin(a) / np.sin(b)) - np.log(
        np.sin(alpha_left_ref) / np.sin(alpha_right_ref)
    )


def _vertex_edge_arrays(complex_: DiskComplex, kites, v_values):
    ie = complex_.interior_edges
    ti = complex_.edge_tail[ie]
    hj = complex_.edge_head[ie]
    d = 0.5 * (v_values[hj] - v_values[ti])
    return ie, ti, hj, d, kites.alpha_left[ie], kites.alpha_right[ie]


def _values(field) -> np.ndarray:
    return field.values if hasattr(field, "values") else np.asarray(field, dtype=float)


def w_total(complex_: DiskComplex, kites, v) -> float:
    """Sum of ``w_edge`` over interior edges (kites from the reference)."""
    _, _, _, d, al, ar = _vertex_edge_arrays(complex_, kites, _values(v))
    a, b = al + d, ar - d
    if np.any(a < -1e-15) or np.any(b < -1e-15):
        raise ValueError("shifted half-angles leave the closed admissible interval")
    a = np.clip(a, 0.0, np.pi)
    b = np.clip(b, 0.0, np.pi)
    terms = (2.0 * (lobachevsky(a) + lobachevsky(b) - lobachevsky(al) - lobachevsky(ar))
             - 2.0 * d * np.log(np.sin(ar) / np.sin(al)))
    return float(np.sum(terms))


def grad_w(complex_: DiskComplex, kites, v) -> np.ndarray:
    """Gradient of the Lobachevsky energy: entry at a vertex is the sum of
    normalized log-sin ratio changes over its incident kites."""
    _, ti, hj, d, al, ar = _vertex_edge_arrays(complex_, kites, _values(v))
    a, b = al + d, ar - d
    if np.any(a <= 0.0) or np.any(b <= 0.0):
        raise ValueError("gradient requires strictly admissible angles")
    k = np.log(np.sin(a) / np.sin(b)) - np.log(np.sin(al) / np.sin(ar))
    g = np.zeros(complex_.num_vertices)
    np.add.at(g, ti, k)
    np.add.at(g, hj, -k)
    return g


def primal_weights(complex_: DiskComplex, kites, v_values: np.ndarray) -> np.ndarray:
    """Primal geometric weights c per interior edge at the shifted angles."""
    _, _, _, d, al, ar = _vertex_edge_arrays(complex_, kites, v_values)
    a, b = al + d, ar - d
    return 0.5 * (1.0 / np.tan(a) + 1.0 / np.tan(b))


def hessian_w(complex_: DiskComplex, kites, v) -> sp.csr_matrix:
    """Hessian of the Lobachevsky energy: minus the Laplacian with primal
    weights at the shifted angles.  Negative definite on the free slice."""
    ie = complex_.interior_edges
    w = primal_weights(complex_, kites, _values(v))
    return -graph_laplacian(complex_.num_vertices, complex_.edge_tail[ie], complex_.edge_head[ie], w)


# -- Newton solver ---------------------------------------------------------

ARMIJO_DECREASE = 1e-4
ARMIJO_FACTOR = 0.5
BOUNDARY_FRACTION = 0.05  # every slack keeps at least this fraction per step
MIN_STEP = 1e-14


def _solve_spd(h: sp.spmatrix, rhs: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    if n < DENSE_SOLVE_LIMIT:
        return spla.spsolve(h.tocsc(), rhs)
    diag = h.diagonal()
    diag[diag <= 0] = 1.0
    precond = spla.LinearOperator((n, n), matvec=lambda x: x / diag)
    x, info = spla.cg(h.tocsr(), rhs, rtol=1e-12, atol=0.0, M=precond, maxiter=10 * n)
    if info != 0:
        raise SolverError(f"conjugate gradient did not converge (info={info})")
    return x


def newton_solve(energy, x0: np.ndarray, free: np.ndarray, sense: str = "minimize",
                 guard=None, tol: float = 1e-10, max_iter: int = 200) -> tuple[np.ndarray, SolveReport]:
    """Damped Newton iteration on the free coordinates of ``x0``.

    ``energy`` provides ``value(x)``, ``gradient(x)`` (full-length) and
    ``hessian(x)`` (sparse, full-size); ``sense`` selects minimization or
    maximization.  ``guard``, when given, must provide ``admissible(x)``
    and ``max_step(x, dx)`` implementing a fraction-to-boundary rule; all
    iterates then stay strictly admissible.  Returns the solution and a
    step-by-step report; the report energy is in the original sense.
    """
    if sense not in ("minimize", "maximize"):
        raise ValueError("sense must be 'minimize' or 'maximize'")
    sign = 1.0 if sense == "minimize" else -1.0
    free = np.asarray(free, dtype=bool)
    if not free.any():
        raise ValueError("no free coordinates to solve for")
    x = np.array(x0, dtype=float)
    if guard is not None and not guard.admissible(x):
        raise InadmissibleStartError("starting point violates admissibility")

    report = SolveReport()
    f = sign * energy.value(x)
    idx = np.flatnonzero(free)

    for it in range(max_iter + 1):
        g_full = sign * energy.gradient(x)
        g = g_full[idx]
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        report.gradient_norm = gnorm
        report.energy = sign * f
        report.iterations = it
        if gnorm <= tol:
            report.converged = True
            return x, report
        if it == max_iter:
            raise MaxIterationsError(
                f"no convergence in {max_iter} iterations (gradient norm {gnorm:.3e})")

        h = (sign * energy.hessian(x)).tocsr()[idx][:, idx]
        try:
            d = _solve_spd(h, -g)
            if not np.all(np.isfinite(d)) or float(g @ d) >= 0.0:
                raise SolverError("Newton direction is not a descent direction")
        except SolverError:
            d = -g  # gradient fallback

        dx = np.zeros_like(x)
        dx[idx] = d
        t = 1.0
        if guard is not None:
            t = min(t, guard.max_step(x, dx))
        slope = float(g @ d)
        accepted = False
        while t > MIN_STEP:
            x_try = x + t * dx
            try:
                f_try = sign * energy.value(x_try)
            except ValueError:
                f_try = np.inf
            if np.isfinite(f_try) and f_try <= f + ARMIJO_DECREASE * t * slope:
                accepted = True
                break
            t *= ARMIJO_FACTOR
        if not accepted and slope < 0 and not np.array_equal(d, -g):
            # retry with plain gradient descent before giving up
            d = -g
            dx = np.zeros_like(x)
            dx[idx] = d
            slope = float(g @ d)
            t = 1.0 if guard is None else min(1.0, guard.max_step(x, dx))
            while t > MIN_STEP:
                x_try = x + t * dx
                try:
                    f_try = sign * energy.value(x_try)
                except ValueError:
                    f_try = np.inf
                if np.isfinite(f_try) and f_try <= f + ARMIJO_DECREASE * t * slope:
                    accepted = True
                    break
                t *= ARMIJO_FACTOR
        if not accepted:
            raise LineSearchFailure(
                f"line search failed at iteration {it} (gradient norm {gnorm:.3e})")
        x, f = x_try, f_try
        report.steps.append((t, sign * f))

    raise MaxIterationsError(f"no convergence in {max_iter} iterations")


class AdmissibilityGuard:
    """Fraction-to-boundary rule for the shifted half-angle constraints.

    Slacks are the shifted angles a = alpha_left + (v_j - v_i)/2 and
    b = alpha_right - (v_j - v_i)/2 per interior edge; a step is scaled so
    every slack keeps at least ``BOUNDARY_FRACTION`` of its current value.
    """

    def __init__(self, complex_: DiskComplex, kites):
        ie = complex_.interior_edges
        self.tail = complex_.edge_tail[ie]
        self.head = complex_.edge_head[ie]
        self.alpha_left = kites.alpha_left[ie]
        self.alpha_right = kites.alpha_right[ie]

    def _slacks(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d = 0.5 * (x[self.head] - x[self.tail])
        return self.alpha_left + d, self.alpha_right - d

    def admissible(self, x: np.ndarray) -> bool:
        a, b = self._slacks(x)
        return bool(np.all(a > 0.0) and np.all(b > 0.0))

    def max_step(self, x: np.ndarray, dx: np.ndarray) -> float:
        a, b = self._slacks(x)
        dd = 0.5 * (dx[self.head] - dx[self.tail])
        t = np.inf
        for slack, rate in ((a, dd), (b, -dd)):
            shrinking = rate < 0.0
            if np.any(shrinking):
                t = min(t, float(np.min(
                    (1.0 - BOUNDARY_FRACTION) * slack[shrinking] / -rate[shrinking])))
        return t
