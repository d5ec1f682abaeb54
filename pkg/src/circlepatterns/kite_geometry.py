"""Per-edge kite geometry and the special functions built on it.

Every interior edge of a pattern carries a Euclidean kite spanned by the
two circumcenters and the two circle intersection points.  This module
computes the half-angles at the centers, the geometric edge weights, the
chord lengths, and the two special functions the variational energies
are made of: Milnor's Lobachevsky function and the imaginary part of the
dilogarithm.  Both reduce to the Clausen function Cl2, evaluated by a
fast zeta-coefficient series after range reduction.

All functions are pure and accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

TWO_PI = 2.0 * math.pi

# Cl2(t) = t - t*log|t| + sum_n  zeta(2n)/(n(2n+1)) * (t/2pi)^(2n) * t,
# valid for |t| < 2pi; after reduction to [-pi, pi] the ratio per term is
# <= 1/4, so 64 terms reach full double precision.
_N_CL2 = 64
_CL2_COEF = np.array([zeta(2 * n) / (n * (2 * n + 1)) for n in range(1, _N_CL2 + 1)])


def clausen(x):
    """Clausen function Cl2(x) = sum_{n>=1} sin(n x)/n^2.

    Odd, 2*pi-periodic; evaluated by the log-singularity-split series.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    t = np.mod(x + np.pi, TWO_PI) - np.pi  # reduce to [-pi, pi]
    at = np.abs(t)
    q = (t / TWO_PI) ** 2
    # Horner in q for sum_n coef[n] * q^n
    acc = np.zeros_like(t)
    for c in _CL2_COEF[::-1]:
        acc = acc * q + c
    acc *= q
    with np.errstate(divide="ignore", invalid="ignore"):
        core = at * (1.0 - np.log(at)) + at * acc
    val = np.where(at < 1e-300, 0.0, np.sign(t) * core)
    return float(val) if scalar else val


def lobachevsky(x):
    """Milnor's Lobachevsky function L(x) = -int_0^x log|2 sin t| dt.

    Odd and pi-periodic; equals Cl2(2x)/2.
    """
    x = np.asarray(x, dtype=float)
    out = 0.5 * clausen(2.0 * x)
    return float(out) if x.ndim == 0 else out


_SERIES_CUTOFF = 1.0  # |log r| above which the power series needs <= 44 terms
_SERIES_N = np.arange(1.0, 45.0)


def im_dilog(log_r, theta):
    """Imaginary part of Li2(r e^{i theta}) with r = exp(log_r).

    Requires theta in (0, pi) so the branch cut [1, inf) is avoided.  For
    log_r > 0 the dilogarithm inversion identity reduces the argument to
    the unit disk:  Im Li2(e^{x+i t}) = (pi - t) x + Im Li2(e^{-x+i t}).
    Deep inside the disk the power series sum r^n sin(n t)/n^2 converges
    in a few dozen terms and is used directly (full relative accuracy for
    tiny values); near the unit circle the exact Clausen reduction

        Im Li2(r e^{i t}) = w log r + (Cl2(2w) + Cl2(2t) - Cl2(2w+2t))/2

    applies, with w = arg(1 - r e^{i t}) measured clockwise.
    """
    log_r = np.asarray(log_r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    scalar = log_r.ndim == 0 and theta.ndim == 0
    if np.any(theta <= 0.0) or np.any(theta >= np.pi):
        raise ValueError("theta must lie in (0, pi)")
    log_r, theta = np.broadcast_arrays(log_r, theta)
    x = -np.abs(np.atleast_1d(log_r))
    th = np.atleast_1d(theta)
    inner = np.empty_like(x)

    deep = x < -_SERIES_CUTOFF
    if np.any(deep):
        xs = x[deep][:, None] * _SERIES_N
        inner[deep] = np.sum(np.exp(xs) * np.sin(th[deep][:, None] * _SERIES_N)
                             / _SERIES_N ** 2, axis=1)
    near = ~deep
    if np.any(near):
        r = np.exp(x[near])
        t = th[near]
        w = np.arctan2(r * np.sin(t), 1.0 - r * np.cos(t))
        inner[near] = w * x[near] + 0.5 * (
            clausen(2.0 * w) + clausen(2.0 * t) - clausen(2.0 * w + 2.0 * t))

    val = np.where(log_r > 0.0, (np.pi - theta) * log_r, 0.0) + inner.reshape(log_r.shape)
    return float(val) if scalar else val


@dataclass(frozen=True)
class KiteAngles:
    """Half-angles of a single kite; alpha_left + alpha_right + theta = pi."""

    alpha_left: float
    alpha_right: float
    theta: float


def _check_kite_inputs(r_phi, r_psi, theta):
    if not (np.all(np.isfinite(r_phi)) and np.all(np.isfinite(r_psi))):
        raise ValueError("radii must be finite")
    if np.any(np.asarray(r_phi) <= 0.0) or np.any(np.asarray(r_psi) <= 0.0):
        raise ValueError("radii must be positive")
    if np.any(np.asarray(theta) <= 0.0) or np.any(np.asarray(theta) >= np.pi):
        raise ValueError("theta must lie in (0, pi)")


def arccot_to_pi(x):
    """Inverse cotangent mapping the real line onto (0, pi)."""
    return np.arctan2(1.0, x)


def half_angle(log_ratio, theta):
    """Half-angle at the first center from the log radius ratio.

    ``log_ratio`` is log(R_phi / R_psi); the result is
    arccot((R_phi - R_psi cos theta) / (R_psi sin theta)) in (0, pi),
    computed as atan2(sin theta, e^{log_ratio} - cos theta).
    """
    return np.arctan2(np.sin(theta), np.exp(log_ratio) - np.cos(theta))


def half_angles(r_phi: float, r_psi: float, theta: float) -> KiteAngles:
    """Both half-angles of the kite with side radii r_phi, r_psi.

    alpha_left sits at the center of the r_phi circle.  The identity
    alpha_left + alpha_right = pi - theta holds exactly; both angles lie
    in (0, pi), obtuse when the cotangent argument is negative.
    """
    _check_kite_inputs(r_phi, r_psi, theta)
    st, ct = np.sin(theta), np.cos(theta)
    a_left = float(np.arctan2(r_psi * st, r_phi - r_psi * ct))
    a_right = float(np.arctan2(r_phi * st, r_psi - r_phi * ct))
    return KiteAngles(alpha_left=a_left, alpha_right=a_right, theta=float(theta))


def half_angle_log_form(log_ratio: float, theta: float) -> float:
    """Half-angle via the complex logarithm expression.

    Evaluates (1/2i) ln((1 - r e^{-i theta}) / (1 - r e^{i theta})) with
    r = e^{-log_ratio}; the quotient has unit modulus, so the value is
    half its argument, lifted into (0, pi).
    """
    if not (0.0 < theta < np.pi):
        raise ValueError("theta must lie in (0, pi)")
    if not np.isfinite(log_ratio):
        raise ValueError("log_ratio must be finite")
    r = math.exp(-log_ratio)
    num = 1.0 - r * complex(math.cos(theta), -math.sin(theta))
    den = 1.0 - r * complex(math.cos(theta), math.sin(theta))
    a = 0.5 * np.angle(num / den)
    if a <= 0.0:
        a += np.pi
    return float(a)


def edge_weight(r_phi, r_psi, theta):
    """Geometric edge weight c = (cot a_left + cot a_right) / 2.

    Closed form (R_phi^2 + R_psi^2 - 2 R_phi R_psi cos theta) /
    (2 R_phi R_psi sin theta); always >= tan(theta/2) with equality iff
    the radii coincide.  The dual weight is the reciprocal.
    """
    _check_kite_inputs(r_phi, r_psi, theta)
    num = r_phi * r_phi + r_psi * r_psi - 2.0 * r_phi * r_psi * np.cos(theta)
    return num / (2.0 * r_phi * r_psi * np.sin(theta))


def chord_length(r, alpha):
    """Length of the chord subtending half-angle ``alpha`` in a circle of
    radius ``r``: 2 r sin(alpha)."""
    if np.any(np.asarray(r) <= 0.0) or not np.all(np.isfinite(r)):
        raise ValueError("radius must be positive and finite")
    if np.any(np.asarray(alpha) <= 0.0) or np.any(np.asarray(alpha) >= np.pi):
        raise ValueError("alpha must lie in (0, pi)")
    return 2.0 * r * np.sin(alpha)


def center_distance(r_phi, r_psi, theta):
    """Distance between the two circumcenters of a kite."""
    return np.sqrt(r_phi * r_phi + r_psi * r_psi - 2.0 * r_phi * r_psi * np.cos(theta))


def _check_triple(t, tol=1e-10):
    t = np.asarray(t, dtype=float)
    if t.shape[-1] != 3:
        raise ValueError("angle triple must have three entries")
    if np.any(t <= 0.0):
        raise ValueError("triangle angles must be positive")
    if np.any(np.abs(t.sum(axis=-1) - np.pi) > tol):
        raise ValueError("triangle angles must sum to pi")
    return t


def beltrami_coefficient(src, dst) -> complex:
    """Beltrami coefficient of the linear map between two triangles.

    ``src`` and ``dst`` are angle triples (alpha, beta, gamma) of the
    source and target triangles with corresponding vertices, both taken
    counterclockwise.  The coefficient is constant on the triangle and
    satisfies |mu| < 1 for nondegenerate triples; mu = 0 iff the shapes
    agree.
    """
    a, b, g = _check_triple(src)
    ta, tb, tg = _check_triple(dst)
    sa, sb, sg = math.sin(a), math.sin(b), math.sin(g)
    p = math.sin(tg) / sg
    q = math.sin(ta) * math.sin(tb) / (sa * sb)
    s = math.cos(ta) * math.sin(tb) / (sa * sb) - math.cos(a) * math.sin(tg) / (sa * sg)
    return complex(p - q, s) / complex(p + q, -s)


def beltrami_modulus_sq(src, dst) -> float:
    """|mu|^2 via the sine-product form (cross-check for the quotient)."""
    a, b, g = _check_triple(src)
    ta, tb, tg = _check_triple(dst)
    sa, sb, sg = math.sin(a), math.sin(b), math.sin(g)
    p = math.sin(tg) / sg
    q = math.sin(ta) * math.sin(tb) / (sa * sb)
    s = math.cos(ta) * math.sin(tb) / (sa * sb) - math.cos(a) * math.sin(tg) / (sa * sg)
    num = 4.0 * math.sin(ta) * math.sin(tb) * math.sin(tg) / (sa * sb * sg)
    return 1.0 - num / ((p + q) ** 2 + s ** 2)


def beltrami_modulus_bound(eta: float) -> float:
    """Upper bound on |mu| when all six angles lie in (eta, pi - eta).

    Follows from bounding the sine-product form term by term:
    |mu|^2 <= 1 - 4 sin^3(eta) / (2 (1/sin^2(eta) + 3/sin^4(eta))).
    """
    if not (0.0 < eta < math.pi / 2):
        raise ValueError("eta must lie in (0, pi/2)")
    s = math.sin(eta)
    ratio = 4.0 * s ** 3 / (2.0 * (1.0 / s ** 2 + 3.0 / s ** 4))
    return math.sqrt(max(0.0, 1.0 - ratio))


@dataclass
class EdgeWeights:
    """Primal and dual geometric edge weights, one entry per edge.

    Boundary edges carry NaN; interior entries satisfy
    c_dual = 1 / c_primal and c_primal >= tan(epsilon0 / 2).
    """

    c_primal: np.ndarray
    c_dual: np.ndarray


@dataclass
class KiteTable:
    """Per-edge kite data over a complex (NaN on boundary edges).

    ``alpha_left`` / ``alpha_right`` are the half-angles at the left and
    right face of the stored edge orientation; ``chord`` is the common
    chord length.
    """

    alpha_left: np.ndarray
    alpha_right: np.ndarray
    theta: np.ndarray
    c_primal: np.ndarray
    c_dual: np.ndarray
    chord: np.ndarray

    @property
    def weights(self) -> EdgeWeights:
        return EdgeWeights(c_primal=self.c_primal, c_dual=self.c_dual)

    @classmethod
    def from_radii(cls, complex_, theta: np.ndarray, radii: np.ndarray) -> "KiteTable":
        """Assemble the kite table for circumradii ``radii`` (per face)."""
        n = complex_.num_edges
        al = np.full(n, np.nan)
        ar = np.full(n, np.nan)
        cp = np.full(n, np.nan)
        ch = np.full(n, np.nan)
        ie = complex_.interior_edges
        if len(ie):
            rl = radii[complex_.edge_left[ie]]
            rr = radii[complex_.edge_right[ie]]
            th = theta[ie]
            st, ct = np.sin(th), np.cos(th)
            al[ie] = np.arctan2(rr * st, rl - rr * ct)
            ar[ie] = np.arctan2(rl * st, rr - rl * ct)
            cp[ie] = (rl * rl + rr * rr - 2.0 * rl * rr * ct) / (2.0 * rl * rr * st)
            ch[ie] = 2.0 * rl * np.sin(al[ie])
        with np.errstate(divide="ignore", invalid="ignore"):
            cd = 1.0 / cp
        return cls(alpha_left=al, alpha_right=ar, theta=np.array(theta, dtype=float),
                   c_primal=cp, c_dual=cd, chord=ch)

    @classmethod
    def from_half_angles(cls, complex_, theta: np.ndarray, alpha_left: np.ndarray,
                         alpha_right: np.ndarray, radii_scale: np.ndarray | None = None) -> "KiteTable":
        """Assemble from prescribed half-angles (central-angle coordinates).

        Chord lengths require radii; when ``radii_scale`` is omitted the
        chord column is left NaN.
        """
        n = complex_.num_edges
        cp = np.full(n, np.nan)
        ch = np.full(n, np.nan)
        ie = complex_.interior_edges
        if len(ie):
            with np.errstate(divide="ignore", invalid="ignore"):
                cp[ie] = 0.5 * (1.0 / np.tan(alpha_left[ie]) + 1.0 / np.tan(alpha_right[ie]))
            if radii_scale is not None:
                ch[ie] = 2.0 * radii_scale[complex_.edge_left[ie]] * np.sin(alpha_left[ie])
        with np.errstate(divide="ignore", invalid="ignore"):
            cd = 1.0 / cp
        return cls(alpha_left=np.array(alpha_left, dtype=float),
                   alpha_right=np.array(alpha_right, dtype=float),
                   theta=np.array(theta, dtype=float),
                   c_primal=cp, c_dual=cd, chord=ch)
