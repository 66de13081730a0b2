"""Closed-form geometry of the constant-curvature model surfaces.

Points live in R^3:

* k > 0: sphere of radius 1/sqrt(k), Euclidean inner product.
* k < 0: upper sheet of the hyperboloid <x, x>_M = 1/k with the Minkowski
  form diag(1, 1, -1).
* k = 0: the plane (x, y, 0).

In every model <x, x> = 1/k for the model's own bilinear form, which keeps
the exp/log/transport formulas uniform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# rejection band for frames and derivative formulas
FRAME_TOL = 1e-9
# below |k| r^2 < AREA_LIMIT_TOL the flat limit r/2 replaces tan(sqrt(k) r/2)/sqrt(k)
AREA_LIMIT_TOL = 1e-12

_J = np.array([1.0, 1.0, -1.0])
NORTH = np.array([0.0, 0.0, 1.0])


class DegenerateFrameError(ValueError):
    """Raised when the pair is too close, or too close to the cut locus, for a frame."""


@dataclass(frozen=True)
class Curvature:
    """Curvature constant of the model surface."""

    k: float

    def __post_init__(self):
        if not math.isfinite(self.k):
            raise ValueError("curvature must be finite")

    @property
    def injectivity_radius(self) -> float:
        return math.pi / math.sqrt(self.k) if self.k > 0 else math.inf

    @property
    def model(self) -> str:
        if self.k > 0:
            return "sphere"
        if self.k < 0:
            return "hyperboloid"
        return "plane"


@dataclass(frozen=True)
class PolarCoords:
    """Geodesic polar coordinates around the north pole."""

    phi: float
    theta: float


@dataclass(frozen=True)
class FramePair:
    """Direct orthonormal frames at X and Y, e1x pointing at Y."""

    e1x: np.ndarray
    e2x: np.ndarray
    e1y: np.ndarray
    e2y: np.ndarray


def _kval(k) -> float:
    return float(k.k) if isinstance(k, Curvature) else float(k)


def injectivity_radius(k) -> float:
    return Curvature(_kval(k)).injectivity_radius


def inner(a, b, k) -> float:
    """Model bilinear form: Minkowski for k < 0, Euclidean otherwise."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if _kval(k) < 0:
        return float(a[0] * b[0] + a[1] * b[1] - a[2] * b[2])
    return float(a @ b)


def norm(v, k) -> float:
    return math.sqrt(max(inner(v, v, k), 0.0))


def north_pole(k) -> np.ndarray:
    k = _kval(k)
    if k == 0:
        return np.zeros(3)
    return NORTH / math.sqrt(abs(k))


def _normal(x, k) -> np.ndarray:
    # unit normal used for orientation; timelike for the hyperboloid
    k = _kval(k)
    if k == 0:
        return NORTH.copy()
    return np.asarray(x, dtype=float) * math.sqrt(abs(k))


def rotate90(x, v, k) -> np.ndarray:
    """Rotate a tangent vector at x by +pi/2 in the oriented tangent plane."""
    c = np.cross(_normal(x, k), np.asarray(v, dtype=float))
    return c * _J if _kval(k) < 0 else c


# scalar helpers: sn_k, cs_k and the swept-area factor

def sn_k(r, k):
    k = _kval(k)
    if k > 0:
        s = math.sqrt(k)
        return math.sin(s * r) / s
    if k < 0:
        s = math.sqrt(-k)
        return math.sinh(s * r) / s
    return r


def cs_k(r, k):
    k = _kval(k)
    if k > 0:
        return math.cos(math.sqrt(k) * r)
    if k < 0:
        return math.cosh(math.sqrt(-k) * r)
    return 1.0


def area_factor(r, k):
    """tan(sqrt(k) r / 2) / sqrt(k), with its tanh and flat analogues."""
    k = _kval(k)
    if abs(k) * r * r < AREA_LIMIT_TOL:
        return r / 2.0
    if k > 0:
        s = math.sqrt(k)
        return math.tan(s * r / 2) / s
    s = math.sqrt(-k)
    return math.tanh(s * r / 2) / s


def _half_tan2(r, k):
    # tan^2(sqrt(k) r/2), analytically continued (negative for k < 0)
    k = _kval(k)
    return k * area_factor(r, k) ** 2


def _half_cos2(r, k):
    k = _kval(k)
    if k > 0:
        return math.cos(math.sqrt(k) * r / 2) ** 2
    if k < 0:
        return math.cosh(math.sqrt(-k) * r / 2) ** 2
    return 1.0


# charts

def embed(p: PolarCoords, k) -> np.ndarray:
    """Model point with polar coordinates p around the north pole."""
    k = _kval(k)
    phi, theta = float(p.phi), float(p.theta)
    if phi < 0:
        raise ValueError("phi must be non-negative")
    if k > 0:
        if phi > math.pi / math.sqrt(k) + 1e-15:
            raise ValueError("phi outside [0, pi/sqrt(k)]")
        s = math.sqrt(k)
        a = s * phi
        return np.array([math.sin(a) * math.sin(theta), -math.sin(a) * math.cos(theta), math.cos(a)]) / s
    if k < 0:
        s = math.sqrt(-k)
        a = s * phi
        return np.array([math.sinh(a) * math.cos(theta), math.sinh(a) * math.sin(theta), math.cosh(a)]) / s
    return np.array([phi * math.cos(theta), phi * math.sin(theta), 0.0])


def to_polar(x, k) -> PolarCoords:
    """Inverse of embed; theta is reported in [0, 2pi) and as 0 at the pole."""
    k = _kval(k)
    x = np.asarray(x, dtype=float)
    if k > 0:
        s = math.sqrt(k)
        h = math.hypot(x[0], x[1]) * s
        phi = math.atan2(h, x[2] * s) / s
        theta = math.atan2(x[0], -x[1]) if h > 0 else 0.0
    elif k < 0:
        s = math.sqrt(-k)
        h = math.hypot(x[0], x[1]) * s
        phi = math.asinh(h) / s
        theta = math.atan2(x[1], x[0]) if h > 0 else 0.0
    else:
        phi = math.hypot(x[0], x[1])
        theta = math.atan2(x[1], x[0]) if phi > 0 else 0.0
    return PolarCoords(phi, theta % (2 * math.pi))


def project_to_model(x, k) -> np.ndarray:
    """Snap a nearly-valid point back onto the model surface."""
    k = _kval(k)
    x = np.array(x, dtype=float)
    if k > 0:
        return x / (np.linalg.norm(x) * math.sqrt(k))
    if k < 0:
        s = math.sqrt(-k)
        x[2] = math.sqrt(x[0] ** 2 + x[1] ** 2 + 1.0 / (s * s))
        return x
    x[2] = 0.0
    return x


def project_to_tangent(x, v, k) -> np.ndarray:
    k = _kval(k)
    v = np.asarray(v, dtype=float)
    if k == 0:
        return np.array([v[0], v[1], 0.0])
    return v - k * inner(x, v, k) * np.asarray(x, dtype=float)


# metric

def distance(x, y, k) -> float:
    """Geodesic distance computed from the embedding (stable at small distances)."""
    k = _kval(k)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if k > 0:
        s = math.sqrt(k)
        return math.atan2(np.linalg.norm(np.cross(x, y)) * s * s, float(x @ y) * k) / s
    if k < 0:
        s = math.sqrt(-k)
        d = x - y
        q = max(inner(d, d, k), 0.0)
        return 2.0 * math.asinh(s * math.sqrt(q) / 2.0) / s
    return float(np.linalg.norm(x - y))


def distance_polar(p: PolarCoords, q: PolarCoords, k) -> float:
    """Law of cosines in polar coordinates; the hyperbolic case uses the minus sign."""
    k = _kval(k)
    dth = p.theta - q.theta
    if k > 0:
        s = math.sqrt(k)
        a, b = s * p.phi, s * q.phi
        c = math.cos(a) * math.cos(b) + math.sin(a) * math.sin(b) * math.cos(dth)
        return math.acos(min(1.0, max(-1.0, c))) / s
    if k < 0:
        s = math.sqrt(-k)
        a, b = s * p.phi, s * q.phi
        c = math.cosh(a) * math.cosh(b) - math.sinh(a) * math.sinh(b) * math.cos(dth)
        return math.acosh(max(1.0, c)) / s
    return math.sqrt(max(p.phi ** 2 + q.phi ** 2 - 2 * p.phi * q.phi * math.cos(dth), 0.0))


def exp_map(x, v, k) -> np.ndarray:
    k = _kval(k)
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if k == 0:
        return x + v
    n = norm(v, k)
    if n == 0.0:
        return x.copy()
    s = math.sqrt(abs(k))
    a = s * n
    if k > 0:
        return math.cos(a) * x + (math.sin(a) / a) * v
    return math.cosh(a) * x + (math.sinh(a) / a) * v


def log_map(x, y, k) -> np.ndarray:
    """Initial velocity of the minimal geodesic from x to y (length = distance)."""
    k = _kval(k)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = distance(x, y, k)
    if r == 0.0:
        return np.zeros(3)
    if k > 0 and r >= injectivity_radius(k) - FRAME_TOL:
        raise DegenerateFrameError("log undefined at the cut locus")
    if k == 0:
        return y - x
    w = project_to_tangent(x, y, k)
    nw = norm(w, k)
    if nw == 0.0:
        raise DegenerateFrameError("log direction undefined")
    return (r / nw) * w


def _check_pair(x, y, k) -> float:
    r = distance(x, y, k)
    if r < FRAME_TOL or r > injectivity_radius(k) - FRAME_TOL:
        raise DegenerateFrameError(f"degenerate pair, rho={r!r}")
    return r


def _geodesic_end_tangent(x, e1, r, k) -> np.ndarray:
    # unit tangent at the far end of the geodesic t -> exp_x(t e1), t = r
    k = _kval(k)
    if k == 0:
        return np.asarray(e1, dtype=float).copy()
    s = math.sqrt(abs(k))
    if k > 0:
        return -s * math.sin(s * r) * x + math.cos(s * r) * e1
    return s * math.sinh(s * r) * x + math.cosh(s * r) * e1


def parallel_transport(x, y, v, k) -> np.ndarray:
    """Transport v in T_x along the minimal geodesic to T_y."""
    k = _kval(k)
    v = np.asarray(v, dtype=float)
    if k == 0:
        return v.copy()
    if not np.any(v):
        return np.zeros(3)
    r = _check_pair(x, y, k)
    x = np.asarray(x, dtype=float)
    e1 = log_map(x, y, k) / r
    e1y = _geodesic_end_tangent(x, e1, r, k)
    a = inner(v, e1, k)
    return v + a * (e1y - e1)


def frame_pair(x, y, k) -> FramePair:
    k = _kval(k)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = _check_pair(x, y, k)
    e1x = log_map(x, y, k) / r
    e1y = _geodesic_end_tangent(x, e1x, r, k)
    return FramePair(e1x, rotate90(x, e1x, k), e1y, rotate90(y, e1y, k))


def frame_components(frames: FramePair, u, v, k):
    """(u1, u2, v1, v2) of u at X and v at Y in the frame pair."""
    return (inner(u, frames.e1x, k), inner(u, frames.e2x, k),
            inner(v, frames.e1y, k), inner(v, frames.e2y, k))


def det2(x, a, b, k) -> float:
    """Oriented area form at x evaluated on tangent vectors a, b."""
    # equals <rotate90(a), b> in every model since J^2 = I
    c = np.cross(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return float(_normal(x, k) @ c)


# derivative formulas

def hessian_rho(r, u2, v2, k) -> float:
    """Hessian of the distance in frame components; only the e2 parts enter."""
    k = _kval(k)
    if k > 0:
        s = math.sqrt(k)
        return s * (u2 * u2 + v2 * v2) / math.tan(s * r) - 2 * s * u2 * v2 / math.sin(s * r)
    if k < 0:
        s = math.sqrt(-k)
        return s * (u2 * u2 + v2 * v2) / math.tanh(s * r) - 2 * s * u2 * v2 / math.sinh(s * r)
    # flat limit of the curved expressions
    return (u2 - v2) ** 2 / r


def hessian_area(r, u1, u2, v1, v2, k) -> float:
    return ((u2 * v1 - v2 * u1) / _half_cos2(r, k)
            + _half_tan2(r, k) * (v2 * v1 - u2 * u1))


def _check_derivative_pair(x, y, k) -> float:
    try:
        return _check_pair(x, y, k)
    except DegenerateFrameError as exc:
        raise DegenerateFrameError(f"singular configuration: {exc}") from None


def distance_derivatives(x, y, u, v, k):
    """(d rho, Hess rho) at (x, y) applied to (u, v)."""
    r = _check_derivative_pair(x, y, k)
    u1, u2, v1, v2 = frame_components(frame_pair(x, y, k), u, v, k)
    return v1 - u1, hessian_rho(r, u2, v2, k)


def area_derivatives(x, y, u, v, k):
    """(dA, Hess A) of the signed swept area at (x, y) applied to (u, v)."""
    r = _check_derivative_pair(x, y, k)
    u1, u2, v1, v2 = frame_components(frame_pair(x, y, k), u, v, k)
    return area_factor(r, k) * (u2 + v2), hessian_area(r, u1, u2, v1, v2, k)


# triangles

def triangle_area(a, b, c, k) -> float:
    """Unsigned area of the geodesic triangle abc.

    Uses tan(A/2) = |det(a,b,c)| / (1 + <a,b> + <b,c> + <c,a>) on unit points
    (Minkowski form with flipped signs on the hyperboloid), which is stable
    for thin triangles.
    """
    k = _kval(k)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    if k == 0:
        return 0.5 * abs(float(np.cross(b - a, c - a)[2]))
    s = math.sqrt(abs(k))
    a, b, c = a * s, b * s, c * s
    det = abs(float(np.linalg.det(np.stack([a, b, c]))))
    if k > 0:
        den = 1.0 + a @ b + b @ c + c @ a
    else:
        den = 1.0 - inner(a, b, -1) - inner(b, c, -1) - inner(c, a, -1)
    if det == 0.0:
        return 0.0
    return 2.0 * math.atan2(det, den) / abs(k)


def heron_area(phi_x, phi_y, phi, k=1.0) -> float:
    """Area from three side lengths via the cos(A/2) Heron-type identity."""
    k = _kval(k)
    if k > 0:
        s = math.sqrt(k)
        a, b, c = s * phi_x, s * phi_y, s * phi
        num = 1 + math.cos(a) + math.cos(b) + math.cos(c)
        den = 4 * math.cos(c / 2) * math.cos(a / 2) * math.cos(b / 2)
    elif k < 0:
        s = math.sqrt(-k)
        a, b, c = s * phi_x, s * phi_y, s * phi
        num = 1 + math.cosh(a) + math.cosh(b) + math.cosh(c)
        den = 4 * math.cosh(c / 2) * math.cosh(a / 2) * math.cosh(b / 2)
    else:
        p = (phi_x + phi_y + phi) / 2
        return math.sqrt(max(p * (p - phi_x) * (p - phi_y) * (p - phi), 0.0))
    return 2 * math.acos(min(1.0, max(-1.0, num / den))) / abs(k)


def angle_defect_area(a, b, c, k) -> float:
    """Gauss-Bonnet area |pi - angle sum| / |k| from the interior angles."""
    k = _kval(k)
    pts = [np.asarray(p, dtype=float) for p in (a, b, c)]
    total = 0.0
    for i in range(3):
        p, q, w = pts[i], pts[(i + 1) % 3], pts[(i + 2) % 3]
        t1 = log_map(p, q, k)
        t2 = log_map(p, w, k)
        cosang = inner(t1, t2, k) / (norm(t1, k) * norm(t2, k))
        total += math.acos(min(1.0, max(-1.0, cosang)))
    return abs(total - math.pi) / abs(k)
