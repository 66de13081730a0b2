"""SU(2) and SL(2, R) at the matrix level.

Basis conventions:

* SU2: X = 1/2 [[0, 1], [-1, 0]], Y = 1/2 [[0, i], [i, 0]], Z = 1/2 [[i, 0], [0, -i]]
  with [X, Y] = Z, [Y, Z] = X, [Z, X] = Y.
* SL2: X = 1/2 diag(1, -1), Y = 1/2 [[0, -1], [-1, 0]], Z = 1/2 [[0, -1], [1, 0]]
  with [X, Y] = Z, [Y, Z] = -X, [Z, X] = -Y.

Cylindrical coordinates are g = exp(phi (cos theta X + sin theta Y)) exp(z Z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import surface_geometry as sg

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi
# matrix entries below this are treated as 0 when deciding chart singularities
CHART_TOL = 1e-14


class GroupKind(str, Enum):
    SU2 = "su2"
    SL2 = "sl2"


def _kind(kind) -> GroupKind:
    return kind if isinstance(kind, GroupKind) else GroupKind(str(kind).lower())


_BASIS = {
    GroupKind.SU2: (
        0.5 * np.array([[0, 1], [-1, 0]], dtype=complex),
        0.5 * np.array([[0, 1j], [1j, 0]], dtype=complex),
        0.5 * np.array([[1j, 0], [0, -1j]], dtype=complex),
    ),
    GroupKind.SL2: (
        0.5 * np.array([[1, 0], [0, -1]], dtype=float),
        0.5 * np.array([[0, -1], [-1, 0]], dtype=float),
        0.5 * np.array([[0, -1], [1, 0]], dtype=float),
    ),
}


def basis(kind):
    """The (X, Y, Z) matrices of the Lie algebra."""
    return tuple(m.copy() for m in _BASIS[_kind(kind)])


def bracket(a, b):
    return a @ b - b @ a


class DegenerateChartError(ValueError):
    """Raised when a chart quantity is undefined (pole of the cylindrical chart)."""


@dataclass(frozen=True)
class AlgebraVec:
    """Coefficients on the (X, Y, Z) basis."""

    a: float
    b: float
    c: float

    def matrix(self, kind) -> np.ndarray:
        X, Y, Z = _BASIS[_kind(kind)]
        return self.a * X + self.b * Y + self.c * Z

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])


@dataclass(frozen=True)
class GroupElement:
    kind: GroupKind
    m: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kind", _kind(self.kind))
        dtype = complex if self.kind is GroupKind.SU2 else float
        m = np.asarray(self.m, dtype=dtype)
        if m.shape != (2, 2):
            raise ValueError("group element must be a 2x2 matrix")
        object.__setattr__(self, "m", m)

    def residuals(self):
        """(|det - 1|, unitarity residual); the second is 0 for SL2."""
        det = abs(np.linalg.det(self.m) - 1.0)
        if self.kind is GroupKind.SU2:
            uni = float(np.abs(self.m @ self.m.conj().T - np.eye(2)).max())
        else:
            uni = 0.0
        return float(det), uni

    def is_valid(self, tol=1e-12) -> bool:
        d, u = self.residuals()
        return d < tol and u < tol

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return group_mul(self, other)


@dataclass(frozen=True)
class CylCoords:
    """(phi, theta, z); theta in [0, 2pi), z in (-2pi, 2pi].

    ``theta_undefined`` marks phi = 0 (theta stored as 0) and
    ``z_undefined`` marks the SU2 antipode phi = pi, where z is lost.
    """

    phi: float
    theta: float
    z: float
    theta_undefined: bool = False
    z_undefined: bool = False

    def as_tuple(self):
        return (self.phi, self.theta, self.z)


def wrap_z(z):
    """Representative of z mod 4pi in (-2pi, 2pi]."""
    if -TWO_PI < z <= TWO_PI:
        return float(z)
    r = math.fmod(z + TWO_PI, FOUR_PI)
    if r <= 0.0:
        r += FOUR_PI
    return r - TWO_PI


def identity(kind) -> GroupElement:
    kind = _kind(kind)
    return GroupElement(kind, np.eye(2, dtype=complex if kind is GroupKind.SU2 else float))


def alg_exp(v, kind) -> GroupElement:
    """Closed-form exponential; every algebra element squares to a multiple of I."""
    kind = _kind(kind)
    if not isinstance(v, AlgebraVec):
        v = AlgebraVec(*map(float, v))
    m = v.matrix(kind)
    if kind is GroupKind.SU2:
        n = math.sqrt(v.a ** 2 + v.b ** 2 + v.c ** 2)
        if n == 0.0:
            return identity(kind)
        return GroupElement(kind, math.cos(n / 2) * np.eye(2) + (2 * math.sin(n / 2) / n) * m)
    q = (v.a ** 2 + v.b ** 2 - v.c ** 2) / 4.0
    if q > 0:
        r = math.sqrt(q)
        out = math.cosh(r) * np.eye(2) + (math.sinh(r) / r) * m
    elif q < 0:
        r = math.sqrt(-q)
        out = math.cos(r) * np.eye(2) + (math.sin(r) / r) * m
    else:
        out = np.eye(2) + m
    return GroupElement(kind, out)


def from_cylindrical(c, kind) -> GroupElement:
    kind = _kind(kind)
    phi, theta, z = (c.phi, c.theta, c.z) if isinstance(c, CylCoords) else map(float, c)
    if kind is GroupKind.SU2:
        m11 = math.cos(phi / 2) * np.exp(0.5j * z)
        m12 = np.exp(1j * (theta - z / 2)) * math.sin(phi / 2)
        return GroupElement(kind, np.array([[m11, m12], [-np.conj(m12), np.conj(m11)]]))
    ch, sh = math.cosh(phi / 2), math.sinh(phi / 2)
    cz, sz = math.cos(z / 2), math.sin(z / 2)
    ct, st = math.cos(theta + z / 2), math.sin(theta + z / 2)
    return GroupElement(kind, np.array([
        [ch * cz + sh * ct, -ch * sz - sh * st],
        [ch * sz - sh * st, ch * cz - sh * ct],
    ]))


def to_cylindrical(g: GroupElement) -> CylCoords:
    m = g.m
    if g.kind is GroupKind.SU2:
        a, b = abs(m[0, 0]), abs(m[0, 1])
        phi = 2.0 * math.atan2(b, a)
        z_undef = bool(a < CHART_TOL)
        z = 2.0 * float(np.angle(m[0, 0])) if not z_undef else 0.0
        th_undef = bool(b < CHART_TOL)
        theta = (float(np.angle(m[0, 1])) + z / 2) % TWO_PI if not th_undef else 0.0
    else:
        c1 = (m[0, 0] + m[1, 1]) / 2
        s1 = (m[1, 0] - m[0, 1]) / 2
        c2 = (m[0, 0] - m[1, 1]) / 2
        s2 = -(m[0, 1] + m[1, 0]) / 2
        z = 2.0 * math.atan2(s1, c1)
        h = math.hypot(c2, s2)
        phi = 2.0 * math.asinh(h)
        z_undef = False
        th_undef = bool(h < CHART_TOL)
        theta = (math.atan2(s2, c2) - z / 2) % TWO_PI if not th_undef else 0.0
    if z == -TWO_PI:
        z = TWO_PI
    if theta >= TWO_PI:
        theta = 0.0
    return CylCoords(phi, theta, z, th_undef, z_undef)


def group_mul(g: GroupElement, h: GroupElement) -> GroupElement:
    if g.kind is not h.kind:
        raise ValueError("cannot multiply elements of different groups")
    return GroupElement(g.kind, g.m @ h.m)


def inverse(g: GroupElement) -> GroupElement:
    m = g.m
    # det = 1, so the adjugate is the inverse
    return GroupElement(g.kind, np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]))


def conjugate_rotate(alpha, beta, kind) -> AlgebraVec:
    """v' with exp(alpha Z) exp(beta X) = exp(v') exp(alpha Z).

    Equals beta (cos(alpha) X + sin(alpha) [Z, X]); [Z, X] = Y on SU2, -Y on SL2.
    """
    sgn = 1.0 if _kind(kind) is GroupKind.SU2 else -1.0
    return AlgebraVec(beta * math.cos(alpha), sgn * beta * math.sin(alpha), 0.0)


def bch_first_order(alpha, t, kind) -> np.ndarray:
    """First-order coefficient delta with exp(alpha Z) exp(eps t) = exp(alpha Z + eps delta) + O(eps^2).

    t is given on (X, Y, Z). With u = Z, v = X, w = [Z, X], write
    t = rho v + tw w + tu u; the ad_u-orbit of the v, w part rotates, and the
    u part commutes with u.
    """
    kind = _kind(kind)
    sgn = 1.0 if kind is GroupKind.SU2 else -1.0
    tx, ty, tz = map(float, t)
    rho, tw = tx, sgn * ty
    h = alpha / 2.0
    cot = math.cos(h) / math.sin(h) if alpha != 0 else math.inf
    # psi(-ad_{alpha u}) acting on the rotation plane
    if alpha == 0:
        pv, pw = rho, tw
    else:
        pv = h * cot * rho - h * tw
        pw = h * rho + h * cot * tw
    return np.array([pv, sgn * pw, tz])


def su2_quaternion(g: GroupElement) -> np.ndarray:
    """Quaternion (w, i, j, k) of an SU2 matrix [[x1 + i x2, y1 + i y2], ...].

    The identification is q = x1 + y1 i + y2 j + x2 k.
    """
    m = g.m
    return np.array([m[0, 0].real, m[0, 1].real, m[0, 1].imag, m[0, 0].imag])


def quat_mul(p, q) -> np.ndarray:
    p0, p1, p2, p3 = p
    q0, q1, q2, q3 = q
    return np.array([
        p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
        p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
        p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
        p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
    ])


def hopf_point(g: GroupElement) -> np.ndarray:
    """Unit vector q k q* in R^3 for the quaternion q of an SU2 element."""
    if g.kind is not GroupKind.SU2:
        raise ValueError("hopf projection needs an SU2 element")
    q = su2_quaternion(g)
    qc = q * np.array([1.0, -1.0, -1.0, -1.0])
    return quat_mul(quat_mul(q, np.array([0.0, 0.0, 0.0, 1.0])), qc)[1:]


def hopf_project(g: GroupElement) -> sg.PolarCoords:
    return sg.to_polar(hopf_point(g), 1.0)


def mobius_point(g: GroupElement) -> complex:
    """g acting on i in the upper half-plane."""
    if g.kind is not GroupKind.SL2:
        raise ValueError("half-plane projection needs an SL2 element")
    a, b = g.m[0]
    c, d = g.m[1]
    return (a * 1j + b) / (c * 1j + d)


def half_plane_to_hyperboloid(w: complex) -> np.ndarray:
    u, v = w.real, w.imag
    n2 = u * u + v * v
    return np.array([(n2 - 1) / (2 * v), -u / v, (n2 + 1) / (2 * v)])


def mobius_project(g: GroupElement) -> sg.PolarCoords:
    return sg.to_polar(half_plane_to_hyperboloid(mobius_point(g)), -1.0)


def project(g: GroupElement) -> np.ndarray:
    """Base point on the unit sphere (SU2) or unit hyperboloid (SL2)."""
    if g.kind is GroupKind.SU2:
        return hopf_point(g)
    return half_plane_to_hyperboloid(mobius_point(g))


def left_invariant_frame(c, kind):
    """(Xbar, Ybar) as coefficient triples on (d_phi, d_theta, d_z)."""
    kind = _kind(kind)
    phi, theta, z = (c.phi, c.theta, c.z) if isinstance(c, CylCoords) else map(float, c)
    if phi <= 0.0:
        raise DegenerateChartError("left-invariant fields are singular at phi = 0")
    if kind is GroupKind.SU2:
        if phi >= math.pi:
            raise DegenerateChartError("left-invariant fields are singular at phi = pi")
        t = math.tan(phi / 2)
        s = 0.5 * (1.0 / t + t)
        d = theta - z
        xb = np.array([math.cos(d), -math.sin(d) * s, -t * math.sin(d)])
        yb = np.array([math.sin(d), math.cos(d) * s, t * math.cos(d)])
        return xb, yb
    t = math.tanh(phi / 2)
    s = 0.5 * (1.0 / t - t)
    d = theta + z
    xb = np.array([math.cos(d), -math.sin(d) * s, -t * math.sin(d)])
    yb = np.array([math.sin(d), math.cos(d) * s, t * math.cos(d)])
    return xb, yb


def sublaplacian_coeffs(phi, kind):
    """(c_phiphi, c_thetatheta, c_zz, c_thetaz, c_phi) of the printed operator.

    The generator of the group Brownian motion is half of this operator.
    """
    kind = _kind(kind)
    if phi <= 0.0:
        raise DegenerateChartError("subLaplacian chart is singular at phi = 0")
    if kind is GroupKind.SU2:
        if phi >= math.pi:
            raise DegenerateChartError("subLaplacian chart is singular at phi = pi")
        return (1.0, 1.0 / math.sin(phi) ** 2, math.tan(phi / 2) ** 2,
                1.0 / math.cos(phi / 2) ** 2, math.cos(phi) / math.sin(phi))
    return (1.0, 1.0 / math.sinh(phi) ** 2, math.tanh(phi / 2) ** 2,
            1.0 / math.cosh(phi / 2) ** 2, math.cosh(phi) / math.sinh(phi))


def relative_cylindrical(x: GroupElement, y: GroupElement) -> CylCoords:
    """Cylindrical coordinates of x^-1 y."""
    return to_cylindrical(group_mul(inverse(x), y))


def cc_proxy(g: GroupElement) -> float:
    """phi^2 + |z| with z the (-2pi, 2pi] representative."""
    c = to_cylindrical(g)
    return c.phi ** 2 + abs(wrap_z(c.z))


def random_element(kind, rng, phi_max=None) -> GroupElement:
    """Element with uniform theta, z and phi uniform on (0, phi_max)."""
    kind = _kind(kind)
    if phi_max is None:
        phi_max = math.pi if kind is GroupKind.SU2 else 3.0
    phi = rng.uniform(0.0, phi_max)
    return from_cylindrical((phi, rng.uniform(0, TWO_PI), rng.uniform(-TWO_PI, TWO_PI)), kind)
