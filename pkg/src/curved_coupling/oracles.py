"""Independent numerical oracles for the closed-form geometry.

Each suite returns a dict with ``passed``, the measured worst error and the
tolerance used. Tolerances are multiplied by the profile factor.
"""
from __future__ import annotations

import math
import time

import numpy as np

from . import coupled_sde as cs
from . import lie_group as lg
from . import surface_geometry as sg

PROFILES = {"default": 1.0, "strict": 0.5, "loose": 10.0}

HESSIAN_TOL = 1e-5
AREA_TOL = 1e-3
MATRIX_TOL = 1e-12
FIELD_TOL = 1e-6
FIELD_EPS = 1e-5
BRACKET_TOL = 1e-15
TRIANGLE_TOL = 1e-9
GENERATOR_Z = 3.0


def _expm(m):
    from scipy.linalg import expm
    return expm(m)


def random_pair(k, rng, r_min=0.3, margin=0.3, phi_max=2.0):
    """Two points at distance in (r_min, i(M) - margin)."""
    i_m = sg.injectivity_radius(k)
    top = min(phi_max, i_m / 2) if math.isfinite(i_m) else phi_max
    while True:
        x = sg.embed(sg.PolarCoords(rng.uniform(0, top), rng.uniform(0, 2 * math.pi)), k)
        y = sg.embed(sg.PolarCoords(rng.uniform(0, top), rng.uniform(0, 2 * math.pi)), k)
        r = sg.distance(x, y, k)
        if r_min < r < i_m - margin:
            return x, y


def fd_second(f, h=2e-3):
    """Richardson-extrapolated central second difference at 0."""
    def c(s):
        return (f(s) - 2.0 * f(0.0) + f(-s)) / (s * s)
    return (4.0 * c(h / 2) - c(h)) / 3.0


def hessian_suite(n=1000, ks=(1.0, -1.0), rng=None, factor=1.0):
    rng = np.random.default_rng(1) if rng is None else rng
    worst = {}
    for k in ks:
        w = 0.0
        for _ in range(n):
            x, y = random_pair(k, rng)
            u = sg.project_to_tangent(x, rng.normal(size=3), k)
            v = sg.project_to_tangent(y, rng.normal(size=3), k)
            _, hess = sg.distance_derivatives(x, y, u, v, k)
            fd = fd_second(lambda s: sg.distance(sg.exp_map(x, s * u, k), sg.exp_map(y, s * v, k), k))
            scale = max(abs(hess), sg.inner(u, u, k) + sg.inner(v, v, k))
            w = max(w, abs(fd - hess) / scale)
        worst[k] = w
    tol = HESSIAN_TOL * factor
    return {"suite": "hessian", "worst": worst, "tol": tol, "passed": max(worst.values()) < tol}


def _geodesic(p, q, k, s):
    """Points and velocities of the geodesic from p to q at parameters s (array)."""
    L = sg.log_map(p, q, k)
    s = np.asarray(s, dtype=float)[:, None]
    if k == 0:
        return p + s * L, np.broadcast_to(L, (s.shape[0], 3))
    r = sg.norm(L, k)
    e = L / r
    a = math.sqrt(abs(k))
    t = a * s * r
    if k > 0:
        return np.cos(t) * p + np.sin(t) / a * e, r * (-a * np.sin(t) * p + np.cos(t) * e)
    return np.cosh(t) * p + np.sinh(t) / a * e, r * (a * np.sinh(t) * p + np.cosh(t) * e)


def swept_area_rate(x, y, u, v, k, zeta, h=1e-4, n=201):
    """d/dzeta of the area swept by the geodesic from exp_x(zeta u) to
    exp_y(zeta v): Simpson integral of det(c', dc/dzeta) along the geodesic."""
    from scipy.integrate import simpson
    s = np.linspace(0.0, 1.0, n)
    c, vel = _geodesic(sg.exp_map(x, zeta * u, k), sg.exp_map(y, zeta * v, k), k, s)
    cp, _ = _geodesic(sg.exp_map(x, (zeta + h) * u, k), sg.exp_map(y, (zeta + h) * v, k), k, s)
    cm, _ = _geodesic(sg.exp_map(x, (zeta - h) * u, k), sg.exp_map(y, (zeta - h) * v, k), k, s)
    dz = (cp - cm) / (2 * h)
    # oriented area form: unit normal dotted with the cross product
    normal = np.tile([0.0, 0.0, 1.0], (n, 1)) if k == 0 else c * math.sqrt(abs(k))
    vals = np.einsum("ij,ij->i", normal, np.cross(vel, dz))
    return simpson(vals, x=s)


def area_suite(n=200, ks=(1.0, -1.0), rng=None, factor=1.0, h2=1e-3):
    """dA and Hess A against the integrated swept area; n configurations in total."""
    rng = np.random.default_rng(2) if rng is None else rng
    worst_d, worst_h = 0.0, 0.0
    for i in range(n):
        k = ks[i % len(ks)]
        x, y = random_pair(k, rng)
        u = sg.project_to_tangent(x, rng.normal(size=3), k)
        v = sg.project_to_tangent(y, rng.normal(size=3), k)
        dA, HA = sg.area_derivatives(x, y, u, v, k)
        g0 = swept_area_rate(x, y, u, v, k, 0.0)
        gp = (swept_area_rate(x, y, u, v, k, h2) - swept_area_rate(x, y, u, v, k, -h2)) / (2 * h2)
        sc = sg.inner(u, u, k) + sg.inner(v, v, k)
        worst_d = max(worst_d, abs(g0 - dA) / max(abs(dA), math.sqrt(sc)))
        worst_h = max(worst_h, abs(gp - HA) / max(abs(HA), sc))
    tol = AREA_TOL * factor
    return {"suite": "area", "worst": {"dA": worst_d, "hessA": worst_h}, "tol": tol,
            "passed": max(worst_d, worst_h) < tol}


def _random_cyl(kind, rng):
    phi_max = 3.0
    return (rng.uniform(0.05, phi_max), rng.uniform(0, 2 * math.pi), rng.uniform(-6.2, 6.2))


def bracket_suite(factor=1.0):
    w = {}
    for kind in ("su2", "sl2"):
        X, Y, Z = lg.basis(kind)
        sgn = 1.0 if kind == "su2" else -1.0
        w[kind] = max(np.abs(lg.bracket(X, Y) - Z).max(),
                      np.abs(lg.bracket(Y, Z) - sgn * X).max(),
                      np.abs(lg.bracket(Z, X) - sgn * Y).max())
    tol = BRACKET_TOL * factor
    return {"suite": "brackets", "worst": w, "tol": tol, "passed": max(w.values()) <= tol}


def matrix_suite(n=1000, rng=None, factor=1.0):
    """Cylindrical chart matrix vs exp(phi(cos th X + sin th Y)) exp(zZ), the
    closed-form algebra exponential vs expm, and the conjugation rule."""
    rng = np.random.default_rng(3) if rng is None else rng
    w = {}
    for kind in ("su2", "sl2"):
        X, Y, Z = lg.basis(kind)
        chart = expo = conj = 0.0
        for _ in range(n):
            phi, th, z = _random_cyl(kind, rng)
            g = lg.from_cylindrical((phi, th, z), kind)
            ref = _expm(phi * (math.cos(th) * X + math.sin(th) * Y)) @ _expm(z * Z)
            chart = max(chart, np.abs(g.m - ref).max())
            v = rng.normal(size=3)
            ref = _expm(lg.AlgebraVec(*v).matrix(kind))
            expo = max(expo, np.abs(lg.alg_exp(v, kind).m - ref).max() / max(1.0, np.abs(ref).max()))
            al, be = rng.normal(size=2) * 2
            lhs = _expm(al * Z) @ _expm(be * X)
            rhs = lg.alg_exp(lg.conjugate_rotate(al, be, kind), kind).m @ _expm(al * Z)
            conj = max(conj, np.abs(lhs - rhs).max())
        w[kind] = {"chart": chart, "alg_exp": expo, "conjugation": conj}
    tol = MATRIX_TOL * factor
    worst = max(max(d.values()) for d in w.values())
    return {"suite": "matrix", "worst": w, "tol": tol, "passed": worst < tol}


def bch_suite(rng=None, factor=1.0):
    """First-order BCH term: the residual of
    exp(aZ) exp(eps t) = exp(aZ + eps d(a, t)) must shrink like eps^2."""
    rng = np.random.default_rng(4) if rng is None else rng
    slopes = {}
    for kind in ("su2", "sl2"):
        Z = lg.basis(kind)[2]
        worst = math.inf
        for _ in range(5):
            al = rng.uniform(0.5, 2.0)
            t = rng.normal(size=3)
            d = lg.bch_first_order(al, t, kind)
            res = []
            for eps in (1e-2, 1e-3):
                lhs = _expm(al * Z) @ _expm(eps * lg.AlgebraVec(*t).matrix(kind))
                rhs = _expm(al * Z + eps * lg.AlgebraVec(*d).matrix(kind))
                res.append(np.abs(lhs - rhs).max())
            worst = min(worst, math.log10(res[0] / res[1]))
        slopes[kind] = worst
    # second order means a slope of 2; anything under 1.8 is a first-order error
    return {"suite": "bch", "worst": slopes, "tol": 1.8, "passed": min(slopes.values()) > 1.8}


def _wrap_diff(d):
    d = np.array(d, dtype=float)
    d[1] = (d[1] + math.pi) % (2 * math.pi) - math.pi
    d[2] = (d[2] + 2 * math.pi) % (4 * math.pi) - 2 * math.pi
    return d


def fields_suite(n=300, rng=None, factor=1.0, eps=FIELD_EPS):
    """Left-invariant fields in cylindrical coordinates vs central differences
    of the chart along g exp(+-eps X), g exp(+-eps Y)."""
    rng = np.random.default_rng(5) if rng is None else rng
    w = {}
    for kind in ("su2", "sl2"):
        X, Y, _ = lg.basis(kind)
        ex = {M: (_expm(eps * B), _expm(-eps * B)) for M, B in (("X", X), ("Y", Y))}
        worst = 0.0
        for _ in range(n):
            c = (rng.uniform(0.2, 2.8), rng.uniform(0, 2 * math.pi), rng.uniform(-5.0, 5.0))
            g = lg.from_cylindrical(c, kind)
            xb, yb = lg.left_invariant_frame(c, kind)
            for M, F in (("X", xb), ("Y", yb)):
                a = lg.to_cylindrical(lg.GroupElement(kind, g.m @ ex[M][0])).as_tuple()
                b = lg.to_cylindrical(lg.GroupElement(kind, g.m @ ex[M][1])).as_tuple()
                worst = max(worst, np.abs(_wrap_diff(np.subtract(a, b)) / (2 * eps) - F).max())
        w[kind] = worst
    tol = FIELD_TOL * factor
    return {"suite": "fields", "worst": w, "tol": tol, "passed": max(w.values()) < tol}


def fiber_area(x, y):
    """(z_M, R, Heron area) for a pair: z_M is the fiber coordinate of x^-1 y
    corrected by the individual fiber coordinates, wrapped to (-2pi, 2pi]."""
    k = 1.0 if x.kind is lg.GroupKind.SU2 else -1.0
    cx, cy = lg.to_cylindrical(x), lg.to_cylindrical(y)
    c = lg.relative_cylindrical(x, y)
    zM = lg.wrap_z(c.z - (cy.z - cx.z))
    R = sg.distance(lg.project(x), lg.project(y), k)
    return zM, R, sg.heron_area(cx.phi, cy.phi, R, k), cx, cy, c


def triangle_suite(n=1000, kinds=("su2",), rng=None, factor=1.0):
    """|z_M| against the Heron area of (pole, pi(x), pi(y)) and the sign rule
    sign z_M = sign sin(theta_x - theta_y)."""
    rng = np.random.default_rng(6) if rng is None else rng
    out = {}
    for kind in kinds:
        w = 0.0
        wphi = 0.0
        bad_sign = 0
        for _ in range(n):
            x, y = lg.random_element(kind, rng), lg.random_element(kind, rng)
            zM, R, H, cx, cy, c = fiber_area(x, y)
            w = max(w, abs(abs(zM) - H))
            wphi = max(wphi, abs(c.phi - R))
            bad_sign += int(np.sign(zM) != np.sign(math.sin(cx.theta - cy.theta)))
        out[kind] = {"area": w, "phi": wphi, "sign_mismatches": bad_sign}
    tol = TRIANGLE_TOL * factor
    ok = all(d["area"] < tol and d["phi"] < tol and d["sign_mismatches"] == 0 for d in out.values())
    return {"suite": "triangle", "worst": out, "tol": tol, "passed": ok}


def _test_functions():
    # (name, f, printed operator applied to f given the coefficient tuple)
    def f1(p, t, z):
        return np.cos(p)

    def L1(p, t, z, c):
        return -c[0] * np.cos(p) - c[4] * np.sin(p)

    def f2(p, t, z):
        return np.sin(p) * np.cos(t)

    def L2(p, t, z, c):
        return (-c[0] * np.sin(p) * np.cos(t) - c[1] * np.sin(p) * np.cos(t)
                + c[4] * np.cos(p) * np.cos(t))

    def f3(p, t, z):
        return np.sin(p) * np.sin(t + z)

    def L3(p, t, z, c):
        s = np.sin(t + z)
        return (-c[0] * np.sin(p) * s - (c[1] + c[2] + c[3]) * np.sin(p) * s
                + c[4] * np.cos(p) * s)

    return (("cos phi", f1, L1), ("sin phi cos theta", f2, L2), ("sin phi sin(theta+z)", f3, L3))


def generator_suite(n=1_000_000, dt=1e-4, start=(1.0, 0.4, 0.7), kind="su2", rng=None, factor=1.0):
    """One-step expectations of the cylindrical diffusion against half the
    subLaplacian applied to three test functions (z-scores)."""
    rng = np.random.default_rng(7) if rng is None else rng
    phi0, th0, z0 = start
    path = cs.sample_group_bm(kind, dt, 1, rng, phi0=np.full(n, phi0), theta0=th0, z0=z0)
    p1, t1, z1 = path.phi[1], path.theta[1], path.z[1]
    c = lg.sublaplacian_coeffs(phi0, kind)
    res = {}
    for name, f, L in _test_functions():
        inc = f(p1, t1, z1) - f(phi0, th0, z0)
        target = 0.5 * L(phi0, th0, z0, c) * dt
        se = inc.std(ddof=1) / math.sqrt(n)
        res[name] = float((inc.mean() - target) / se)
    tol = GENERATOR_Z * factor
    return {"suite": "generator", "worst": res, "tol": tol,
            "passed": max(abs(v) for v in res.values()) <= tol}


SUITES = {
    "brackets": bracket_suite,
    "matrix": matrix_suite,
    "bch": bch_suite,
    "fields": fields_suite,
    "hessian": hessian_suite,
    "area": area_suite,
    "triangle": triangle_suite,
    "generator": generator_suite,
}


def run_suite(name, profile="default"):
    factor = PROFILES[profile]
    names = list(SUITES) if name == "all" else [name]
    out = []
    for n in names:
        t0 = time.perf_counter()
        r = SUITES[n](factor=factor)
        r["passed"] = bool(r["passed"])
        r["seconds"] = time.perf_counter() - t0
        out.append(r)
    return out
