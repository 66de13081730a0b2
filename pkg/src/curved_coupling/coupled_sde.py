"""Coupled Brownian motions on constant-curvature surfaces.

Two backends share the control convention dV = K dU + Khat dW:

* the reduced system for (R, A), Euler-Maruyama on the closed-form moments;
* the on-manifold system, which moves X and Y by exponential maps in the
  frame pair and integrates the swept area with its second-order (Ito)
  expansion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import lie_group as lg
from . import surface_geometry as sg

STRATEGIES = ("synchronous", "reflection", "perverse", "fixed_distance", "reflection_noise")
DELTA_FLOOR = 1e-6
DELTA_CEIL = 1e-6
CONTROL_TOL = 1e-12


@dataclass(frozen=True)
class CouplingControl:
    K: np.ndarray
    Khat: np.ndarray

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float).reshape(2, 2)
        Kh = np.asarray(self.Khat, dtype=float).reshape(2, 2)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "Khat", Kh)
        res = np.abs(K @ K.T + Kh @ Kh.T - np.eye(2)).max()
        if not res < CONTROL_TOL:
            raise ValueError(f"inadmissible control: |KK^T + KhKh^T - I| = {res:.3g}")

    def dV(self, dU, dW):
        return self.K @ np.asarray(dU, dtype=float) + self.Khat @ np.asarray(dW, dtype=float)


@dataclass(frozen=True)
class MomentSet:
    """Per-unit-time drifts and (co)variations of (R, A)."""

    qvR: float
    driftR: float
    qvA: float
    driftA: float
    covRA: float

    def as_dict(self):
        return {"qvR": self.qvR, "driftR": self.driftR, "qvA": self.qvA,
                "driftA": self.driftA, "covRA": self.covRA}


@dataclass
class NoiseSource:
    """Independent Gaussian stream keyed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        self.state = np.random.Generator(np.random.PCG64(ss))

    def increments(self, dt, size=2):
        return self.state.normal(0.0, math.sqrt(dt), size=size)


@dataclass(frozen=True)
class ReducedState:
    R: float
    A: float
    t: float = 0.0


@dataclass(frozen=True)
class CouplingState:
    X: np.ndarray
    Y: np.ndarray
    frames: sg.FramePair
    R: float
    A: float
    t: float = 0.0

    def wrapped_area(self):
        return lg.wrap_z(self.A)


def _noise_trig(R, k):
    if k <= 0:
        raise ValueError("the noise strategies need k > 0")
    s = math.sqrt(k)
    if not 0.0 < R < math.pi / s:
        raise ValueError("R must lie in (0, i(M)) for the noise strategies")
    return math.cos(s * R), math.sin(s * R)


def strategy_control(name: str, R=None, k=1.0) -> CouplingControl:
    """K and Khat of the named co-adapted coupling."""
    z = np.zeros((2, 2))
    if name == "synchronous":
        return CouplingControl(np.eye(2), z)
    if name == "reflection":
        return CouplingControl(np.diag([-1.0, 1.0]), z)
    if name == "perverse":
        return CouplingControl(np.diag([1.0, -1.0]), z)
    if name == "fixed_distance":
        c, s = _noise_trig(R, k)
        return CouplingControl(np.diag([1.0, c]), np.diag([0.0, s]))
    if name == "reflection_noise":
        c, s = _noise_trig(R, k)
        return CouplingControl(np.diag([-1.0, c]), np.diag([0.0, s]))
    raise ValueError(f"unknown strategy {name!r}; expected one of {STRATEGIES}")


def _check_radius(R, k):
    i_m = sg.injectivity_radius(k)
    if not 0.0 < R < i_m:
        raise ValueError(f"R={R!r} outside (0, i(M))")


def moments(ctrl: CouplingControl, R, k=1.0) -> MomentSet:
    _check_radius(R, k)
    K = ctrl.K
    af = sg.area_factor(R, k)
    qvR = 2.0 * (1.0 - K[0, 0])
    driftR = (sg.cs_k(R, k) - K[1, 1]) / sg.sn_k(R, k)
    qvA = 2.0 * af * af * (1.0 + K[1, 1])
    driftA = (K[0, 1] - K[1, 0]) / (2.0 * sg._half_cos2(R, k))
    covRA = af * (K[0, 1] - K[1, 0])
    return MomentSet(qvR, driftR, qvA, driftA, covRA)


def step_reduced(s: ReducedState, ctrl: CouplingControl, dU, dW, dt, k=1.0):
    """One Euler-Maruyama step of (R, A). Returns (state, event) with event
    'floor' or 'ceil' when R had to be clamped, else None."""
    u1, u2 = float(dU[0]), float(dU[1])
    w1, w2 = float(dW[0]), float(dW[1])
    if not (math.isfinite(u1) and math.isfinite(u2) and math.isfinite(w1)
            and math.isfinite(w2) and math.isfinite(dt)):
        raise ValueError("non-finite increments")
    _check_radius(s.R, k)
    (k11, k12), (k21, k22) = ctrl.K.tolist()
    (h11, h12), (h21, h22) = ctrl.Khat.tolist()
    # componentwise so that fixed distance keeps R bit-identical
    dV1 = k11 * u1 + k12 * u2 + h11 * w1 + h12 * w2
    dV2 = k21 * u1 + k22 * u2 + h21 * w1 + h22 * w2
    driftR = (sg.cs_k(s.R, k) - k22) / sg.sn_k(s.R, k)
    driftA = (k12 - k21) / (2.0 * sg._half_cos2(s.R, k))
    R = s.R + (dV1 - u1) + driftR * dt
    A = s.A + sg.area_factor(s.R, k) * (u2 + dV2) + driftA * dt
    event = None
    i_m = sg.injectivity_radius(k)
    hi = i_m - DELTA_CEIL if math.isfinite(i_m) else math.inf
    if R < DELTA_FLOOR:
        R, event = DELTA_FLOOR, "floor"
    elif R > hi:
        R, event = hi, "ceil"
    return ReducedState(R, A, s.t + dt), event


def initial_state(R0, k=1.0, A0=0.0, theta=0.0) -> CouplingState:
    """X at the north pole, Y at distance R0 in direction theta."""
    _check_radius(R0, k)
    X = sg.north_pole(k)
    Y = sg.embed(sg.PolarCoords(R0, theta), k)
    return CouplingState(X, Y, sg.frame_pair(X, Y, k), sg.distance(X, Y, k), float(A0), 0.0)


def area_increment(frames_r, u, v, k):
    """dA + 1/2 Hess A for frame components u=(u1,u2), v=(v1,v2) at distance r."""
    r = frames_r
    u1, u2 = u
    v1, v2 = v
    return sg.area_factor(r, k) * (u2 + v2) + 0.5 * sg.hessian_area(r, u1, u2, v1, v2, k)


def step_manifold(s: CouplingState, ctrl: CouplingControl, dU, dW, dt, k=1.0):
    """One step of the frame-based system. Returns (state, event); the event
    'floor' or 'ceil' reports a boundary crossing and the returned state is
    the unclamped pre-frame state (frames of the old configuration)."""
    dU = np.asarray(dU, dtype=float)
    dV = ctrl.dV(dU, dW)
    f = s.frames
    X = sg.project_to_model(sg.exp_map(s.X, dU[0] * f.e1x + dU[1] * f.e2x, k), k)
    Y = sg.project_to_model(sg.exp_map(s.Y, dV[0] * f.e1y + dV[1] * f.e2y, k), k)
    A = s.A + area_increment(s.R, dU, dV, k)
    R = sg.distance(X, Y, k)
    i_m = sg.injectivity_radius(k)
    hi = i_m - DELTA_CEIL if math.isfinite(i_m) else math.inf
    if R <= DELTA_FLOOR or R >= hi:
        return replace(s, X=X, Y=Y, R=R, A=A, t=s.t + dt), ("floor" if R <= DELTA_FLOOR else "ceil")
    return CouplingState(X, Y, sg.frame_pair(X, Y, k), R, A, s.t + dt), None


def one_step_samples(s: CouplingState, ctrl: CouplingControl, dU, dW, k=1.0):
    """Vectorised manifold step from a common state; dU, dW have shape (n, 2).

    Returns (dR, dA) arrays. Used by the moment validation suites.
    """
    dU = np.asarray(dU, dtype=float)
    dW = np.asarray(dW, dtype=float)
    dV = dU @ ctrl.K.T + dW @ ctrl.Khat.T
    f = s.frames
    X = _exp_batch(s.X, dU[:, :1] * f.e1x + dU[:, 1:] * f.e2x, k)
    Y = _exp_batch(s.Y, dV[:, :1] * f.e1y + dV[:, 1:] * f.e2y, k)
    R = _distance_batch(X, Y, k)
    r = s.R
    # area increment: the scalar area_increment formula on arrays
    af = sg.area_factor(r, k)
    c2 = sg._half_cos2(r, k)
    t2 = sg._half_tan2(r, k)
    u1, u2, v1, v2 = dU[:, 0], dU[:, 1], dV[:, 0], dV[:, 1]
    dA = af * (u2 + v2) + 0.5 * ((u2 * v1 - v2 * u1) / c2 + t2 * (v2 * v1 - u2 * u1))
    return R - s.R, dA


def _minkowski(a, b):
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] - a[..., 2] * b[..., 2]


def _exp_batch(x, V, k):
    if k == 0:
        return x + V
    s = math.sqrt(abs(k))
    if k > 0:
        n = np.linalg.norm(V, axis=1)
    else:
        n = np.sqrt(np.maximum(_minkowski(V, V), 0.0))
    a = s * n
    safe = np.where(a > 0, a, 1.0)
    if k > 0:
        c, sc = np.cos(a), np.where(a > 0, np.sin(safe) / safe, 1.0)
    else:
        c, sc = np.cosh(a), np.where(a > 0, np.sinh(safe) / safe, 1.0)
    return c[:, None] * x[None, :] + sc[:, None] * V


def _distance_batch(X, Y, k):
    if k > 0:
        s = math.sqrt(k)
        cr = np.linalg.norm(np.cross(X, Y), axis=1) * k
        return np.arctan2(cr, np.einsum("ij,ij->i", X, Y) * k) / s
    if k < 0:
        s = math.sqrt(-k)
        D = X - Y
        q = np.maximum(_minkowski(D, D), 0.0)
        return 2.0 * np.arcsinh(s * np.sqrt(q) / 2.0) / s
    return np.linalg.norm(X - Y, axis=1)


def deterministic_radius(name, R0, t, k=1.0):
    """Closed-form R_t for the synchronous and perverse couplings (k > 0)."""
    if k <= 0:
        raise ValueError("closed forms are given for k > 0 only")
    s = math.sqrt(k)
    if not 0.0 <= R0 <= math.pi / s:
        raise ValueError("R0 outside [0, i(M)]")
    e = np.exp(-k * np.asarray(t, dtype=float) / 2.0)
    if name == "synchronous":
        out = 2.0 / s * np.arcsin(e * math.sin(s * R0 / 2.0))
    elif name == "perverse":
        out = 2.0 / s * np.arccos(e * math.cos(s * R0 / 2.0))
    else:
        raise ValueError("closed form available for 'synchronous' and 'perverse'")
    return float(out) if np.ndim(out) == 0 else out


def synchronous_time_to(R_from, R_to, k=1.0):
    """Duration for the synchronous coupling to bring R_from down to R_to."""
    s = math.sqrt(k)
    return (2.0 / k) * math.log(math.sin(s * R_from / 2) / math.sin(s * R_to / 2))


def synchronous_area_variance(R_from, R_to, k=1.0):
    """Variance of A accumulated while the synchronous coupling takes R_from to R_to."""
    s = math.sqrt(k)
    return (4.0 / k ** 2) * math.log(math.cos(s * R_to / 2) ** 2 / math.cos(s * R_from / 2) ** 2)


@dataclass
class GroupPath:
    """Euler path of the group Brownian motion in cylindrical coordinates."""

    t: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    z: np.ndarray
    area: np.ndarray
    reflections: int


def group_bm_coefficients(phi, kind):
    """(drift_phi, sigma_theta, sigma_z) with dphi = dB1 + drift dt,
    dtheta = sigma_theta dB2, dz = sigma_z dB2."""
    kind = lg._kind(kind)
    if kind is lg.GroupKind.SU2:
        return 0.5 / np.tan(phi), 1.0 / np.sin(phi), np.tan(phi / 2)
    return 0.5 / np.tanh(phi), 1.0 / np.sinh(phi), np.tanh(phi / 2)


def sample_group_bm(kind, dt, n_steps, rng, phi0=math.pi / 2, theta0=0.0, z0=0.0, delta=1e-3):
    """Euler-Maruyama path(s) of the Brownian motion generated by half the
    printed subLaplacian. phi0 may be an array for independent paths.

    The swept area integral of (1 - cos phi) dtheta (cosh phi - 1 for SL2)
    is accumulated alongside z from the same increments.
    """
    kind = lg._kind(kind)
    phi = np.array(phi0, dtype=float, ndmin=1)
    n = phi.shape[0]
    theta = np.full(n, float(theta0)) if np.ndim(theta0) == 0 else np.array(theta0, dtype=float)
    z = np.full(n, float(z0)) if np.ndim(z0) == 0 else np.array(z0, dtype=float)
    area = np.zeros(n)
    upper = math.pi - delta if kind is lg.GroupKind.SU2 else math.inf
    out = {key: np.empty((n_steps + 1, n)) for key in ("phi", "theta", "z", "area")}
    out["phi"][0], out["theta"][0], out["z"][0], out["area"][0] = phi, theta, z, area
    sq = math.sqrt(dt)
    refl = 0
    for i in range(n_steps):
        b1 = rng.normal(0.0, sq, n)
        b2 = rng.normal(0.0, sq, n)
        drift, s_th, s_z = group_bm_coefficients(phi, kind)
        if kind is lg.GroupKind.SU2:
            a_coef = (1.0 - np.cos(phi)) * s_th
        else:
            a_coef = (np.cosh(phi) - 1.0) * s_th
        phi = phi + b1 + drift * dt
        theta = theta + s_th * b2
        z = z + s_z * b2
        area = area + a_coef * b2
        low = phi < delta
        high = phi > upper
        if low.any() or high.any():
            refl += int(low.sum() + high.sum())
            phi = np.where(low, 2 * delta - phi, phi)
            phi = np.where(high, 2 * upper - phi, phi)
        out["phi"][i + 1], out["theta"][i + 1], out["z"][i + 1], out["area"][i + 1] = phi, theta, z, area
    t = dt * np.arange(n_steps + 1)
    return GroupPath(t, out["phi"], out["theta"], out["z"], out["area"], refl)
