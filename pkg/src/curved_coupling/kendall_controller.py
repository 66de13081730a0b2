"""Switching coupling that drives both the distance and the swept area to zero.

Reflection coupling runs until |A|/R^2 reaches kappa, fixed-distance coupling
then runs until it is back at kappa - epsilon, and so on. A trial stops when
R <= delta_R during reflection (Coupled), when R reaches i(M) - eta
(HitEta; restarted by ``run_successful``), or at T_max (TimedOut).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from . import coupled_sde as cs
from . import surface_geometry as sg


class Phase(str, Enum):
    REFLECTION = "reflection"
    FIXED_DISTANCE = "fixed_distance"


class Outcome(str, Enum):
    COUPLED = "Coupled"
    HIT_ETA = "HitEta"
    TIMED_OUT = "TimedOut"


_OUTCOMES = {_kernels.OUT_COUPLED: Outcome.COUPLED,
             _kernels.OUT_HIT_ETA: Outcome.HIT_ETA,
             _kernels.OUT_TIMED_OUT: Outcome.TIMED_OUT}

MODE_NAMES = {_kernels.MODE_REFLECTION: "reflection",
              _kernels.MODE_FIXED: "fixed_distance",
              _kernels.MODE_SYNC: "synchronous",
              _kernels.MODE_ZEROING: "zeroing"}


@dataclass(frozen=True)
class KendallParams:
    kappa: float = 1.0
    epsilon: float = 0.25
    eta: float = 0.3
    delta_R: float = 1e-3
    T_max: float = 500.0
    wrapped: bool = False
    dt: float = 1e-4
    # target move of W = A/R^2 per reflection step
    w_step: float = 0.005
    # fixed-distance step factor and level resolution (fraction of eps R^2)
    c_fd: float = 0.3
    fd_res: float = 1e-4

    def validate(self, k: float = 1.0) -> "KendallParams":
        if not self.kappa > 0:
            raise ValueError("kappa must be > 0")
        if not 0 < self.epsilon:
            raise ValueError("epsilon must be > 0")
        if not self.epsilon < self.kappa:
            raise ValueError("epsilon must be < kappa")
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if not self.delta_R > 0:
            raise ValueError("delta_R must be > 0")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not self.T_max > 0:
            raise ValueError("T_max must be > 0")
        if not (self.w_step > 0 and self.c_fd > 0 and self.fd_res > 0):
            raise ValueError("step controls must be > 0")
        if not k > 0:
            raise ValueError("the controller needs k > 0")
        i_m = math.pi / math.sqrt(k)
        if not self.eta < i_m:
            raise ValueError("eta must be < i(M)")
        if self.wrapped:
            if k != 1:
                raise ValueError("wrapped mode needs k = 1")
            if not self.kappa < 2 * math.pi:
                raise ValueError("wrapped mode needs kappa < 2pi")
            if not 2 * math.pi / (math.pi - self.eta) ** 2 < self.kappa - self.epsilon:
                raise ValueError("wrapped mode needs 2pi/(pi-eta)^2 < kappa - epsilon")
        return self


@dataclass
class StoppingRecord:
    outcome: Outcome
    tau: float
    phase_switch_count: int
    final_R: float
    final_A: float
    restarts: int = 0
    steps: int = 0
    # audit: max |W| on reflection steps, max |W| - kappa entering fixed
    # distance, max ||W| - (kappa - eps)| entering reflection
    max_reflection_W: float = 0.0
    max_enter_fixed_dev: float = 0.0
    max_enter_reflection_dev: float = 0.0
    sign_violations: int = 0
    fixed_distance_time: float = 0.0

    def as_row(self):
        d = asdict(self)
        d["outcome"] = self.outcome.value
        return d


@dataclass
class PhaseTrace:
    """Per-step record of a controller run; ``mode`` uses MODE_NAMES codes."""

    t: np.ndarray
    R: np.ndarray
    A: np.ndarray
    W: np.ndarray
    mode: np.ndarray
    switch_count: np.ndarray

    @property
    def phase(self):
        return [MODE_NAMES[int(m)] for m in self.mode]


@dataclass
class Diagnostics:
    sigma: np.ndarray
    K_sigma: np.ndarray
    W_sigma: np.ndarray
    N_sigma: np.ndarray = field(default=None)


def trial_seed(master_seed: int, stream_id: int) -> int:
    """32-bit seed of stream ``stream_id`` under ``master_seed``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(stream_id),))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _seed_of(rng) -> int:
    if isinstance(rng, cs.NoiseSource):
        return trial_seed(rng.seed, rng.stream_id)
    return int(rng)


def phase_transition(phase: Phase, W: float, p: KendallParams) -> Phase:
    if not math.isfinite(W):
        raise ValueError("W must be finite")
    if phase is Phase.REFLECTION and abs(W) >= p.kappa:
        return Phase.FIXED_DISTANCE
    if phase is Phase.FIXED_DISTANCE and abs(W) <= p.kappa - p.epsilon:
        return Phase.REFLECTION
    return phase


def _init_values(init):
    if isinstance(init, (cs.ReducedState, cs.CouplingState)):
        return float(init.R), float(init.A)
    R0, A0 = init
    return float(R0), float(A0)


def _run(init, p, rng, k, restart, record):
    p.validate(k)
    R0, A0 = _init_values(init)
    i_m = math.pi / math.sqrt(k)
    if not 0 <= R0 < i_m:
        raise ValueError("R0 must lie in [0, i(M))")
    ceil_R = i_m - p.eta
    # a start beyond the eta band is first brought in by synchronous coupling
    R_restart = R0 if R0 < ceil_R else ceil_R / 2
    if not restart and R0 >= ceil_R:
        raise ValueError("R0 must be < i(M) - eta")
    out = _kernels.kendall_kernel(
        np.random.default_rng(_seed_of(rng)), R0, A0, float(k), p.kappa, p.epsilon, p.eta,
        p.delta_R, p.dt,
        p.T_max, p.wrapped, restart, R_restart, p.w_step, p.c_fd, p.fd_res, record)
    code, tau, R, A, stats, counts, rt, rR, rA, rW, rm, rsw = out
    final_A = float(_kernels.wrap4pi(A)) if p.wrapped else float(A)
    rec = StoppingRecord(
        outcome=_OUTCOMES[int(code)], tau=float(tau), phase_switch_count=int(counts[0]),
        final_R=float(R), final_A=final_A, restarts=int(counts[1]), steps=int(counts[2]),
        max_reflection_W=float(stats[0]), max_enter_fixed_dev=float(stats[1]),
        max_enter_reflection_dev=float(stats[2]), sign_violations=int(counts[3]),
        fixed_distance_time=float(stats[3]))
    trace = PhaseTrace(rt, rR, rA, rW, rm, rsw) if record else None
    return rec, trace


def run_to_tau(init, p: KendallParams, rng, k=1.0, record=False, backend="reduced"):
    """One switching run until Coupled, HitEta or TimedOut.

    ``rng`` is a NoiseSource or an integer seed. Returns (StoppingRecord,
    Diagnostics or None); with ``record`` the diagnostics are computed from
    the per-step trace, which is also attached as ``record.trace``.
    """
    if backend == "manifold":
        return _run_manifold(init, p, rng, k, record)
    if backend != "reduced":
        raise ValueError("backend must be 'reduced' or 'manifold'")
    rec, trace = _run(init, p, rng, k, restart=False, record=record)
    if trace is None:
        return rec, None
    rec.trace = trace
    return rec, diagnostics_series(trace)


def run_successful(init, p: KendallParams, rng, k=1.0, record=False):
    """Switching runs chained by the restart recipe: after HitEta, synchronous
    coupling back to the starting radius (closed form), then fixed distance
    until A = 0, then start again. Stops at Coupled or T_max."""
    rec, trace = _run(init, p, rng, k, restart=True, record=record)
    if trace is not None:
        rec.trace = trace
    return rec


def run_wrapped(init, p: KendallParams, rng, k=1.0, record=False):
    """run_successful with W taken from the representative of A mod 4pi."""
    if not p.wrapped:
        raise ValueError("run_wrapped needs p.wrapped = True")
    return run_successful(init, p, rng, k, record)


def diagnostics_series(trace: PhaseTrace) -> Diagnostics:
    """sigma = int 4/R^2 dt (trapezoid), K = log R, W = A/R^2, and the
    reflection clock int N dsigma."""
    t = np.asarray(trace.t, dtype=float)
    R = np.asarray(trace.R, dtype=float)
    g = 4.0 / R ** 2
    inc = 0.5 * (g[1:] + g[:-1]) * np.diff(t)
    sigma = np.concatenate([[0.0], np.cumsum(inc)])
    refl = (np.asarray(trace.mode)[:-1] == _kernels.MODE_REFLECTION)
    n_sigma = np.concatenate([[0.0], np.cumsum(np.where(refl, inc, 0.0))])
    return Diagnostics(sigma, np.log(R), np.asarray(trace.A) / R ** 2, n_sigma)


def _run_manifold(init, p: KendallParams, rng, k, record):
    """Fixed-step controller on the on-manifold backend (cross-validation only)."""
    p.validate(k)
    if isinstance(init, cs.CouplingState):
        st = init
    else:
        R0, A0 = _init_values(init)
        st = cs.initial_state(R0, k, A0)
    if not isinstance(rng, cs.NoiseSource):
        rng = cs.NoiseSource(int(rng), 0)
    ceil_R = sg.injectivity_radius(k) - p.eta
    phase = Phase.REFLECTION
    switches = 0
    rows = []
    max_w = 0.0
    outcome = None
    while outcome is None:
        W = st.A / st.R ** 2
        if record:
            rows.append((st.t, st.R, st.A, W, 0 if phase is Phase.REFLECTION else 1, switches))
        if phase is Phase.REFLECTION and st.R <= p.delta_R and abs(st.A) <= p.kappa * p.delta_R ** 2:
            outcome = Outcome.COUPLED
            break
        if st.R >= ceil_R:
            outcome = Outcome.HIT_ETA
            break
        if st.t >= p.T_max:
            outcome = Outcome.TIMED_OUT
            break
        new = phase_transition(phase, W, p)
        if new is not phase:
            switches += 1
            phase = new
        if phase is Phase.REFLECTION:
            max_w = max(max_w, abs(W))
            ctrl = cs.strategy_control("reflection")
        else:
            ctrl = cs.strategy_control("fixed_distance", st.R, k)
        dU = rng.increments(p.dt)
        dW = rng.increments(p.dt)
        st2, event = cs.step_manifold(st, ctrl, dU, dW, p.dt, k)
        if event == "floor":
            st = st2
            outcome = Outcome.COUPLED if abs(st.A) <= p.kappa * p.delta_R ** 2 else Outcome.HIT_ETA
            break
        if event == "ceil":
            st = st2
            outcome = Outcome.HIT_ETA
            break
        st = st2
    rec = StoppingRecord(outcome, float(min(st.t, p.T_max)), switches, float(st.R), float(st.A),
                         max_reflection_W=max_w)
    if not record:
        return rec, None
    arr = np.array(rows, dtype=float).reshape(-1, 6)
    trace = PhaseTrace(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3],
                       arr[:, 4].astype(np.int64), arr[:, 5].astype(np.int64))
    rec.trace = trace
    return rec, diagnostics_series(trace)
