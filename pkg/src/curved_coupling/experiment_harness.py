"""Batch Monte Carlo runs, survival curves, moment checks and exports."""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import coupled_sde as cs
from . import kendall_controller as kc
from . import lie_group as lg
from . import surface_geometry as sg

# a quadratic variation whose analytic rate is 0 is checked against this
# multiple of dt instead of a z-score (the manifold step leaves O(dt^2) terms)
ZERO_RATE_FACTOR = 100.0
Z_FAIL = 4.0
FEW_SURVIVORS = 20


def fmt(x) -> str:
    """17 significant digits, the export float format."""
    return format(float(x), ".17g")


@dataclass
class ExperimentConfig:
    k: float = 1.0
    R0: float = 1.0
    A0: float = 0.0
    dt: float = 1e-4
    n_trials: int = 500
    seed: int = 7
    T_max: float = 500.0
    kappa: float = 1.0
    epsilon: float = 0.25
    eta: float = 0.3
    delta_R: float = 1e-3
    wrapped: bool = False
    strategy: str = "kendall"
    jobs: int = 1
    output_path: str | None = None

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def params(self) -> kc.KendallParams:
        return kc.KendallParams(kappa=self.kappa, epsilon=self.epsilon, eta=self.eta,
                                delta_R=self.delta_R, T_max=self.T_max,
                                wrapped=self.wrapped, dt=self.dt).validate(self.k)

    def as_dict(self):
        return asdict(self)


def _trial(args):
    cfg, i = args
    p = cfg.params()
    seed = kc.trial_seed(cfg.seed, i)
    try:
        if cfg.wrapped:
            return kc.run_wrapped((cfg.R0, cfg.A0), p, seed, cfg.k)
        return kc.run_successful((cfg.R0, cfg.A0), p, seed, cfg.k)
    except Exception as exc:
        raise RuntimeError(f"trial {i} failed: {exc}") from exc


def run_batch(cfg: ExperimentConfig, trials=None):
    """Controller records for trials 0..n_trials-1 (or the given indices), in
    trial order. Trial i always uses stream i of the master seed, so the
    result does not depend on ``jobs``."""
    idx = list(range(cfg.n_trials)) if trials is None else list(trials)
    cfg.params()
    work = [(cfg, i) for i in idx]
    if cfg.jobs == 1 or len(idx) == 1:
        return [_trial(w) for w in work]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
        return list(ex.map(_trial, work, chunksize=max(1, len(work) // (4 * cfg.jobs))))


def _trig(R, k):
    """Array versions of (cs_k, sn_k, area_factor)."""
    if k > 0:
        s = math.sqrt(k)
        return np.cos(s * R), np.sin(s * R) / s, np.tan(s * R / 2) / s
    if k < 0:
        s = math.sqrt(-k)
        return np.cosh(s * R), np.sinh(s * R) / s, np.tanh(s * R / 2) / s
    return np.ones_like(R), R, R / 2


def simulate_ensemble(name, R0, dt, n_steps, n_paths, rng, k=1.0, A0=0.0, record_every=0):
    """Vectorised reduced-system Euler paths under one named strategy.

    Paths that leave (DELTA_FLOOR, i(M) - DELTA_CEIL) are clamped and frozen.
    Returns dict with final R, A, the step index of the boundary event per
    path (-1 if none) and, if ``record_every``, sampled (t, R, A) arrays.
    """
    if name not in cs.STRATEGIES:
        raise ValueError(f"unknown strategy {name!r}")
    sk = math.sqrt(k) if k > 0 else 0.0
    i_m = sg.injectivity_radius(k)
    hi = i_m - cs.DELTA_CEIL if math.isfinite(i_m) else math.inf
    R = np.full(n_paths, float(R0))
    A = np.full(n_paths, float(A0))
    alive = np.ones(n_paths, dtype=bool)
    event = np.full(n_paths, -1, dtype=np.int64)
    sq = math.sqrt(dt)
    rec_t, rec_R, rec_A = [0.0], [R.copy()], [A.copy()]
    for i in range(n_steps):
        dU = rng.normal(0.0, sq, (2, n_paths))
        dW = rng.normal(0.0, sq, (2, n_paths))
        if name == "synchronous":
            k11, k22, kh22 = 1.0, 1.0, 0.0
        elif name == "reflection":
            k11, k22, kh22 = -1.0, 1.0, 0.0
        elif name == "perverse":
            k11, k22, kh22 = 1.0, -1.0, 0.0
        else:
            k11 = 1.0 if name == "fixed_distance" else -1.0
            k22, kh22 = np.cos(sk * R), np.sin(sk * R)
        dV1 = k11 * dU[0]
        dV2 = k22 * dU[1] + kh22 * dW[1]
        cs_, sn_, af = _trig(R, k)
        Rn = R + (dV1 - dU[0]) + (cs_ - k22) / sn_ * dt
        An = A + af * (dU[1] + dV2)
        R = np.where(alive, Rn, R)
        A = np.where(alive, An, A)
        out = alive & ((R < cs.DELTA_FLOOR) | (R > hi))
        if out.any():
            event[out] = i + 1
            R = np.where(out, np.clip(R, cs.DELTA_FLOOR, hi), R)
            alive &= ~out
        if record_every and (i + 1) % record_every == 0:
            rec_t.append((i + 1) * dt)
            rec_R.append(R.copy())
            rec_A.append(A.copy())
    res = {"R": R, "A": A, "event_step": event}
    if record_every:
        res.update(t=np.array(rec_t), R_path=np.array(rec_R), A_path=np.array(rec_A))
    return res


@dataclass
class SurvivalCurve:
    grid: np.ndarray
    p_hat: np.ndarray
    ci_half_width: np.ndarray
    n_at_risk: np.ndarray = field(default=None)


def coupling_times(records):
    """tau for Coupled records, +inf otherwise (censored)."""
    return np.array([r.tau if r.outcome is kc.Outcome.COUPLED else math.inf for r in records])


def survival_curve(records, grid=None) -> SurvivalCurve:
    """Empirical P(tau > t) with 95% normal half-widths. Points where fewer
    than FEW_SURVIVORS trials remain have unreliable intervals."""
    if len(records) == 0:
        raise ValueError("no records")
    tau = coupling_times(records)
    if grid is None:
        finite = tau[np.isfinite(tau)]
        top = max(r.tau for r in records)
        grid = np.unique(np.concatenate([[0.0], np.sort(finite), [top]]))
    grid = np.asarray(grid, dtype=float)
    n = tau.size
    surv = (tau[None, :] > grid[:, None]).sum(axis=1)
    p = surv / n
    ci = 1.96 * np.sqrt(p * (1 - p) / n)
    return SurvivalCurve(grid, p, ci, surv)


def tv_upper_bound(curve: SurvivalCurve):
    """Upper estimate of the total-variation distance between the two marginal
    laws at each grid time: d_TV <= P(tau > t). Returns (grid, bound, ci)."""
    return curve.grid, np.minimum(curve.p_hat, 1.0), curve.ci_half_width


def _mc_z(x, target):
    se = x.std(ddof=1) / math.sqrt(x.size)
    return (x.mean() - target) / se if se > 0 else math.inf


def validate_moments(strategy, k=1.0, R_grid=(0.5, 1.0, 2.0), n_samples=200_000, dt=1e-4, rng=None,
                     z_fail=Z_FAIL):
    """Empirical one-step moments of the on-manifold step against the reduced
    coefficients. Each row holds the analytic rate, empirical rate and either
    a z-score or, for zero-rate quadratic variations, the exact-zero residual
    check. The report fails iff some |z| > z_fail or a residual check fails."""
    rng = np.random.default_rng(0) if rng is None else rng
    rows = []
    for R in R_grid:
        ctrl = cs.strategy_control(strategy, R, k)
        m = cs.moments(ctrl, R, k)
        st = cs.initial_state(R, k)
        sq = math.sqrt(dt)
        dU = rng.normal(0.0, sq, (n_samples, 2))
        dW = rng.normal(0.0, sq, (n_samples, 2))
        dR, dA = cs.one_step_samples(st, ctrl, dU, dW, k)
        checks = (("driftR", dR, m.driftR, m.qvR == 0), ("qvR", dR * dR, m.qvR, m.qvR == 0),
                  ("driftA", dA, m.driftA, m.qvA == 0), ("qvA", dA * dA, m.qvA, m.qvA == 0),
                  ("covRA", dR * dA, m.covRA, m.qvR == 0 or m.qvA == 0))
        for name, x, rate, degenerate in checks:
            emp = x.mean() / dt
            if degenerate:
                # no noise in this component: compare rates directly
                ok = abs(emp - rate) <= ZERO_RATE_FACTOR * dt * max(1.0, abs(rate))
                rows.append({"strategy": strategy, "R": R, "moment": name, "analytic": rate,
                             "empirical": emp, "z": None, "exact": True, "ok": bool(ok)})
            else:
                z = _mc_z(x, rate * dt)
                rows.append({"strategy": strategy, "R": R, "moment": name, "analytic": rate,
                             "empirical": emp, "z": z, "exact": False, "ok": bool(abs(z) <= z_fail)})
    return {"rows": rows, "passed": all(r["ok"] for r in rows)}


def equivalence_diagnostic(kind, n_pairs=10_000, rng=None):
    """Ratios of cc_proxy(x^-1 y) to R^2 + |A~| (and to R^2 + sqrt|A~| for
    SL2) over random pairs. R is the distance of the projections and A~ the
    wrapped difference z^y - z^x of the fiber coordinates, which is the swept
    area of paths issued from a common fiber level. Returns min/max of each
    ratio; a boundedness diagnostic only, the constants are not known."""
    kind = lg._kind(kind)
    rng = np.random.default_rng(0) if rng is None else rng
    kc_ = 1.0 if kind is lg.GroupKind.SU2 else -1.0
    r1, r2 = [], []
    for _ in range(n_pairs):
        x = lg.random_element(kind, rng)
        y = lg.random_element(kind, rng)
        proxy = lg.cc_proxy(lg.group_mul(lg.inverse(x), y))
        R = sg.distance(lg.project(x), lg.project(y), kc_)
        a = abs(lg.wrap_z(lg.to_cylindrical(y).z - lg.to_cylindrical(x).z))
        g1 = R ** 2 + a
        if g1 > 0:
            r1.append(proxy / g1)
        if kind is lg.GroupKind.SL2:
            g2 = R ** 2 + math.sqrt(a)
            if g2 > 0:
                r2.append(proxy / g2)
    rep = {"kind": kind.value, "n_pairs": n_pairs,
           "ratio_min": float(np.min(r1)), "ratio_max": float(np.max(r1))}
    if r2:
        rep.update(sqrt_ratio_min=float(np.min(r2)), sqrt_ratio_max=float(np.max(r2)))
    return rep


def summarize(records, cfg: ExperimentConfig | None = None):
    outs = [r.outcome.value for r in records]
    tau = np.array([r.tau for r in records])
    coupled = np.array([o == "Coupled" for o in outs])
    s = {"n_trials": len(records),
         "outcomes": {o.value: outs.count(o.value) for o in kc.Outcome},
         "coupled_fraction": float(coupled.mean()),
         "mean_tau_censored": float(tau.mean()),
         "mean_tau_coupled": float(tau[coupled].mean()) if coupled.any() else None,
         "mean_restarts": float(np.mean([r.restarts for r in records])),
         "max_reflection_W": float(max(r.max_reflection_W for r in records)),
         "max_enter_fixed_dev": float(max(r.max_enter_fixed_dev for r in records)),
         "max_enter_reflection_dev": float(max(r.max_enter_reflection_dev for r in records)),
         "sign_violations": int(sum(r.sign_violations for r in records))}
    if cfg is not None:
        s["config"] = cfg.as_dict()
    return s


def write_trials_csv(path, records):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["trial", "outcome", "tau", "switches", "final_R", "final_A"])
        for i, r in enumerate(records):
            w.writerow([i, r.outcome.value, fmt(r.tau), r.phase_switch_count, fmt(r.final_R), fmt(r.final_A)])


def write_survival_csv(path, curve: SurvivalCurve):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t", "p_hat", "ci"])
        for t, p, c in zip(curve.grid, curve.p_hat, curve.ci_half_width):
            w.writerow([fmt(t), fmt(p), fmt(c)])


def write_path_csv(path, t, R, A, phase):
    """Path dump `t,R,A,phase`."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t", "R", "A", "phase"])
        for row in zip(t, R, A, phase):
            w.writerow([fmt(row[0]), fmt(row[1]), fmt(row[2]), row[3]])


def write_phase_trace(path, trace: kc.PhaseTrace):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t", "R", "A", "W", "phase", "switch_count"])
        for t, R, A, W, ph, sc in zip(trace.t, trace.R, trace.A, trace.W, trace.phase, trace.switch_count):
            w.writerow([fmt(t), fmt(R), fmt(A), fmt(W), ph, int(sc)])


def _json_default(o):
    if isinstance(o, (np.floating, float)):
        return float(o)
    if isinstance(o, np.integer):
        return int(o)
    raise TypeError(type(o))


def write_summary_json(path, summary):
    with open(path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")


def export_batch(out_dir, cfg: ExperimentConfig, records, dump_paths=0):
    """Write trials.csv, survival.csv, summary.json and, for the first
    ``dump_paths`` trials, phase traces (re-run with recording on)."""
    os.makedirs(out_dir, exist_ok=True)
    write_trials_csv(os.path.join(out_dir, "trials.csv"), records)
    write_survival_csv(os.path.join(out_dir, "survival.csv"), survival_curve(records))
    write_summary_json(os.path.join(out_dir, "summary.json"), summarize(records, cfg))
    p = cfg.params()
    for i in range(min(dump_paths, len(records))):
        rec = kc.run_successful((cfg.R0, cfg.A0), p, kc.trial_seed(cfg.seed, i), cfg.k, record=True)
        write_phase_trace(os.path.join(out_dir, f"trace_{i:05d}.csv"), rec.trace)
