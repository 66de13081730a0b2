"""Command-line entry point: simulate, kendall, verify, moments, diagnose.

Exit codes: 0 success, 1 a validation or oracle check failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import coupled_sde as cs
from . import experiment_harness as eh
from . import kendall_controller as kc
from . import oracles

SEED_ENV = "CURVED_COUPLING_SEED"
# audit tolerance on phase thresholds for the kendall command
THRESHOLD_TOL = 0.05


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p, **defaults):
    d = dict(k=1.0, group="su2", strategy="reflection", r0=1.0, a0=0.0, dt=1e-4,
             t_max=500.0, trials=500, seed=7, jobs=1, kappa=1.0, epsilon=0.25, eta=0.3,
             delta_r=1e-3, out=None, dump_paths=0)
    d.update(defaults)
    p.add_argument("--k", type=float, default=d["k"], help="curvature")
    p.add_argument("--group", choices=["su2", "sl2"], default=d["group"])
    p.add_argument("--strategy", default=d["strategy"])
    p.add_argument("--r0", type=float, default=d["r0"])
    p.add_argument("--a0", type=float, default=d["a0"])
    p.add_argument("--dt", type=float, default=d["dt"])
    p.add_argument("--t-max", type=float, default=d["t_max"])
    p.add_argument("--trials", type=int, default=d["trials"])
    p.add_argument("--seed", type=int, default=d["seed"])
    p.add_argument("--jobs", type=int, default=d["jobs"])
    p.add_argument("--kappa", type=float, default=d["kappa"])
    p.add_argument("--epsilon", type=float, default=d["epsilon"])
    p.add_argument("--eta", type=float, default=d["eta"])
    p.add_argument("--delta-r", type=float, default=d["delta_r"])
    p.add_argument("--wrapped", action="store_true")
    p.add_argument("--out", default=d["out"], help="output directory")
    p.add_argument("--dump-paths", type=int, default=d["dump_paths"],
                   help="number of per-trial paths to export")
    p.add_argument("--print-config", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="curved-coupling", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _common(sub.add_parser("simulate", help="strategy ensembles on the reduced system"),
            t_max=1.0, trials=1000)
    _common(sub.add_parser("kendall", help="successful-coupling batches"))
    v = sub.add_parser("verify", help="oracle suites")
    _common(v)
    v.add_argument("--suite", choices=["all", *oracles.SUITES], default="all")
    v.add_argument("--tol-profile", choices=list(oracles.PROFILES), default="default")
    _common(sub.add_parser("moments", help="one-step moment validation"),
            strategy="all", trials=200_000)
    _common(sub.add_parser("diagnose", help="distance-equivalence diagnostic"), trials=10_000)
    return ap


def _resolve(args):
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip() != "":
        try:
            args.seed = int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}")
    if args.trials < 1:
        raise UsageError("trials must be >= 1")
    if not args.dt > 0:
        raise UsageError("dt must be > 0")
    if not args.t_max > 0:
        raise UsageError("t-max must be > 0")
    if args.jobs < 1:
        raise UsageError("jobs must be >= 1")
    if args.command == "simulate" and args.strategy not in cs.STRATEGIES:
        raise UsageError(f"unknown strategy {args.strategy!r}")
    if args.command == "moments" and args.strategy not in ("all", *cs.STRATEGIES):
        raise UsageError(f"unknown strategy {args.strategy!r}")
    if args.command == "kendall":
        try:
            _config(args).params()
        except ValueError as exc:
            raise UsageError(str(exc))
    return args


def _config(args) -> eh.ExperimentConfig:
    return eh.ExperimentConfig(k=args.k, R0=args.r0, A0=args.a0, dt=args.dt, n_trials=args.trials,
                               seed=args.seed, T_max=args.t_max, kappa=args.kappa,
                               epsilon=args.epsilon, eta=args.eta, delta_R=args.delta_r,
                               wrapped=args.wrapped, jobs=args.jobs, output_path=args.out)


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True, default=eh._json_default))


def cmd_simulate(args):
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    n_steps = int(round(args.t_max / args.dt))
    every = max(1, n_steps // 1000) if args.dump_paths else 0
    res = eh.simulate_ensemble(args.strategy, args.r0, args.dt, n_steps, args.trials, rng,
                               k=args.k, A0=args.a0, record_every=every)
    R, A = res["R"], res["A"]
    out = {"strategy": args.strategy, "T": n_steps * args.dt, "n_paths": args.trials,
           "mean_R": float(R.mean()), "var_R": float(R.var()), "mean_A": float(A.mean()),
           "var_A": float(A.var()), "boundary_events": int((res["event_step"] >= 0).sum())}
    if args.k > 0 and args.strategy in ("synchronous", "perverse"):
        out["closed_form_R"] = cs.deterministic_radius(args.strategy, args.r0, n_steps * args.dt, args.k)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "final.csv"), "w") as f:
            f.write("path,R,A\n")
            for i, (r, a) in enumerate(zip(R, A)):
                f.write(f"{i},{eh.fmt(r)},{eh.fmt(a)}\n")
        for j in range(min(args.dump_paths, args.trials)):
            eh.write_path_csv(os.path.join(args.out, f"path_{j:05d}.csv"), res["t"],
                              res["R_path"][:, j], res["A_path"][:, j],
                              [args.strategy] * len(res["t"]))
        eh.write_summary_json(os.path.join(args.out, "summary.json"), out)
    _emit(out)
    return 0


def cmd_kendall(args):
    cfg = _config(args)
    recs = eh.run_batch(cfg)
    summary = eh.summarize(recs, cfg)
    if args.out:
        eh.export_batch(args.out, cfg, recs, args.dump_paths)
    _emit(summary)
    ok = (summary["max_enter_fixed_dev"] <= THRESHOLD_TOL
          and summary["max_enter_reflection_dev"] <= THRESHOLD_TOL
          and summary["max_reflection_W"] <= args.kappa + THRESHOLD_TOL
          and summary["sign_violations"] == 0)
    return 0 if ok else 1


def cmd_verify(args):
    res = oracles.run_suite(args.suite, args.tol_profile)
    for r in res:
        print(f"{'PASS' if r['passed'] else 'FAIL'} {r['suite']} ({r['seconds']:.1f}s)")
    _emit(res)
    return 0 if all(r["passed"] for r in res) else 1


def cmd_moments(args):
    names = cs.STRATEGIES if args.strategy == "all" else (args.strategy,)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    grid = (0.5, 1.0, 2.0) if args.k <= 0 else tuple(r for r in (0.5, 1.0, 2.0) if r < math.pi / math.sqrt(args.k))
    reps = [eh.validate_moments(n, args.k, grid, args.trials, args.dt, rng) for n in names]
    for rep in reps:
        for row in rep["rows"]:
            z = "exact" if row["exact"] else f"z={row['z']:+.2f}"
            print(f"{'ok ' if row['ok'] else 'BAD'} {row['strategy']:<17} R={row['R']:<4} "
                  f"{row['moment']:<7} analytic={row['analytic']:+.6f} empirical={row['empirical']:+.6f} {z}")
    passed = all(r["passed"] for r in reps)
    print("PASS" if passed else "FAIL")
    return 0 if passed else 1


def cmd_diagnose(args):
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    _emit(eh.equivalence_diagnostic(args.group, args.trials, rng))
    return 0


COMMANDS = {"simulate": cmd_simulate, "kendall": cmd_kendall, "verify": cmd_verify,
            "moments": cmd_moments, "diagnose": cmd_diagnose}


def main(argv=None) -> int:
    try:
        args = _resolve(build_parser().parse_args(argv))
    except UsageError as exc:
        print(f"curved-coupling: error: {exc}", file=sys.stderr)
        return 2
    if args.print_config:
        _emit({k: v for k, v in vars(args).items() if k != "print_config"})
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"curved-coupling: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
