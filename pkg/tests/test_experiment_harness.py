import json
import math

import numpy as np
import pytest

from curved_coupling import experiment_harness as eh
from curved_coupling import kendall_controller as kc


def _cfg(**kw):
    d = dict(n_trials=6, T_max=5.0, seed=11)
    d.update(kw)
    return eh.ExperimentConfig(**d)


def test_config_validation():
    with pytest.raises(ValueError):
        eh.ExperimentConfig(n_trials=0)
    with pytest.raises(ValueError):
        eh.ExperimentConfig(dt=0)
    with pytest.raises(ValueError, match="epsilon must be < kappa"):
        eh.ExperimentConfig(epsilon=2.0).params()


def test_single_trial_matches_run_successful():
    cfg = _cfg(n_trials=1)
    rec = eh.run_batch(cfg)[0]
    ref = kc.run_successful((1.0, 0.0), cfg.params(), kc.trial_seed(cfg.seed, 0))
    assert rec == ref


def test_batch_order_independent():
    cfg = _cfg()
    full = eh.run_batch(cfg)
    rev = eh.run_batch(cfg, trials=reversed(range(cfg.n_trials)))
    assert full == rev[::-1]


def test_parallel_matches_serial():
    cfg = _cfg(n_trials=4)
    par = eh.run_batch(_cfg(n_trials=4, jobs=2))
    assert par == eh.run_batch(cfg)


def test_exports_byte_identical(tmp_path):
    cfg = _cfg()
    for d in ("a", "b"):
        eh.export_batch(str(tmp_path / d), cfg, eh.run_batch(cfg), dump_paths=1)
    for name in ("trials.csv", "survival.csv", "summary.json", "trace_00000.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    head = (tmp_path / "a" / "trials.csv").read_text().splitlines()[0]
    assert head == "trial,outcome,tau,switches,final_R,final_A"
    assert (tmp_path / "a" / "trace_00000.csv").read_text().startswith("t,R,A,W,phase,switch_count")
    s = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert s["config"]["seed"] == 11 and s["n_trials"] == 6


def test_float_format():
    assert eh.fmt(0.1) == "0.10000000000000001"
    assert float(eh.fmt(math.pi)) == math.pi


def _rec(outcome, tau):
    return kc.StoppingRecord(outcome, tau, 0, 0.0, 0.0)


def test_survival_curve_properties():
    C, T = kc.Outcome.COUPLED, kc.Outcome.TIMED_OUT
    recs = [_rec(C, 1.0), _rec(C, 2.0), _rec(C, 2.0), _rec(T, 10.0)]
    c = eh.survival_curve(recs, grid=[0, 0.5, 1, 2, 3, 10])
    np.testing.assert_allclose(c.p_hat, [1, 1, 0.75, 0.25, 0.25, 0.25])
    assert np.all(np.diff(c.p_hat) <= 0)
    assert c.ci_half_width[0] == 0
    all_c = eh.survival_curve([_rec(C, 1.0), _rec(C, 0.5)], grid=[0, 1, 5])
    np.testing.assert_allclose(all_c.p_hat, [1, 0, 0])
    g, b, ci = eh.tv_upper_bound(c)
    assert np.array_equal(b, c.p_hat)
    with pytest.raises(ValueError):
        eh.survival_curve([])


def test_survival_rerun_consistent():
    a = eh.run_batch(_cfg(n_trials=40, T_max=20.0, seed=1))
    b = eh.run_batch(_cfg(n_trials=40, T_max=20.0, seed=2))
    grid = np.linspace(0, 20, 11)
    ca, cb = eh.survival_curve(a, grid), eh.survival_curve(b, grid)
    # two independent runs agree within the sum of their 95% widths (plus slack for n=40)
    assert np.all(np.abs(ca.p_hat - cb.p_hat) <= ca.ci_half_width + cb.ci_half_width + 0.1)


def test_validate_moments_report():
    rep = eh.validate_moments("synchronous", 1.0, (1.0,), n_samples=20_000)
    rows = {r["moment"]: r for r in rep["rows"]}
    assert rows["qvR"]["exact"] and rows["qvR"]["ok"]
    assert rep["passed"]
    rep = eh.validate_moments("reflection", 1.0, (1.0,), n_samples=50_000)
    rows = {r["moment"]: r for r in rep["rows"]}
    assert abs(rows["qvR"]["empirical"] - 4) < 0.1 and rep["passed"]


def test_equivalence_diagnostic():
    rep = eh.equivalence_diagnostic("su2", 300, np.random.default_rng(0))
    assert 0 < rep["ratio_min"] <= rep["ratio_max"] < math.inf
    rep = eh.equivalence_diagnostic("sl2", 300, np.random.default_rng(0))
    assert "sqrt_ratio_min" in rep


def test_simulate_ensemble_fixed_distance():
    res = eh.simulate_ensemble("fixed_distance", 1.0, 1e-3, 200, 50, np.random.default_rng(0))
    assert np.all(res["R"] == 1.0) and np.all(res["event_step"] == -1)
    with pytest.raises(ValueError):
        eh.simulate_ensemble("nope", 1.0, 1e-3, 1, 1, np.random.default_rng(0))
