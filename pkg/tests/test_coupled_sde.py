import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from curved_coupling import coupled_sde as cs
from curved_coupling import surface_geometry as sg

SYNC_R1 = 0.590097070082630402844145804372
PERV_R1 = 2.01900789206600432666832378791

radii = st.floats(0.05, math.pi - 0.05)


@pytest.mark.parametrize("name", cs.STRATEGIES)
@given(R=radii)
def test_controls_admissible(name, R):
    c = cs.strategy_control(name, R, 1.0)
    np.testing.assert_allclose(c.K @ c.K.T + c.Khat @ c.Khat.T, np.eye(2), atol=1e-12)


def test_inadmissible_control_rejected():
    with pytest.raises(ValueError):
        cs.CouplingControl(np.eye(2), np.eye(2))


def test_unknown_strategy():
    with pytest.raises(ValueError):
        cs.strategy_control("mirror")


@pytest.mark.parametrize("name", cs.STRATEGIES)
@given(R=radii)
def test_cross_variation_vanishes(name, R):
    assert cs.moments(cs.strategy_control(name, R, 1.0), R, 1.0).covRA == 0


def test_moment_examples():
    m = cs.moments(cs.strategy_control("synchronous"), 1.0, 1.0)
    assert m.qvR == 0 and abs(m.driftR + math.tan(0.5)) < 1e-15
    assert cs.moments(cs.strategy_control("reflection"), 1.3, 1.0).qvR == 4
    m = cs.moments(cs.strategy_control("fixed_distance", 1.0, 1.0), 1.0, 1.0)
    assert abs(m.driftR) < 1e-15 and abs(m.qvA - 4 * math.sin(0.5) ** 2) < 1e-15
    m = cs.moments(cs.strategy_control("perverse"), 1.0, 1.0)
    assert m.qvA == 0 and m.driftA == 0


@given(R=radii)
def test_envelope_of_deterministic_drifts(R):
    lo = cs.moments(cs.strategy_control("synchronous"), R, 1.0).driftR
    hi = cs.moments(cs.strategy_control("perverse"), R, 1.0).driftR
    assert abs(lo + math.tan(R / 2)) < 1e-12
    assert abs(hi - 1 / math.tan(R / 2)) < 1e-12


def test_moments_boundary_error():
    with pytest.raises(ValueError):
        cs.moments(cs.strategy_control("reflection"), math.pi, 1.0)


def test_step_reduced_examples():
    s = cs.ReducedState(1.0, 0.0)
    ctrl = cs.strategy_control("fixed_distance", 1.0, 1.0)
    rng = np.random.default_rng(0)
    for _ in range(50):
        s2, ev = cs.step_reduced(s, ctrl, rng.normal(size=2) * 0.01, rng.normal(size=2) * 0.01, 1e-4)
        assert s2.R == 1.0 and ev is None
    s2, _ = cs.step_reduced(s, cs.strategy_control("synchronous"), [0, 0], [0, 0], 1e-4)
    assert abs((s2.R - 1.0) + math.tan(0.5) * 1e-4) < 1e-15
    h = 1e-3
    s2, _ = cs.step_reduced(s, cs.strategy_control("reflection"), [h, 0], [0, 0], 1e-4)
    drift = cs.moments(cs.strategy_control("reflection"), 1.0).driftR
    assert abs(s2.R - (1.0 - 2 * h + drift * 1e-4)) < 1e-15


def test_step_reduced_events():
    s = cs.ReducedState(1e-5, 0.0)
    s2, ev = cs.step_reduced(s, cs.strategy_control("reflection"), [0.01, 0], [0, 0], 1e-4)
    assert ev == "floor" and s2.R == cs.DELTA_FLOOR
    with pytest.raises(ValueError):
        cs.step_reduced(s, cs.strategy_control("reflection"), [math.nan, 0], [0, 0], 1e-4)


def test_perverse_area_constant():
    s = cs.ReducedState(1.0, 0.3)
    rng = np.random.default_rng(1)
    for _ in range(100):
        s, _ = cs.step_reduced(s, cs.strategy_control("perverse"), rng.normal(size=2) * 0.01,
                               rng.normal(size=2) * 0.01, 1e-4)
    assert s.A == 0.3


def test_step_manifold_zero_noise():
    s = cs.initial_state(1.0, 1.0, 0.2)
    s2, ev = cs.step_manifold(s, cs.strategy_control("reflection"), [0, 0], [0, 0], 0.0)
    assert ev is None
    np.testing.assert_allclose(s2.X, s.X, atol=1e-15)
    np.testing.assert_allclose(s2.Y, s.Y, atol=1e-15)
    assert s2.A == s.A and abs(s2.R - s.R) < 1e-15


def test_step_manifold_fixed_distance_small_drift():
    s = cs.initial_state(1.0, 1.0)
    rng = np.random.default_rng(2)
    dt = 1e-4
    for _ in range(200):
        ctrl = cs.strategy_control("fixed_distance", s.R, 1.0)
        s, ev = cs.step_manifold(s, ctrl, rng.normal(0, 1e-2, 2), rng.normal(0, 1e-2, 2), dt)
        assert ev is None
    # per-step error is O(dt) so 200 steps stay within a few 1e-2
    assert abs(s.R - 1.0) < 0.05


def test_step_manifold_frames_valid():
    s = cs.initial_state(0.8, -1.0)
    rng = np.random.default_rng(3)
    for _ in range(20):
        s, _ = cs.step_manifold(s, cs.strategy_control("reflection"), rng.normal(0, 1e-2, 2),
                                rng.normal(0, 1e-2, 2), 1e-4, -1.0)
    f = s.frames
    assert abs(sg.inner(f.e1x, f.e1x, -1.0) - 1) < 1e-12
    assert abs(sg.distance(s.X, s.Y, -1.0) - s.R) < 1e-12


def test_synchronous_manifold_tracks_closed_form():
    dt, n = 1e-3, 1000
    rng = np.random.default_rng(4)
    s = cs.initial_state(1.0, 1.0)
    for _ in range(n):
        s, _ = cs.step_manifold(s, cs.strategy_control("synchronous"), rng.normal(0, math.sqrt(dt), 2),
                                rng.normal(0, math.sqrt(dt), 2), dt)
    assert abs(s.R - cs.deterministic_radius("synchronous", 1.0, 1.0)) < 0.01


def test_deterministic_radius():
    assert cs.deterministic_radius("synchronous", 1.0, 0.0) == 1.0
    # 30-digit oracle values of the closed forms at k=1, R0=1, t=1
    assert abs(cs.deterministic_radius("synchronous", 1.0, 1.0) - SYNC_R1) < 1e-15
    assert abs(cs.deterministic_radius("perverse", 1.0, 1.0) - PERV_R1) < 1e-15
    assert cs.deterministic_radius("synchronous", 1.0, 200.0) < 1e-40
    assert abs(cs.deterministic_radius("perverse", 1.0, 200.0) - math.pi) < 1e-12
    with pytest.raises(ValueError):
        cs.deterministic_radius("synchronous", 1.0, 1.0, k=-1.0)


def test_synchronous_time_inverts_radius():
    t = cs.synchronous_time_to(2.0, 0.7)
    assert abs(cs.deterministic_radius("synchronous", 2.0, t) - 0.7) < 1e-12


def test_noise_source_reproducible():
    a = cs.NoiseSource(5, 2).increments(1e-4, 4)
    b = cs.NoiseSource(5, 2).increments(1e-4, 4)
    c = cs.NoiseSource(5, 3).increments(1e-4, 4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_one_step_samples_match_scalar_step():
    s = cs.initial_state(1.2, 1.0)
    ctrl = cs.strategy_control("reflection_noise", 1.2, 1.0)
    rng = np.random.default_rng(5)
    dU, dW = rng.normal(0, 1e-2, (3, 2)), rng.normal(0, 1e-2, (3, 2))
    dR, dA = cs.one_step_samples(s, ctrl, dU, dW)
    for i in range(3):
        s2, _ = cs.step_manifold(s, ctrl, dU[i], dW[i], 1e-4)
        assert abs(s2.R - s.R - dR[i]) < 1e-13 and abs(s2.A - s.A - dA[i]) < 1e-13


@pytest.mark.parametrize("kind", ["su2", "sl2"])
def test_group_bm_area_equals_fiber(kind):
    rng = np.random.default_rng(6)
    p = cs.sample_group_bm(kind, 1e-4, 2000, rng, phi0=np.full(4, 1.0))
    # z and the integrated swept area share dB2 and agree to integrator tolerance
    assert np.abs(p.z[-1] - p.area[-1]).max() < 0.05
    assert np.abs(p.z - p.z[0]).max() > 1e-3


def test_group_bm_zero_drift_at_equator():
    drift, _, _ = cs.group_bm_coefficients(math.pi / 2, "su2")
    assert abs(drift) < 1e-16
