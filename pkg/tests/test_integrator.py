import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CHAOTIC, STABLE
from lvsurgery.integrator import (
    EmptyTrajectoryError,
    IntegratorConfig,
    InvarianceWarning,
    StepBudgetError,
    StiffnessError,
    Trajectory,
    TrajectoryOverflowError,
    discard_transient,
    integrate,
    integrate_fixed,
    step,
)
from lvsurgery.model import Params, State, slow_manifold, steady_states

params_st = st.builds(Params, st.floats(1e-4, 1.0), st.floats(1e-4, 1.0), st.floats(0.0, 10.0))


# ---------------------------------------------------------------------------
# single step


@given(params_st, st.floats(1e-6, 10.0))
def test_step_fixes_ss2(p, h):
    s2 = steady_states(p)["Ss2"].point
    s5, s4, err = step(p, s2, h)
    assert s5 == s2 and s4 == s2 and err == 0.0


def test_step_fixes_points_on_L_when_B_equals_A():
    p = Params(0.0145, 0.0145, 5.5)
    L = slow_manifold(p)
    for t in (-10.0, -100.0, -300.0):
        s = State(*L.point_at(t))
        s5, _, _ = step(p, s, 0.1)
        np.testing.assert_allclose(s5.as_array(), s.as_array(), rtol=0, atol=1e-12)


@given(params_st, st.floats(1e-4, 1.0))
def test_step_keeps_X_zero(p, h):
    s5, s4, _ = step(p, (0.0, 1.0, 1.0), h)
    assert s5.X == 0.0 and s4.X == 0.0


def test_step_error_estimate_is_weighted_norm():
    cfg = IntegratorConfig(rtol=1e-6, atol=1e-9)
    s = State(0.0, 2.0, 3.0)
    s5, s4, err = step(CHAOTIC, s, 0.5, cfg)
    sc = cfg.atol + cfg.rtol * np.maximum(np.abs(s.as_array()), np.abs(s5.as_array()))
    assert err == pytest.approx(np.max(np.abs(s5.as_array() - s4.as_array()) / sc))
    assert err >= 0


def test_step_overflow_raises():
    with pytest.raises(TrajectoryOverflowError):
        step(CHAOTIC, (1e200, 1e200, 1e200), 1.0)
    with pytest.raises(ValueError):
        step(CHAOTIC, (1, 1, 1), 0.0)


# ---------------------------------------------------------------------------
# adaptive integration


def test_x0_plane_exact_solution():
    tr = integrate(Params(0.3, 0.0145, 5.5), (0.0, 2.0, 3.0), 1.0)
    assert tr.times[-1] == 1.0
    x, y, z = tr.states[-1]
    assert x == 0.0
    assert abs(y - 2 * math.exp(-1)) <= 1e-8
    assert abs(z - 3 * math.exp(-0.0145)) <= 1e-8


def test_equilibrium_start_is_constant():
    s3 = steady_states(STABLE)["Ss3"].point
    tr = integrate(STABLE, s3, 100.0)
    assert tr.rejected == 0
    np.testing.assert_allclose(tr.states, np.tile(s3.as_array(), (len(tr), 1)), rtol=1e-12, atol=0)


def test_trajectory_invariants():
    tr = integrate(CHAOTIC, (0.5, 1, 2), 20.0)
    assert np.all(np.diff(tr.times) > 0)
    assert tr.times[0] == 0.0 and tr.times[-1] == 20.0
    assert tr.states.shape == (len(tr), 3)
    assert tr.accepted == len(tr) - 1
    assert tr.params == CHAOTIC and tr.method == "dopri54"
    with pytest.raises(ValueError):
        tr.states[0, 0] = 1.0
    with pytest.raises(ValueError):
        Trajectory([0.0, 0.0], [[0, 0, 0], [0, 0, 0]], CHAOTIC, tr.config, "x", 0, 0)


def test_default_start_stays_in_P3_and_bounded():
    with warnings.catch_warnings():
        warnings.simplefilter("error", InvarianceWarning)
        tr = integrate(CHAOTIC, (0.5, 1, 2), 1000.0)
    assert np.all(tr.states >= -1e-9)
    assert np.max(np.abs(tr.states)) <= 1e4


@pytest.mark.slow
def test_random_starts_stay_in_P3_and_bounded():
    rng = np.random.default_rng(7)
    with warnings.catch_warnings():
        warnings.simplefilter("error", InvarianceWarning)
        for s0 in rng.uniform(0.1, 3.0, (50, 3)):
            tr = integrate(CHAOTIC, s0, 1000.0)
            assert np.all(tr.states >= -1e-9)
            assert np.max(np.abs(tr.states)) <= 1e4


@pytest.mark.parametrize("p, s0, k", [
    (CHAOTIC, (0.0, 1.5, 2.0), 0),
    # with Z = 0 and C > 0 the planar flow escapes, so take the C = 0 plane
    (Params(0.01305, 0.0145, 0.0), (0.5, 1.0, 0.0), 2),
])
def test_coordinate_planes_invariant(p, s0, k):
    tr = integrate(p, s0, 30.0)
    assert np.max(np.abs(tr.states[:, k])) <= 1e-12


def test_tolerance_monotonicity():
    p = Params(0.3, 0.0145, 5.5)
    exact = np.array([0.0, 2 * math.exp(-5), 3 * math.exp(-0.0145 * 5)])
    errs = []
    for rtol in (1e-4, 1e-5, 1e-6, 1e-7, 1e-8):
        tr = integrate(p, (0.0, 2.0, 3.0), 5.0, IntegratorConfig(rtol=rtol, atol=rtol * 1e-3))
        errs.append(np.max(np.abs(tr.states[-1] - exact)))
    assert all(b <= a for a, b in zip(errs, errs[1:])), errs


def test_step_budget_error():
    with pytest.raises(StepBudgetError) as ei:
        integrate(CHAOTIC, (0.5, 1, 2), 100.0, IntegratorConfig(max_steps=10))
    assert ei.value.t is not None and ei.value.state is not None


def test_stiffness_error():
    cfg = IntegratorConfig(rtol=1e-14, atol=1e-300, h_min=1e-3, h_init=1e-3)
    with pytest.raises(StiffnessError):
        integrate(CHAOTIC, (0.5, 1, 2), 10.0, cfg)


def test_overflow_error_carries_location():
    with pytest.raises(TrajectoryOverflowError) as ei:
        integrate(CHAOTIC, (0.5, 1, 2), 10.0, IntegratorConfig(bound=100.0))
    assert ei.value.t > 0
    assert np.max(np.abs(ei.value.state)) > 100.0


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rtol=0)
    with pytest.raises(ValueError):
        IntegratorConfig(h_min=1.0, h_init=1e-3)
    with pytest.raises(ValueError):
        IntegratorConfig(safety=1.0)
    with pytest.raises(ValueError):
        integrate(CHAOTIC, (1, 1, 1), 0.0)


# ---------------------------------------------------------------------------
# fixed step


def test_fixed_step_exponential_decay():
    tr = integrate_fixed(CHAOTIC, (0.0, 1.0, 0.0), 0.001, 1000)
    assert len(tr) == 1001
    assert abs(tr.states[-1, 1] - math.exp(-1)) <= 1e-10
    assert tr.times[-1] == pytest.approx(1.0)


@settings(max_examples=20)
@given(params_st, st.floats(1e-3, 0.5), st.integers(1, 50))
def test_fixed_step_equilibrium(p, h, n):
    s2 = steady_states(p)["Ss2"].point
    tr = integrate_fixed(p, s2, h, n)
    assert np.all(tr.states == s2.as_array())


def test_fixed_step_order_at_least_four():
    errs = []
    for h in (0.2, 0.1, 0.05):
        n = round(2.0 / h)
        tr = integrate_fixed(CHAOTIC, (0.0, 1.0, 1.0), h, n)
        errs.append(abs(tr.states[-1, 1] - math.exp(-2.0)))
    for coarse, fine in zip(errs, errs[1:]):
        assert fine <= coarse / 4 and coarse / fine >= 2 ** 3.8


def test_fixed_step_bit_reproducible():
    a = integrate_fixed(CHAOTIC, (1.2, 1.0, 400.0), 1e-3, 2000)
    b = integrate_fixed(CHAOTIC, (1.2, 1.0, 400.0), 1e-3, 2000)
    assert a.states.tobytes() == b.states.tobytes()


def test_fixed_step_validation():
    with pytest.raises(ValueError):
        integrate_fixed(CHAOTIC, (1, 1, 1), 0.0, 10)
    with pytest.raises(ValueError):
        integrate_fixed(CHAOTIC, (1, 1, 1), 0.1, 0)
    with pytest.raises(TrajectoryOverflowError):
        integrate_fixed(CHAOTIC, (0.5, 1, 2), 0.1, 100)


@pytest.mark.slow
def test_adaptive_and_fixed_agree_on_short_horizon():
    # starting near the attractor avoids the stiff initial excursion that
    # a fixed step of 1e-4 cannot resolve from (0.5, 1, 2)
    s0 = (1.2, 1.0, 400.0)
    ad = integrate(CHAOTIC, s0, 50.0, IntegratorConfig(rtol=1e-10, atol=1e-13))
    fx = integrate_fixed(CHAOTIC, s0, 1e-4, 500_000)
    idx = np.rint(ad.times / 1e-4).astype(int)
    on_grid = np.abs(ad.times - idx * 1e-4) <= 1e-12
    diff = np.abs(ad.states[on_grid] - fx.states[idx[on_grid]])
    assert on_grid.sum() >= 2
    assert diff.max() <= 1e-4
    assert np.max(np.abs(ad.states[-1] - fx.states[-1])) <= 1e-4


# ---------------------------------------------------------------------------
# transient removal


def test_discard_transient():
    tr = integrate(CHAOTIC, (0.5, 1, 2), 10.0)
    same = discard_transient(tr, 0.0)
    assert np.array_equal(same.times, tr.times) and np.array_equal(same.states, tr.states)
    cut = discard_transient(tr, 5.0)
    assert len(cut) == int(np.sum(tr.times >= 5.0))
    assert cut.times[0] >= 5.0
    assert cut.params == tr.params and cut.config == tr.config and cut.accepted == tr.accepted
    with pytest.raises(EmptyTrajectoryError):
        discard_transient(tr, 11.0)
    with pytest.raises(EmptyTrajectoryError):
        discard_transient(tr, 10.0)
