import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CHAOTIC, STABLE
from lvsurgery.analysis import (
    DEGENERATE,
    SADDLE,
    STABLE_NODE,
    STABLE_VORTEX_IN,
    UNSTABLE_NODE,
    UNSTABLE_VORTEX_OUT,
    LyapunovConfig,
    chaotic_candidate,
    classify_point,
    lyapunov_max,
    ratio_invariance_scan,
)
from lvsurgery.model import DomainError, Params, Spectrum, steady_states


def spec(*lams):
    return Spectrum(tuple(complex(z) for z in lams), (None, None, None), "test")


# ---------------------------------------------------------------------------
# classification


@pytest.mark.parametrize("lams, kind", [
    ((1, -1, -0.0145), SADDLE),
    ((-0.5, 0.2 + 1j, 0.2 - 1j), UNSTABLE_VORTEX_OUT),
    ((0.5, -0.2 + 1j, -0.2 - 1j), STABLE_VORTEX_IN),
    ((-1, -2, -3), STABLE_NODE),
    ((1, 2, 3), UNSTABLE_NODE),
    ((-1, -0.5 + 2j, -0.5 - 2j), STABLE_NODE),
    ((0, -1, -2), DEGENERATE),
    ((5e-11, -1, -2), DEGENERATE),
    ((-1, 1e-11 + 1j, 1e-11 - 1j), DEGENERATE),
])
def test_classify_examples(lams, kind):
    c = classify_point(spec(*lams))
    assert c.kind == kind
    assert c.complex_pair == any(complex(z).imag != 0 for z in lams)


def test_classify_signs_keep_order():
    assert classify_point(spec(1, -1, -0.1)).signs == ("+", "-", "-")
    assert classify_point(spec(0, 2, -3)).signs == ("0", "+", "-")


finite = st.floats(-100, 100).filter(lambda x: abs(x) > 1e-6)


@given(finite, finite, finite, st.floats(0, 10), st.floats(1e-3, 1e3))
def test_classify_scale_invariant(a, b, c, im, scale):
    s1 = spec(a, complex(b, im), complex(b, -im)) if im else spec(a, b, c)
    s2 = spec(*(scale * z for z in s1.eigenvalues))
    assert classify_point(s1).kind == classify_point(s2).kind


# ---------------------------------------------------------------------------
# chaos candidate


def test_chaotic_case_is_candidate():
    r = chaotic_candidate(CHAOTIC)
    assert r.chaotic_candidate and not r.stable_side
    assert r.ratio == pytest.approx(1.1111111111111112)
    assert r.ss2.signs == ("-", "+", "+")
    assert r.ss3.signs == ("+", "-", "-")


def test_line_and_stable_side_are_not_candidates():
    on_line = chaotic_candidate(Params(0.0145, 0.0145, 5.5))
    assert on_line.stable_side and not on_line.chaotic_candidate
    assert on_line.ss3.kind == DEGENERATE
    r = chaotic_candidate(STABLE)
    assert r.stable_side and not r.chaotic_candidate


def test_candidate_requires_A():
    with pytest.raises(DomainError):
        chaotic_candidate(Params(0, 1, 1))


@given(st.floats(1e-4, 1.0), st.floats(0.0, 10.0), st.floats(0.1, 10.0))
def test_stable_side_never_candidate(A, C, ratio):
    r = chaotic_candidate(Params(A, ratio * A, C))
    if r.stable_side:
        assert not r.chaotic_candidate


@given(st.floats(1e-4, 1e-2), st.floats(0.0, 10.0), st.floats(0.1, 10.0).filter(lambda r: abs(r - 1) > 1e-6))
def test_ratio_ray_keeps_ss2_axis_sign_and_gate(A, C, ratio):
    r1, r2 = ratio_invariance_scan(C, ratio, [A, 10 * A])
    assert r1.stable_side == r2.stable_side
    assert r1.ss2.signs[0] == r2.ss2.signs[0]


def test_ratio_invariance_grid_is_reported():
    # full verdict invariance is not guaranteed; the scan only reports it
    reports = ratio_invariance_scan(5.5, 1.1111, [1e-4, 1e-3, 1e-2, 1e-1])
    assert [r.params.A for r in reports] == [1e-4, 1e-3, 1e-2, 1e-1]
    assert all(r.ratio == pytest.approx(1.1111) for r in reports)


# ---------------------------------------------------------------------------
# Lyapunov exponent


def test_lyapunov_on_x0_plane_equals_minus_B():
    # in-plane tangent; the transverse direction grows like 1 - Y -> 1
    p = Params(0.01305, 0.0145, 5.5)
    cfg = LyapunovConfig(t_total=400.0, t_renorm=1.0, t_transient=50.0)
    est = lyapunov_max(p, (0.0, 1.0, 1.0), cfg, tangent0=(0.0, 1.0, 1.0))
    assert abs(est.value - max(-1.0, -p.B)) <= 1e-3
    assert est.n_windows == 350


def test_lyapunov_at_stable_equilibrium_not_positive():
    s3 = steady_states(STABLE)["Ss3"].point
    est = lyapunov_max(STABLE, s3, LyapunovConfig(t_total=300.0, t_transient=50.0))
    assert est.value <= 2 * est.stderr


def test_lyapunov_fixed_backend_bit_identical():
    cfg = LyapunovConfig(t_total=40.0, t_transient=10.0, backend="fixed", h_fixed=1e-3)
    a = lyapunov_max(CHAOTIC, (1.2, 1.0, 400.0), cfg)
    b = lyapunov_max(CHAOTIC, (1.2, 1.0, 400.0), cfg)
    assert a.value == b.value and a.stderr == b.stderr
    assert a.window_rates.tobytes() == b.window_rates.tobytes()


def test_lyapunov_config_validation():
    with pytest.raises(ValueError):
        LyapunovConfig(t_renorm=0)
    with pytest.raises(ValueError):
        LyapunovConfig(t_total=10, t_transient=10)
    with pytest.raises(ValueError):
        LyapunovConfig(backend="euler")
    with pytest.raises(ValueError):
        lyapunov_max(CHAOTIC, (1, 1, 1), LyapunovConfig(t_total=10, t_transient=1, t_renorm=1.0,
                                                         backend="fixed", h_fixed=0.3))


def test_lyapunov_estimate_has_stderr():
    est = lyapunov_max(CHAOTIC, (1.2, 1.0, 400.0), LyapunovConfig(t_total=60.0, t_transient=10.0))
    assert est.n_windows == 50 == est.window_rates.size
    assert est.stderr == pytest.approx(np.std(est.window_rates, ddof=1) / np.sqrt(50))
    assert float(est) == est.value
