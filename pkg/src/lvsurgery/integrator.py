"""Explicit Runge-Kutta time stepping for the Lotka-Volterra system.

Adaptive stepping uses the Dormand-Prince 5(4) pair; the classical
fixed-step RK4 scheme serves as a bit-reproducible reference backend.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import P3_TOL, Params, State, as_state, make_rhs

DEFAULT_BOUND = 1e4

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


class IntegrationError(RuntimeError):
    """Base class for integration failures; carries time and state."""

    def __init__(self, message: str, t: float | None = None, state=None):
        super().__init__(message)
        self.t = t
        self.state = None if state is None else np.array(state, dtype=float)


class TrajectoryOverflowError(IntegrationError):
    """Non-finite stage value, or the state left the bounded region."""


class StepBudgetError(IntegrationError):
    """``max_steps`` exhausted before reaching ``t_end``."""


class StiffnessError(IntegrationError):
    """Required step size fell below ``h_min``."""


class EmptyTrajectoryError(ValueError):
    """A trajectory operation would return no samples."""


class InvarianceWarning(RuntimeWarning):
    """A coordinate dropped below ``-P3_TOL``."""


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-9
    atol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 1.0
    max_steps: int = 100_000_000
    safety: float = 0.9
    bound: float = DEFAULT_BOUND

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        if not (0 < self.h_min <= self.h_init <= self.h_max):
            raise ValueError("need 0 < h_min <= h_init <= h_max")
        if not 0 < self.safety < 1:
            raise ValueError("safety factor must lie in (0, 1)")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class FixedStepConfig:
    h: float
    n_steps: int
    bound: float = DEFAULT_BOUND

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class Trajectory:
    """Accepted samples of one run; arrays are read-only."""

    times: np.ndarray
    states: np.ndarray
    params: Params
    config: IntegratorConfig | FixedStepConfig
    method: str
    accepted: int
    rejected: int

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        s = np.array(self.states, dtype=float).reshape(-1, 3)
        if t.shape[0] != s.shape[0]:
            raise ValueError("times and states differ in length")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(s)):
            raise ValueError("trajectory contains non-finite states")
        t.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)

    def __len__(self) -> int:
        return self.times.shape[0]

    @property
    def final_state(self) -> State:
        return State(*self.states[-1])

    def state(self, i: int) -> State:
        return State(*self.states[i])


# ---------------------------------------------------------------------------
# single steps


def _dopri_stages(f: Callable, y: np.ndarray, h: float, k1: np.ndarray | None = None):
    K = np.empty((7, y.shape[0]))
    K[0] = f(y) if k1 is None else k1
    for i in range(1, 7):
        yi = y + h * (_A[i] @ K[:i])
        if not np.all(np.isfinite(yi)):
            return None, yi
        K[i] = f(yi)
    return K, None


def _error_norm(y: np.ndarray, y5: np.ndarray, y4: np.ndarray, rtol: float, atol: float) -> float:
    sc = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
    return float(np.max(np.abs(y5 - y4) / sc))


def _dopri_step(f, y, h, rtol, atol, k1=None):
    K, bad = _dopri_stages(f, y, h, k1)
    if K is None:
        return None, None, math.inf, bad, None
    y5 = y + h * (_B5 @ K)
    y4 = y + h * (_B4 @ K)
    if not (np.all(np.isfinite(y5)) and np.all(np.isfinite(y4))):
        return None, None, math.inf, y5, None
    return y5, y4, _error_norm(y, y5, y4, rtol, atol), None, K


def step(p: Params, s, h: float, cfg: IntegratorConfig | None = None) -> tuple[State, State, float]:
    """One embedded Dormand-Prince step from ``s``.

    Returns ``(state5, state4, error_estimate)`` where the error estimate is
    the max-norm of ``state5 - state4`` weighted by ``atol + rtol*max(|s|, |state5|)``.
    """
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h!r}")
    cfg = cfg or IntegratorConfig()
    y = as_state(s).as_array()
    with np.errstate(over="ignore", invalid="ignore"):
        y5, y4, err, bad, _ = _dopri_step(make_rhs(p), y, h, cfg.rtol, cfg.atol)
    if y5 is None:
        raise TrajectoryOverflowError(f"non-finite stage value within step of size {h}", t=None, state=bad)
    return State(*y5), State(*y4), err


def _rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ---------------------------------------------------------------------------
# drivers


def _check_sample(t: float, y: np.ndarray, bound: float, watch: slice) -> None:
    if not np.all(np.isfinite(y)):
        raise TrajectoryOverflowError(f"non-finite state at t={t:.17g}", t=t, state=y)
    if np.max(np.abs(y[watch])) > bound:
        raise TrajectoryOverflowError(
            f"state left expected region (|state|_inf > {bound:g}) at t={t:.17g}", t=t, state=y)
    if np.min(y[watch]) < -P3_TOL:
        warnings.warn(f"coordinate below -{P3_TOL:g} at t={t:.17g}: {y[watch]}", InvarianceWarning,
                      stacklevel=3)


def advance_adaptive(f: Callable, y0: np.ndarray, t0: float, t1: float, cfg: IntegratorConfig,
                     h: float | None = None, record: bool = False, watch: slice = slice(0, 3)):
    """Adaptive Dormand-Prince integration of ``y' = f(y)`` from ``t0`` to ``t1``.

    Returns ``(times, states, y_final, h_next, accepted, rejected)``; the
    sample lists are empty unless ``record`` is set.  Only the ``watch``
    components are subject to the bound and positivity checks.
    """
    t = float(t0)
    y = np.array(y0, dtype=float)
    h = min(cfg.h_init if h is None else h, cfg.h_max)
    times, states = ([t], [y.copy()]) if record else ([], [])
    accepted = rejected = 0
    k1 = f(y)
    while t < t1:
        if accepted + rejected >= cfg.max_steps:
            raise StepBudgetError(f"step budget of {cfg.max_steps} exhausted at t={t:.17g}", t=t, state=y)
        last = t + h >= t1
        h_try = t1 - t if last else h
        y5, _, err, bad, K = _dopri_step(f, y, h_try, cfg.rtol, cfg.atol, k1)
        if y5 is None:
            if h_try <= cfg.h_min:
                raise TrajectoryOverflowError(f"non-finite stage value at t={t:.17g}", t=t, state=bad)
            h = max(h_try * 0.2, cfg.h_min)
            rejected += 1
            continue
        factor = 5.0 if err == 0.0 else min(5.0, max(0.2, cfg.safety * err ** -0.2))
        if err > 1.0:
            rejected += 1
            h = h_try * factor
            if h < cfg.h_min:
                raise StiffnessError(f"step size {h:.3g} below h_min={cfg.h_min:g} at t={t:.17g}",
                                     t=t, state=y)
            continue
        t = t1 if last else t + h_try
        y = y5
        k1 = K[6]  # first-same-as-last
        accepted += 1
        _check_sample(t, y, cfg.bound, watch)
        if record:
            times.append(t)
            states.append(y.copy())
        if not last:
            h = min(max(h_try * factor, cfg.h_min), cfg.h_max)
    return times, states, y, h, accepted, rejected


def integrate(p: Params, s0, t_end: float, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate from ``s0`` over ``[0, t_end]`` with adaptive step control.

    Every accepted step is recorded, including the initial point; the last
    step is truncated so the run ends exactly at ``t_end``.
    """
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end!r}")
    cfg = cfg or IntegratorConfig()
    y0 = as_state(s0).as_array()
    times, states, _, _, acc, rej = advance_adaptive(make_rhs(p), y0, 0.0, t_end, cfg, record=True)
    return Trajectory(np.array(times), np.array(states), p, cfg, "dopri54", acc, rej)


def integrate_fixed(p: Params, s0, h: float, n_steps: int, bound: float = DEFAULT_BOUND) -> Trajectory:
    """Classical RK4 with ``n_steps`` steps of size ``h``; sample ``i`` is at ``i*h``."""
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h!r}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be positive, got {n_steps!r}")
    f = make_rhs(p)
    y = as_state(s0).as_array()
    states = np.empty((n_steps + 1, 3))
    states[0] = y
    for i in range(1, n_steps + 1):
        y = _rk4_step(f, y, h)
        _check_sample(i * h, y, bound, slice(0, 3))
        states[i] = y
    times = np.arange(n_steps + 1) * h
    return Trajectory(times, states, p, FixedStepConfig(h, n_steps, bound), "rk4", n_steps, 0)


def discard_transient(tr: Trajectory, t_cut: float) -> Trajectory:
    """Samples with ``t >= t_cut``; metadata is carried over unchanged."""
    if t_cut < 0:
        raise ValueError("t_cut must be nonnegative")
    if t_cut >= tr.times[-1]:
        raise EmptyTrajectoryError(f"t_cut={t_cut} is not before the final time {tr.times[-1]}")
    keep = tr.times >= t_cut
    return dataclasses.replace(tr, times=tr.times[keep], states=tr.states[keep])
