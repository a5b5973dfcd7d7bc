"""Local stability of the equilibria, chaos-candidate regions, and the
largest Lyapunov exponent."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .integrator import IntegratorConfig, _check_sample, _rk4_step, advance_adaptive
from .model import DomainError, Params, Spectrum, as_state, spectrum_closed_form

ZERO_TOL = 1e-10

SADDLE = "saddle"
STABLE_NODE = "stable_node"
UNSTABLE_NODE = "unstable_node"
STABLE_VORTEX_IN = "stable_vortex_in"
UNSTABLE_VORTEX_OUT = "unstable_vortex_out"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class PointCharacter:
    kind: str
    complex_pair: bool
    signs: tuple[str, str, str]


@dataclass(frozen=True)
class RegionReport:
    params: Params
    ratio: float
    ss2: PointCharacter
    ss3: PointCharacter
    chaotic_candidate: bool
    stable_side: bool


def _sign(x: float, tol: float = ZERO_TOL) -> str:
    if abs(x) <= tol:
        return "0"
    return "+" if x > 0 else "-"


def classify_point(spec: Spectrum, tol: float = ZERO_TOL) -> PointCharacter:
    """Classify an equilibrium from the real-part signs of its spectrum.

    Decision table (``signs`` keeps the spectrum order):

    ============================  ===============  =====================
    real parts                    complex pair     kind
    ============================  ===============  =====================
    any |Re| <= tol               either           degenerate
    all negative                  either           stable_node
    all positive                  either           unstable_node
    real < 0, pair Re > 0         yes              unstable_vortex_out
    real > 0, pair Re < 0         yes              stable_vortex_in
    mixed                         no               saddle
    ============================  ===============  =====================
    """
    lams = spec.eigenvalues
    signs = tuple(_sign(z.real, tol) for z in lams)
    cpair = spec.complex_pair
    if "0" in signs:
        kind = DEGENERATE
    elif all(s == "-" for s in signs):
        kind = STABLE_NODE
    elif all(s == "+" for s in signs):
        kind = UNSTABLE_NODE
    elif cpair:
        real_idx = next(i for i in range(3) if spec.is_real(i))
        kind = UNSTABLE_VORTEX_OUT if signs[real_idx] == "-" else STABLE_VORTEX_IN
    else:
        kind = SADDLE
    return PointCharacter(kind, cpair, signs)


def chaotic_candidate(p: Params, tol: float = ZERO_TOL) -> RegionReport:
    """Sign-pattern test for the repeller pair Ss2/Ss3 on the right of B/A = 1.

    Ss2 must have its axis eigenvalue ``A - B`` negative and the other two
    real parts positive; Ss3 the mirror image with ``sqrt(B/A) - 1`` positive.
    """
    if p.A <= 0.0:
        raise DomainError("region report requires A > 0 (B/A undefined)")
    ratio = p.B / p.A
    spec2 = spectrum_closed_form(p, "Ss2")
    spec3 = spectrum_closed_form(p, "Ss3")
    c2, c3 = classify_point(spec2, tol), classify_point(spec3, tol)
    stable_side = ratio <= 1.0 + tol
    candidate = (not stable_side
                 and c2.signs == ("-", "+", "+")
                 and c3.signs == ("+", "-", "-"))
    return RegionReport(p, ratio, c2, c3, candidate, stable_side)


def ratio_invariance_scan(C: float, ratio: float, a_values: Sequence[float]) -> list[RegionReport]:
    """Region reports along a ray of fixed (C, B/A) with varying A.

    The verdict is not guaranteed to be invariant along the ray because the
    Ss3 radicand ``1 - 8B(1 + C*sqrt(B/A))`` depends on B itself; callers
    inspect the verdicts rather than assume them equal.
    """
    return [chaotic_candidate(Params(a, ratio * a, C)) for a in a_values]


# ---------------------------------------------------------------------------
# largest Lyapunov exponent


@dataclass(frozen=True)
class LyapunovConfig:
    t_total: float = 5000.0
    t_renorm: float = 1.0
    t_transient: float = 500.0
    backend: str = "adaptive"          # or "fixed"
    h_fixed: float = 1e-3
    integrator: IntegratorConfig = IntegratorConfig()

    def __post_init__(self):
        if not self.t_renorm > 0:
            raise ValueError("t_renorm must be positive")
        if not 0 <= self.t_transient < self.t_total:
            raise ValueError("need 0 <= t_transient < t_total")
        if self.backend not in ("adaptive", "fixed"):
            raise ValueError(f"unknown backend {self.backend!r}")


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    stderr: float
    n_windows: int
    window_rates: np.ndarray

    def __float__(self) -> float:
        return self.value


def _tangent_rhs(p: Params):
    A, B, C = p.A, p.B, p.C

    def f(y):
        X, Y, Z, u, v, w = y
        AZX2 = A * Z * X * X
        j11 = 1.0 - Y + 2.0 * C * X - 2.0 * A * Z * X
        return np.array([
            X * (1.0 + C * X - Y) - AZX2,
            -Y + X * Y,
            -B * Z + AZX2,
            j11 * u - X * v - A * X * X * w,
            Y * u + (X - 1.0) * v,
            2.0 * A * Z * X * u + (A * X * X - B) * w,
        ])

    return f


def lyapunov_max(p: Params, s0, cfg: LyapunovConfig | None = None,
                 tangent0: Sequence[float] = (1.0, 1.0, 1.0)) -> LyapunovEstimate:
    """Largest Lyapunov exponent by tangent-vector renormalisation.

    The orbit and one tangent vector are integrated together using the
    analytic Jacobian; the tangent vector is renormalised every
    ``t_renorm`` and the log growth of each window starting at or after
    ``t_transient`` is averaged.  The standard error is the sample standard
    deviation of the window rates over ``sqrt(n_windows)``.
    """
    cfg = cfg or LyapunovConfig()
    f = _tangent_rhs(p)
    v0 = np.asarray(tangent0, dtype=float)
    v0 = v0 / np.linalg.norm(v0)
    y = np.concatenate([as_state(s0).as_array(), v0])

    n_windows = int(round(cfg.t_total / cfg.t_renorm))
    if cfg.backend == "fixed":
        steps_per = int(round(cfg.t_renorm / cfg.h_fixed))
        if steps_per < 1 or not math.isclose(steps_per * cfg.h_fixed, cfg.t_renorm, rel_tol=1e-9):
            raise ValueError("t_renorm must be an integer multiple of h_fixed")

    rates = []
    h = None
    for k in range(n_windows):
        t0 = k * cfg.t_renorm
        t1 = (k + 1) * cfg.t_renorm
        if cfg.backend == "adaptive":
            _, _, y, h, _, _ = advance_adaptive(f, y, t0, t1, cfg.integrator, h=h, watch=slice(0, 3))
        else:
            for _ in range(steps_per):
                y = _rk4_step(f, y, cfg.h_fixed)
            _check_sample(t1, y, cfg.integrator.bound, slice(0, 3))
        norm = float(np.linalg.norm(y[3:]))
        if norm == 0.0 or not math.isfinite(norm):
            raise FloatingPointError(f"tangent vector degenerated at t={t1:.17g}")
        y[3:] /= norm
        if t0 >= cfg.t_transient - 1e-12:
            rates.append(math.log(norm) / cfg.t_renorm)

    rates = np.array(rates)
    n = rates.size
    value = float(rates.mean())
    stderr = float(rates.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    rates.flags.writeable = False
    return LyapunovEstimate(value, stderr, n, rates)
