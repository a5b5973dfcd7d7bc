"""Geometric measurement of the hole the attractor opens around the slow
manifold, and the sphere-to-torus scan over A."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from .integrator import (
    EmptyTrajectoryError,
    IntegrationError,
    IntegratorConfig,
    Trajectory,
    discard_transient,
    integrate,
    integrate_fixed,
)
from .model import DomainError, Params, slow_manifold, steady_states

CLOSED = "closed"
OPEN = "open"
INDETERMINATE = "indeterminate"

DEFAULT_START = (0.5, 1.0, 2.0)


class InsufficientDataError(ValueError):
    """No trajectory sample falls inside the measurement band."""


@dataclass(frozen=True)
class BandConfig:
    """Where around L to measure.  ``None`` fields are resolved from the data.

    The default axial range is the stretch of L between the projections of
    Ss2 and Ss3, shrunk by ``inset`` of its length at each end; the default
    shell radius is ``shell_factor`` times the median in-band distance.
    """

    axial_lo: float | None = None
    axial_hi: float | None = None
    shell_radius: float | None = None
    inset: float = 0.1
    shell_factor: float = 5.0
    n_bins: int = 64

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class Band:
    axial_lo: float
    axial_hi: float
    shell_radius: float


@dataclass(frozen=True)
class HoleMetrics:
    min_distance: float
    angular_coverage: float
    n_samples_in_band: int
    band: Band
    n_bins: int = 64


@dataclass(frozen=True)
class Thresholds:
    """``eps_hole=None`` means ``eps_rel`` times the attractor diameter."""

    eps_hole: float | None = None
    eps_rel: float = 0.02
    c_min: float = 0.9

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class ShapeClass:
    verdict: str
    eps_hole: float
    c_min: float


def default_axial_range(p: Params, inset: float = 0.1) -> tuple[float, float]:
    L = slow_manifold(p)
    ss = steady_states(p)
    if not ss["Ss3"].defined:
        raise DomainError("default band needs Ss3 defined (A > 0 and B > 0)")
    a2 = float(L.axial(ss["Ss2"].point))
    a3 = float(L.axial(ss["Ss3"].point))
    lo, hi = min(a2, a3), max(a2, a3)
    span = hi - lo
    return lo + inset * span, hi - inset * span


def hole_metrics(tr: Trajectory | np.ndarray, p: Params, band: BandConfig | None = None) -> HoleMetrics:
    """Distance and winding of samples around L inside an axial band.

    Samples are kept when their axial coordinate lies in
    ``[axial_lo, axial_hi]`` and their distance to L is at most the shell
    radius.  ``angular_coverage`` is the fraction of ``n_bins`` equal angle
    sectors around L that contain at least one kept sample lying off L.
    """
    band = band or BandConfig()
    pts = tr.states if isinstance(tr, Trajectory) else np.asarray(tr, dtype=float).reshape(-1, 3)
    if pts.shape[0] == 0:
        raise InsufficientDataError("empty sample set")
    L = slow_manifold(p)
    lo, hi = band.axial_lo, band.axial_hi
    if lo is None or hi is None:
        dlo, dhi = default_axial_range(p, band.inset)
        lo = dlo if lo is None else lo
        hi = dhi if hi is None else hi

    ax = L.axial(pts)
    off = L.offset(pts)
    dist = np.linalg.norm(off, axis=1)
    in_axial = (ax >= lo) & (ax <= hi)
    if not np.any(in_axial):
        raise InsufficientDataError(f"no samples with axial coordinate in [{lo:g}, {hi:g}]")

    shell = band.shell_radius
    if shell is None:
        shell = band.shell_factor * float(np.median(dist[in_axial]))
    keep = in_axial & (dist <= shell)
    n = int(keep.sum())
    if n == 0:
        raise InsufficientDataError(f"no samples within shell radius {shell:g}")

    e1, e2 = L.normal_frame()
    d = dist[keep]
    off = off[keep]
    # points on L have no angle
    scale = max(1.0, float(np.max(np.abs(pts))))
    off = off[d > 1e-12 * scale]
    theta = np.arctan2(off @ e2, off @ e1)
    bins = np.floor((theta + math.pi) / (2.0 * math.pi) * band.n_bins).astype(int) % band.n_bins
    coverage = np.unique(bins).size / band.n_bins
    return HoleMetrics(float(d.min()), float(coverage), n, Band(float(lo), float(hi), float(shell)), band.n_bins)


def classify_shape(m: HoleMetrics, eps_hole: float, c_min: float = 0.9) -> ShapeClass:
    """``open`` when the samples wind around L and keep clear of it,
    ``closed`` when they wind around it and touch it."""
    if m.angular_coverage >= c_min:
        verdict = OPEN if m.min_distance > eps_hole else CLOSED
    else:
        verdict = INDETERMINATE
    return ShapeClass(verdict, eps_hole, c_min)


def attractor_diameter(points: np.ndarray) -> float:
    """Largest pairwise distance in a point cloud (via its convex hull)."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if pts.shape[0] < 2:
        return 0.0
    try:
        pts = pts[ConvexHull(pts).vertices]
    except (QhullError, ValueError):
        if pts.shape[0] > 4000:
            # flat or collinear cloud: bounding-box diagonal bounds the diameter
            return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    return float(pdist(pts).max())


# ---------------------------------------------------------------------------
# scan


@dataclass(frozen=True)
class SimConfig:
    """How each scan run is integrated."""

    s0: tuple[float, float, float] = DEFAULT_START
    t_end: float = 50_000.0
    transient_fraction: float = 0.3
    backend: str = "adaptive"          # or "fixed"
    h_fixed: float = 1e-3
    integrator: IntegratorConfig = IntegratorConfig()

    def __post_init__(self):
        if self.backend not in ("adaptive", "fixed"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if not 0.0 <= self.transient_fraction < 1.0:
            raise ValueError("transient_fraction must lie in [0, 1)")

    @property
    def t_cut(self) -> float:
        return self.transient_fraction * self.t_end

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["s0"] = list(self.s0)
        d["t_cut"] = self.t_cut
        return d


@dataclass(frozen=True)
class ScanEntry:
    A: float
    metrics: HoleMetrics | None
    shape: ShapeClass | None
    manifest_id: str
    diameter: float | None = None
    error: str | None = None
    trajectory: Trajectory | None = field(default=None, repr=False, compare=False)
    note: str | None = None

    @property
    def verdict(self) -> str:
        return "error" if self.shape is None else self.shape.verdict


@dataclass(frozen=True)
class SurgeryScanResult:
    B: float
    C: float
    a_values: tuple[float, ...]
    entries: tuple[ScanEntry, ...]
    sim: SimConfig
    band: BandConfig
    thresholds: Thresholds

    @property
    def transition_index(self) -> int | None:
        for i, e in enumerate(self.entries):
            if e.verdict == OPEN:
                return i
        return None


def run_id(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def simulate(p: Params, sim: SimConfig) -> Trajectory:
    if sim.backend == "fixed":
        n = int(round(sim.t_end / sim.h_fixed))
        return integrate_fixed(p, sim.s0, sim.h_fixed, n, bound=sim.integrator.bound)
    return integrate(p, sim.s0, sim.t_end, sim.integrator)


def _scan_one(A: float, B: float, C: float, sim: SimConfig, band: BandConfig,
              thresholds: Thresholds, keep: bool) -> ScanEntry:
    p = Params(A, B, C)
    rid = run_id({"params": p.as_dict(), "sim": sim.as_dict(), "band": band.as_dict(),
                  "thresholds": thresholds.as_dict()})
    try:
        tr = simulate(p, sim)
        post = discard_transient(tr, sim.t_cut)
        diameter = attractor_diameter(post.states)
        eps = thresholds.eps_hole if thresholds.eps_hole is not None else thresholds.eps_rel * diameter
    except (IntegrationError, EmptyTrajectoryError, DomainError) as exc:
        return ScanEntry(A, None, None, rid, error=f"{type(exc).__name__}: {exc}")
    kept = tr if keep else None
    try:
        m = hole_metrics(post, p, band)
    except InsufficientDataError as exc:
        # the orbit never visits the band (e.g. it settles on an equilibrium),
        # so there is no winding to judge
        shape = ShapeClass(INDETERMINATE, eps, thresholds.c_min)
        return ScanEntry(A, None, shape, rid, diameter, trajectory=kept, note=str(exc))
    except DomainError as exc:
        return ScanEntry(A, None, None, rid, error=f"{type(exc).__name__}: {exc}")
    shape = classify_shape(m, eps, thresholds.c_min)
    return ScanEntry(A, m, shape, rid, diameter, trajectory=kept)


def surgery_scan(B: float, C: float, a_values: Sequence[float], sim: SimConfig | None = None,
                 band: BandConfig | None = None, thresholds: Thresholds | None = None,
                 jobs: int = 1, keep_trajectories: bool = False) -> SurgeryScanResult:
    """Integrate, trim and measure one run per value of A.

    Failures are recorded in the entry and do not stop the scan.  Results
    are ordered by A whatever the completion order of the workers.
    """
    sim = sim or SimConfig()
    band = band or BandConfig()
    thresholds = thresholds or Thresholds()
    a_values = tuple(float(a) for a in a_values)
    if any(a <= 0 for a in a_values):
        raise DomainError("all A values must be positive")
    if any(b <= a for a, b in zip(a_values, a_values[1:])):
        raise DomainError("A values must be strictly increasing")

    args = [(a, B, C, sim, band, thresholds, keep_trajectories) for a in a_values]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(args))) as pool:
            entries = list(pool.map(_scan_one, *zip(*args)))
    else:
        entries = [_scan_one(*a) for a in args]
    return SurgeryScanResult(float(B), float(C), a_values, tuple(entries), sim, band, thresholds)
