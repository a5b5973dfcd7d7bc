"""Plain-text SVG projections of trajectories."""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .model import Params, slow_manifold, steady_states

PLANES = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}
AXIS_NAMES = "XYZ"
MARGIN = 0.05


@dataclass(frozen=True)
class Viewport:
    """Maps data coordinates of a plane onto a ``width`` x ``height`` canvas
    with a 5% margin on every side; the vertical axis points up."""

    lo: tuple[float, float]
    hi: tuple[float, float]
    width: int
    height: int

    @classmethod
    def fit(cls, pts: np.ndarray, width: int, height: int) -> "Viewport":
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        return cls((float(lo[0]), float(lo[1])), (float(hi[0]), float(hi[1])), width, height)

    def _axis(self, v, k: int, size: int):
        mx = MARGIN * size
        span = self.hi[k] - self.lo[k]
        if span <= 0.0:
            return np.full_like(np.asarray(v, dtype=float), size / 2.0)
        return mx + (np.asarray(v, dtype=float) - self.lo[k]) / span * (size - 2 * mx)

    def to_px(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        x = self._axis(pts[:, 0], 0, self.width)
        y = self.height - self._axis(pts[:, 1], 1, self.height)
        return np.column_stack([x, y])


def _f(v: float) -> str:
    return f"{v:.3f}"


def render_svg(states: np.ndarray, plane: str, width: int = 800, height: int = 600,
               params: Params | None = None, mark_L: bool = False) -> str:
    """SVG text with one polyline of the projected samples.

    With ``mark_L`` the slow manifold segment between the projections of
    Ss2 and Ss3 onto it is drawn dashed, and Ss2/Ss3 get labelled circles;
    the viewport then also encloses those markers.
    """
    if plane not in PLANES:
        raise ValueError(f"unknown plane {plane!r}; choose from {', '.join(PLANES)}")
    i, j = PLANES[plane]
    states = np.asarray(states, dtype=float).reshape(-1, 3)
    if states.shape[0] == 0:
        raise ValueError("no samples to render")
    proj = states[:, [i, j]]

    marks = []
    seg = None
    if mark_L:
        if params is None:
            raise ValueError("marking L needs the parameters")
        L = slow_manifold(params)
        ss = steady_states(params)
        ends = [ss["Ss2"].point]
        marks.append(("Ss2", ss["Ss2"].point.as_array()))
        if ss["Ss3"].defined:
            marks.append(("Ss3", ss["Ss3"].point.as_array()))
            ends.append(ss["Ss3"].point)
        seg = np.array([L.point_at(float(L.axial(e))) for e in ends])
        if seg.shape[0] == 1:
            seg = np.vstack([seg, seg])

    extent = [proj]
    if seg is not None:
        extent.append(seg[:, [i, j]])
        extent.extend(m[1][[i, j]][None, :] for m in marks)
    vp = Viewport.fit(np.vstack(extent), width, height)

    px = vp.to_px(proj)
    pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in px)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{_f(width / 2)}" y="{_f(height - 4)}" font-size="12" text-anchor="middle">'
        f'{AXIS_NAMES[i]}</text>',
        f'<text x="10" y="{_f(height / 2)}" font-size="12">{AXIS_NAMES[j]}</text>',
        f'<polyline fill="none" stroke="#1f4e9a" stroke-width="0.6" points="{pts}"/>',
    ]
    if seg is not None:
        (x1, y1), (x2, y2) = vp.to_px(seg[:, [i, j]])
        out.append(f'<line class="slow-manifold" x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                   'stroke="#c0392b" stroke-width="1.2" stroke-dasharray="6,4"/>')
        for label, point in marks:
            (cx, cy), = vp.to_px(point[[i, j]])
            out.append(f'<circle class="steady-state" id="{label}" cx="{_f(cx)}" cy="{_f(cy)}" r="4" '
                       'fill="none" stroke="#c0392b" stroke-width="1.2"/>')
            out.append(f'<text x="{_f(cx + 6)}" y="{_f(cy - 6)}" font-size="12">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
