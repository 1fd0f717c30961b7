"""Deterministic SVG charts of dispersion branches along the diagonal slice.

Hand-rolled SVG keeps the plot dependency-free and byte-stable: a fixed
canvas, a fixed palette, and fixed-width coordinate formatting mean the same
surface always serializes to the same bytes.  One polyline per sorted branch;
touch and crossing locations get circular markers, gap records a vertical
width bar, each carrying a tooltip with the classification details.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .bands import DispersionSurface, TouchReport

WIDTH = 800.0
HEIGHT = 500.0
MARGIN_LEFT = 72.0
MARGIN_RIGHT = 24.0
MARGIN_TOP = 44.0
MARGIN_BOTTOM = 58.0

BAND_PALETTE = ("#1b6ca8", "#c23b22", "#2e8540", "#8031a7", "#b8860b",
                "#00787a", "#5d5d5d", "#d04a8c")
MARKER_FILL = {"cone": "#c23b22", "parabolic": "#e07b00", "crossing": "#444444"}
GAP_COLOR = "#2e8540"

_X_TICKS = ((-np.pi, "-pi"), (-np.pi / 2.0, "-pi/2"), (0.0, "0"),
            (np.pi / 2.0, "pi/2"), (np.pi, "pi"))


def _fmt(x: float) -> str:
    """Fixed-width coordinate text (avoids '-0.000000')."""
    out = f"{float(x):.6f}"
    return "0.000000" if out == "-0.000000" else out


class _Frame:
    """Affine map from (theta1, eta) to pixel coordinates."""

    def __init__(self, theta_lo, theta_hi, eta_lo, eta_hi):
        self.theta_lo = theta_lo
        self.theta_hi = theta_hi
        self.eta_lo = eta_lo
        self.eta_hi = eta_hi
        self.x0 = MARGIN_LEFT
        self.x1 = WIDTH - MARGIN_RIGHT
        self.y0 = HEIGHT - MARGIN_BOTTOM
        self.y1 = MARGIN_TOP

    def x(self, theta: float) -> float:
        frac = (theta - self.theta_lo) / (self.theta_hi - self.theta_lo)
        return self.x0 + frac * (self.x1 - self.x0)

    def y(self, eta: float) -> float:
        frac = (eta - self.eta_lo) / (self.eta_hi - self.eta_lo)
        return self.y0 + frac * (self.y1 - self.y0)


def _frame_for(surface: DispersionSurface) -> _Frame:
    lo = float(np.min(surface.values))
    hi = float(np.max(surface.values))
    pad = 0.05 * max(hi - lo, 1e-3)
    return _Frame(float(surface.theta[0]), float(surface.theta[-1]),
                  lo - pad, hi + pad)


def _polyline(frame: _Frame, theta: np.ndarray, values: np.ndarray,
              color: str) -> str:
    points = " ".join(f"{_fmt(frame.x(t))},{_fmt(frame.y(v))}"
                      for t, v in zip(theta, values))
    return (f'<polyline fill="none" stroke="{color}" stroke-width="1.6" '
            f'points="{points}"/>')


def _axes(frame: _Frame) -> list[str]:
    parts = [
        f'<rect x="0" y="0" width="{_fmt(WIDTH)}" height="{_fmt(HEIGHT)}" '
        'fill="#ffffff"/>',
    ]
    # admissibility window |eta| <= 1, clipped to the frame
    win_lo = max(frame.eta_lo, -1.0)
    win_hi = min(frame.eta_hi, 1.0)
    if win_hi > win_lo:
        top = frame.y(win_hi)
        parts.append(
            f'<rect x="{_fmt(frame.x0)}" y="{_fmt(top)}" '
            f'width="{_fmt(frame.x1 - frame.x0)}" '
            f'height="{_fmt(frame.y(win_lo) - top)}" fill="#edf3fa"/>'
        )
    parts.append(
        f'<rect x="{_fmt(frame.x0)}" y="{_fmt(frame.y1)}" '
        f'width="{_fmt(frame.x1 - frame.x0)}" '
        f'height="{_fmt(frame.y0 - frame.y1)}" fill="none" stroke="#333333" '
        'stroke-width="1"/>'
    )
    for tick, label in _X_TICKS:
        if tick < frame.theta_lo - 1e-9 or tick > frame.theta_hi + 1e-9:
            continue
        x = frame.x(tick)
        parts.append(f'<line x1="{_fmt(x)}" y1="{_fmt(frame.y0)}" '
                     f'x2="{_fmt(x)}" y2="{_fmt(frame.y0 + 5.0)}" '
                     'stroke="#333333" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(x)}" y="{_fmt(frame.y0 + 20.0)}" '
                     'font-family="monospace" font-size="12" '
                     f'text-anchor="middle" fill="#333333">{label}</text>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        eta = frame.eta_lo + frac * (frame.eta_hi - frame.eta_lo)
        y = frame.y(eta)
        parts.append(f'<line x1="{_fmt(frame.x0 - 5.0)}" y1="{_fmt(y)}" '
                     f'x2="{_fmt(frame.x0)}" y2="{_fmt(y)}" '
                     'stroke="#333333" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(frame.x0 - 9.0)}" y="{_fmt(y + 4.0)}" '
                     'font-family="monospace" font-size="12" '
                     f'text-anchor="end" fill="#333333">{eta:.3f}</text>')
    parts.append(
        f'<text x="{_fmt((frame.x0 + frame.x1) / 2.0)}" '
        f'y="{_fmt(HEIGHT - 14.0)}" font-family="monospace" font-size="13" '
        'text-anchor="middle" fill="#333333">theta1 (diagonal slice, '
        'theta2 = -theta1)</text>'
    )
    parts.append(
        f'<text x="18" y="{_fmt((frame.y0 + frame.y1) / 2.0)}" '
        'font-family="monospace" font-size="13" text-anchor="middle" '
        f'fill="#333333" transform="rotate(-90 18 '
        f'{_fmt((frame.y0 + frame.y1) / 2.0)})">eta</text>'
    )
    return parts


def _markers(frame: _Frame, reports) -> list[str]:
    parts = []
    for rep in reports:
        if rep.theta1 is None:
            continue
        x = frame.x(rep.theta1)
        if rep.kind == "gap":
            half = 0.5 * rep.separation
            y_lo = frame.y(rep.value - half)
            y_hi = frame.y(rep.value + half)
            tip = (f"gap pair={rep.band_pair} width={rep.gap_width:.6g} "
                   f"theta1={rep.theta1:.6g}")
            parts.append(
                f'<g stroke="{GAP_COLOR}" stroke-width="1.4">'
                f'<title>{escape(tip)}</title>'
                f'<line x1="{_fmt(x)}" y1="{_fmt(y_lo)}" x2="{_fmt(x)}" '
                f'y2="{_fmt(y_hi)}"/>'
                f'<line x1="{_fmt(x - 4.0)}" y1="{_fmt(y_lo)}" '
                f'x2="{_fmt(x + 4.0)}" y2="{_fmt(y_lo)}"/>'
                f'<line x1="{_fmt(x - 4.0)}" y1="{_fmt(y_hi)}" '
                f'x2="{_fmt(x + 4.0)}" y2="{_fmt(y_hi)}"/>'
                '</g>'
            )
        else:
            fill = MARKER_FILL.get(rep.kind, "#444444")
            detail = ""
            if rep.gamma is not None:
                detail = f" gamma={rep.gamma:.6g}"
            elif rep.curvature is not None:
                detail = f" curvature={rep.curvature:.6g}"
            tip = (f"{rep.kind} pair={rep.band_pair} "
                   f"theta1={rep.theta1:.6g}{detail}")
            parts.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(frame.y(rep.value))}" '
                f'r="4" fill="{fill}" stroke="#ffffff" stroke-width="1">'
                f'<title>{escape(tip)}</title></circle>'
            )
    return parts


def _legend(frame: _Frame, dim: int) -> list[str]:
    parts = []
    x = frame.x1 - 86.0
    for band in range(dim):
        color = BAND_PALETTE[band % len(BAND_PALETTE)]
        y = frame.y1 + 14.0 + 16.0 * band
        parts.append(f'<line x1="{_fmt(x)}" y1="{_fmt(y - 4.0)}" '
                     f'x2="{_fmt(x + 18.0)}" y2="{_fmt(y - 4.0)}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{_fmt(x + 24.0)}" y="{_fmt(y)}" '
                     'font-family="monospace" font-size="12" '
                     f'fill="#333333">band {band}</text>')
    return parts


def render_band_chart(surface: DispersionSurface,
                      reports: tuple[TouchReport, ...] = (),
                      title: str = "") -> str:
    """Serialize a sampled surface (plus classified features) to SVG text."""
    frame = _frame_for(surface)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(WIDTH)}" '
        f'height="{_fmt(HEIGHT)}" viewBox="0 0 {_fmt(WIDTH)} {_fmt(HEIGHT)}" '
        'role="img">',
    ]
    if title:
        parts.append(f"<title>{escape(title)}</title>")
        parts.append(f'<text x="{_fmt(WIDTH / 2.0)}" y="26" '
                     'font-family="monospace" font-size="15" '
                     f'text-anchor="middle" fill="#111111">{escape(title)}'
                     '</text>')
    parts.extend(_axes(frame))
    for band in range(surface.dim):
        color = BAND_PALETTE[band % len(BAND_PALETTE)]
        parts.append(_polyline(frame, surface.theta, surface.values[:, band],
                               color))
    parts.extend(_markers(frame, reports))
    parts.extend(_legend(frame, surface.dim))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
