"""Self-contained SVG scatter plots for labeled 2-D point sets.

Plain text output keeps figures deterministic and diffable: the same
coordinates and labels always serialize to the same bytes, so artifacts
can be compared in tests without raster tolerance games.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

# fixed per-class colors so every figure is directly comparable
CLASS_COLORS = {
    "caused_motion": "#1f77b4",
    "ditransitive": "#2ca02c",
    "transitive": "#d62728",
    "resultative": "#ff7f0e",
}

_EXTRA_COLORS = ("#7f7f7f", "#8c564b", "#e377c2", "#bcbd22", "#17becf")

_WIDTH = 640
_HEIGHT = 520
_PLOT_TOP = 40.0
_PLOT_BOTTOM = 460.0
_PLOT_LEFT = 40.0
_PLOT_RIGHT = 600.0
_RADIUS = 2.5


def class_color(name: str, index: int = 0) -> str:
    """Color for a class name; canonical classes get their fixed color."""
    try:
        return CLASS_COLORS[name]
    except KeyError:
        return _EXTRA_COLORS[index % len(_EXTRA_COLORS)]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _placed(coords: np.ndarray) -> np.ndarray:
    """Map data coordinates into the plot box, preserving aspect ratio."""
    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    span = hi - lo
    avail_x = _PLOT_RIGHT - _PLOT_LEFT - 2 * _RADIUS
    avail_y = _PLOT_BOTTOM - _PLOT_TOP - 2 * _RADIUS
    scales = []
    if span[0] > 0:
        scales.append(avail_x / span[0])
    if span[1] > 0:
        scales.append(avail_y / span[1])
    s = min(scales) if scales else 1.0
    center = (lo + hi) / 2.0
    cx = (_PLOT_LEFT + _PLOT_RIGHT) / 2.0
    cy = (_PLOT_TOP + _PLOT_BOTTOM) / 2.0
    out = np.empty_like(coords)
    out[:, 0] = cx + (coords[:, 0] - center[0]) * s
    # svg y grows downward
    out[:, 1] = cy - (coords[:, 1] - center[1]) * s
    return out


def scatter_svg(
    coords: np.ndarray,
    labels: np.ndarray,
    class_names: tuple[str, ...] | list[str],
    title: str = "",
) -> str:
    """Render an SVG scatter, one fixed color per class, legend along the bottom."""
    coords = np.asarray(coords, dtype=np.float64)
    labels = np.asarray(labels)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise ValueError(f"coords must be (n, 2), got {coords.shape}")
    if labels.shape != (coords.shape[0],):
        raise ValueError("labels must be 1-D with one entry per point")
    if not np.isfinite(coords).all():
        raise ValueError("coords must be finite")
    if coords.shape[0] and (labels.min() < 0 or labels.max() >= len(class_names)):
        raise ValueError("label outside class_names range")

    colors = [class_color(name, i) for i, name in enumerate(class_names)]
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>',
        f'<rect x="{_fmt(_PLOT_LEFT)}" y="{_fmt(_PLOT_TOP)}" '
        f'width="{_fmt(_PLOT_RIGHT - _PLOT_LEFT)}" '
        f'height="{_fmt(_PLOT_BOTTOM - _PLOT_TOP)}" '
        'fill="none" stroke="#cccccc" stroke-width="1"/>',
    ]
    if title:
        lines.append(
            f'<text x="{_WIDTH // 2}" y="26" text-anchor="middle" '
            'font-family="sans-serif" font-size="16" fill="#000000">'
            f"{escape(title)}</text>"
        )
    if coords.shape[0]:
        placed = _placed(coords)
        for i in range(placed.shape[0]):
            lines.append(
                f'<circle cx="{_fmt(placed[i, 0])}" cy="{_fmt(placed[i, 1])}" '
                f'r="{_RADIUS}" fill="{colors[int(labels[i])]}" fill-opacity="0.7"/>'
            )
    x = _PLOT_LEFT
    y = _HEIGHT - 25
    for i, name in enumerate(class_names):
        lines.append(
            f'<circle cx="{_fmt(x + 6)}" cy="{_fmt(y - 4)}" r="5" fill="{colors[i]}"/>'
        )
        lines.append(
            f'<text x="{_fmt(x + 16)}" y="{_fmt(y)}" font-family="sans-serif" '
            f'font-size="13" fill="#000000">{escape(str(name))}</text>'
        )
        x += (_PLOT_RIGHT - _PLOT_LEFT) / max(1, len(class_names))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def save_scatter(
    path: str | Path,
    coords: np.ndarray,
    labels: np.ndarray,
    class_names: tuple[str, ...] | list[str],
    title: str = "",
) -> None:
    Path(path).write_text(
        scatter_svg(coords, labels, class_names, title), encoding="utf-8"
    )
