"""Minimal SVG heatmaps of mode fields on the waveguide grid."""
from __future__ import annotations

import numpy as np

# RdBu-like diverging anchors, negative (blue) -> zero (white) -> positive (red)
_ANCHORS = np.array([
    [0.0, 33, 102, 172],
    [0.25, 103, 169, 207],
    [0.5, 247, 247, 247],
    [0.75, 239, 138, 98],
    [1.0, 178, 24, 43],
])


def diverging_color(t):
    """Hex colour for ``t`` in [-1, 1]."""
    u = 0.5 * (float(np.clip(t, -1.0, 1.0)) + 1.0)
    rgb = [np.interp(u, _ANCHORS[:, 0], _ANCHORS[:, i]) for i in (1, 2, 3)]
    return "#" + "".join(f"{int(round(c)):02x}" for c in rgb)


def field_grid(state, n_x, n_y):
    """Real field on a ``(2**n_y, 2**n_x)`` grid, sign fixed so the largest
    magnitude cell is positive."""
    amps = np.real(np.asarray(state)).reshape(2 ** n_y, 2 ** n_x)
    peak = amps.flat[np.argmax(np.abs(amps))]
    return amps if peak >= 0 else -amps


def render_svg(grid, title="", cell=24):
    """SVG text with one ``rect`` per grid cell.

    Row ``j`` of ``grid`` is the j-th y sample and is drawn with y increasing
    upwards. Each rect carries its value in ``data-value`` and its indices in
    ``data-ix``/``data-iy``.
    """
    grid = np.asarray(grid, dtype=float)
    ny_pts, nx_pts = grid.shape
    vmax = float(np.max(np.abs(grid))) or 1.0
    top = 24 if title else 0
    width, height = nx_pts * cell, ny_pts * cell + top
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">']
    if title:
        out.append(f'<text x="4" y="17" font-family="sans-serif" font-size="14">{title}</text>')
    for iy in range(ny_pts):
        y = top + (ny_pts - 1 - iy) * cell
        for ix in range(nx_pts):
            v = grid[iy, ix]
            out.append(
                f'<rect x="{ix * cell}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{diverging_color(v / vmax)}" data-ix="{ix}" data-iy="{iy}" '
                f'data-value="{v:.17g}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_mode_svg(path, state, n_x, n_y, title=""):
    grid = field_grid(state, n_x, n_y)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_svg(grid, title))
    return grid
