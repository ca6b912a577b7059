"""Grid CSV files, flat JSON results and plain-text SVG plots."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


class GridFormatError(ValueError):
    pass


# ---------------------------------------------------------------- grid csv

def write_grid_csv(path, values, nx, ny, n_per_node=1):
    """Nodal values row-major over the (nx+1) x (ny+1) node grid.

    One line per node row j; each line lists (nx+1)*n_per_node values.
    Floats are written with repr so a read/write cycle is bit-identical.
    """
    v = np.asarray(values, dtype=float).ravel()
    per_row = (nx + 1) * n_per_node
    if v.size != per_row * (ny + 1):
        raise GridFormatError(f"{v.size} values do not fit a {nx}x{ny} grid with {n_per_node} per node")
    lines = [f"# {nx} {ny} {n_per_node}"]
    for j in range(ny + 1):
        lines.append(",".join(repr(float(x)) for x in v[j * per_row:(j + 1) * per_row]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid_csv(path):
    """(values, nx, ny, n_per_node) of a grid CSV."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise GridFormatError(f"{path}: missing '# nx ny n_per_node' header")
    try:
        nx, ny, npn = (int(t) for t in lines[0][1:].split())
    except ValueError as exc:
        raise GridFormatError(f"{path}: bad header {lines[0]!r}") from exc
    rows = [ln for ln in lines[1:] if ln.strip()]
    if len(rows) != ny + 1:
        raise GridFormatError(f"{path}: expected {ny + 1} rows, found {len(rows)}")
    vals = []
    for ln in rows:
        parts = ln.split(",")
        if len(parts) != (nx + 1) * npn:
            raise GridFormatError(f"{path}: row of length {len(parts)}, expected {(nx + 1) * npn}")
        vals.extend(float(p) for p in parts)
    return np.array(vals), nx, ny, npn


# ---------------------------------------------------------------- json

def _plain(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def write_json(path, data):
    Path(path).write_text(json.dumps({k: _plain(v) for k, v in data.items()}, indent=2) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


# ---------------------------------------------------------------- svg

def _gray(t):
    g = int(round(255 * (1.0 - t)))
    return f"#{g:02x}{g:02x}{g:02x}"


def _heat(t):
    # white -> blue -> black ramp
    t = min(max(t, 0.0), 1.0)
    if t < 0.5:
        u = 2 * t
        r, g, b = 255 * (1 - u), 255 * (1 - u * 0.6), 255
    else:
        u = 2 * (t - 0.5)
        r, g, b = 0, 102 * (1 - u), 255 * (1 - u)
    return f"#{int(r):02x}{int(g):02x}{int(b):02x}"


def svg_heatmap(path, grid, title="", kind="design", cell=6):
    """Heatmap of a (rows, cols) node grid, row 0 at the bottom.

    kind="design" maps [-1, 1] to white..black, kind="field" maps
    |value| / max |value| to a blue ramp.
    """
    grid = np.asarray(grid, dtype=float)
    rows, cols = grid.shape
    if kind == "design":
        t = (np.clip(grid, -1, 1) + 1) / 2
        color = _gray
    else:
        mag = np.abs(grid)
        t = mag / mag.max() if mag.max() > 0 else mag
        color = _heat
    w, h = cols * cell, rows * cell
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h + 20}" viewBox="0 0 {w} {h + 20}">',
           f'<text x="4" y="14" font-family="sans-serif" font-size="12">{title}</text>']
    for j in range(rows):
        y = 20 + (rows - 1 - j) * cell
        for i in range(cols):
            out.append(f'<rect x="{i * cell}" y="{y}" width="{cell}" height="{cell}" fill="{color(t[j, i])}"/>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def svg_lines(path, x, series, title="", xlabel="", ylabel="", width=480, height=320):
    """Line chart; `series` maps a label to y values (NaN points skipped)."""
    x = np.asarray(x, dtype=float)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    ys = [np.asarray(v, dtype=float) for v in series.values()]
    allv = np.concatenate([v[np.isfinite(v)] for v in ys]) if ys else np.array([0.0])
    lo, hi = float(allv.min()), float(allv.max())
    if hi == lo:
        hi = lo + 1.0
    x0, x1 = float(x.min()), float(x.max())
    if x1 == x0:
        x1 = x0 + 1.0
    m = 50

    def px(v):
        return m + (v - x0) / (x1 - x0) * (width - 2 * m)

    def py(v):
        return height - m - (v - lo) / (hi - lo) * (height - 2 * m)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<text x="{m}" y="20" font-family="sans-serif" font-size="13">{title}</text>',
           f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>',
           f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>',
           f'<text x="{width / 2}" y="{height - 12}" font-family="sans-serif" font-size="12">{xlabel}</text>',
           f'<text x="8" y="{m - 10}" font-family="sans-serif" font-size="12">{ylabel}</text>',
           f'<text x="{m - 4}" y="{height - m + 14}" font-family="sans-serif" font-size="10">{x0:.4g}</text>',
           f'<text x="{width - m - 20}" y="{height - m + 14}" font-family="sans-serif" font-size="10">{x1:.4g}</text>',
           f'<text x="4" y="{height - m}" font-family="sans-serif" font-size="10">{lo:.4g}</text>',
           f'<text x="4" y="{m + 4}" font-family="sans-serif" font-size="10">{hi:.4g}</text>']
    for k, (label, y) in enumerate(zip(series, ys)):
        c = colors[k % len(colors)]
        ok = np.isfinite(y)
        pts = " ".join(f"{px(a):.1f},{py(b):.1f}" for a, b in zip(x[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="2" points="{pts}"/>')
        out.append(f'<text x="{width - m - 90}" y="{m + 16 * k}" fill="{c}" font-family="sans-serif" '
                   f'font-size="12">{label}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
