"""Deterministic output files: CSV/JSON writers, run manifests, and native
SVG rendering (heatmaps and line plots) with a fixed diverging palette
anchored at zero."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .config import config_hash


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    tool_version: str
    outputs: list = field(default_factory=list)
    wall_time_s: float = 0.0

    def write(self, out_dir: str) -> str:
        doc = {
            "command": self.command,
            "config_hash": config_hash(self.config),
            "seed": self.seed,
            "tool_version": self.tool_version,
            "outputs": sorted(self.outputs),
            "wall_time_s": self.wall_time_s,
        }
        path = os.path.join(out_dir, "manifest.json")
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        return path


class OutputWriter:
    """Collects output files under one directory and records the manifest.

    Data files (CSV/JSON/SVG) are byte-deterministic given config and seed;
    the manifest itself carries the wall time and is excluded from the
    byte-identity guarantee.
    """

    def __init__(self, out_dir: str, command: str, config: dict, seed: int, tool_version: str):
        os.makedirs(out_dir, exist_ok=True)
        self.out_dir = out_dir
        self.manifest = RunManifest(
            command=command, config=config, seed=seed, tool_version=tool_version
        )
        self._t0 = time.monotonic()

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def write_text(self, name: str, text: str) -> str:
        path = self.path(name)
        with open(path, "w") as fh:
            fh.write(text)
        self.manifest.outputs.append(name)
        return path

    def write_json(self, name: str, doc) -> str:
        return self.write_text(name, json.dumps(doc, indent=2) + "\n")

    def write_csv(self, name: str, header: list, rows) -> str:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        return self.write_text(name, "\n".join(lines) + "\n")

    def finish(self) -> str:
        self.manifest.wall_time_s = time.monotonic() - self._t0
        return self.manifest.write(self.out_dir)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


# ---------------------------------------------------------------------------
# SVG rendering


def _diverging_color(x: float) -> str:
    """Blue-white-red diverging map on [-1, 1], anchored at 0 = white."""
    x = float(np.clip(x, -1.0, 1.0))
    if x >= 0:
        r, g, b = 255, round(255 * (1 - x * 0.75) - 0), round(255 * (1 - x))
        g = round(255 * (1 - 0.75 * x))
    else:
        a = -x
        r, g, b = round(255 * (1 - a)), round(255 * (1 - 0.75 * a)), 255
    return f"rgb({int(r)},{int(g)},{int(b)})"


def render_heatmap_svg(
    xs: np.ndarray,
    ys: np.ndarray,
    values: np.ndarray,
    vmax: float,
    title: str,
    width: int = 760,
    height: int = 420,
    max_cells: tuple[int, int] = (91, 181),
) -> str:
    """Quadrilateral-cell heatmap in projected coordinates.

    xs, ys, values share shape (n_theta, n_phi); cells beyond max_cells are
    subsampled for file size.  The color scale is fixed at +-vmax.
    """
    nt, np_ = values.shape
    step_t = max(1, int(np.ceil((nt - 1) / max_cells[0])))
    step_p = max(1, int(np.ceil((np_ - 1) / max_cells[1])))
    it = list(range(0, nt, step_t))
    ip = list(range(0, np_, step_p))
    if it[-1] != nt - 1:
        it.append(nt - 1)
    if ip[-1] != np_ - 1:
        ip.append(np_ - 1)
    xs_s, ys_s, vals_s = xs[np.ix_(it, ip)], ys[np.ix_(it, ip)], values[np.ix_(it, ip)]

    margin = 40
    x_min, x_max = xs_s.min(), xs_s.max()
    y_min, y_max = ys_s.min(), ys_s.max()
    sx = (width - 2 * margin) / (x_max - x_min if x_max > x_min else 1.0)
    sy = (height - 2 * margin) / (y_max - y_min if y_max > y_min else 1.0)
    s = min(sx, sy)

    def px(x):
        return margin + (x - x_min) * s

    def py(y):
        return height - margin - (y - y_min) * s

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{title}</title>',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2:.1f}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title}</text>',
    ]
    nt_s, np_s = vals_s.shape
    for i in range(nt_s - 1):
        for j in range(np_s - 1):
            v = 0.25 * (vals_s[i, j] + vals_s[i + 1, j] + vals_s[i, j + 1] + vals_s[i + 1, j + 1])
            color = _diverging_color(v / vmax)
            pts = (
                f"{px(xs_s[i, j]):.2f},{py(ys_s[i, j]):.2f} "
                f"{px(xs_s[i + 1, j]):.2f},{py(ys_s[i + 1, j]):.2f} "
                f"{px(xs_s[i + 1, j + 1]):.2f},{py(ys_s[i + 1, j + 1]):.2f} "
                f"{px(xs_s[i, j + 1]):.2f},{py(ys_s[i, j + 1]):.2f}"
            )
            parts.append(f'<polygon points="{pts}" fill="{color}" stroke="none"/>')
    parts.append(_colorbar_svg(width - 30, margin, height - 2 * margin, vmax))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _colorbar_svg(x: float, y: float, h: float, vmax: float, n: int = 32) -> str:
    parts = []
    for i in range(n):
        frac = 1.0 - (i + 0.5) / n  # top = +vmax
        color = _diverging_color(2 * frac - 1.0)
        parts.append(
            f'<rect x="{x:.1f}" y="{y + i * h / n:.1f}" width="12" height="{h / n + 0.5:.2f}" '
            f'fill="{color}"/>'
        )
    parts.append(
        f'<text x="{x - 4:.1f}" y="{y + 10:.1f}" text-anchor="end" font-size="10" '
        f'font-family="sans-serif">{vmax:+.3f}</text>'
    )
    parts.append(
        f'<text x="{x - 4:.1f}" y="{y + h:.1f}" text-anchor="end" font-size="10" '
        f'font-family="sans-serif">{-vmax:+.3f}</text>'
    )
    return "\n".join(parts)


def render_lines_svg(
    x: np.ndarray,
    series: dict,
    title: str,
    xlabel: str,
    ylabel: str,
    width: int = 760,
    height: int = 420,
    logx: bool = False,
    logy: bool = False,
    markers: list | None = None,
) -> str:
    """Simple multi-series line plot; series maps label -> y array."""
    margin = 55
    x = np.asarray(x, dtype=float)
    xs = np.log10(x) if logx else x
    all_y = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    ys_all = np.log10(all_y[all_y > 0]) if logy else all_y
    x_min, x_max = float(xs.min()), float(xs.max())
    y_min, y_max = float(ys_all.min()), float(ys_all.max())
    if x_max == x_min:
        x_max += 1.0
    if y_max == y_min:
        y_max += 1.0
    pad = 0.05 * (y_max - y_min)
    y_min -= pad
    y_max += pad

    def px(v):
        return margin + (v - x_min) / (x_max - x_min) * (width - 2 * margin)

    def py(v):
        return height - margin - (v - y_min) / (y_max - y_min) * (height - 2 * margin)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{title}</title>',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="#888"/>',
        f'<text x="{width / 2:.0f}" y="22" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title}</text>',
        f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif">{xlabel}</text>',
        f'<text x="16" y="{height / 2:.0f}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif" transform="rotate(-90 16 {height / 2:.0f})">{ylabel}</text>',
    ]
    for idx, (label, yv) in enumerate(series.items()):
        yv = np.asarray(yv, dtype=float)
        ok = np.isfinite(yv) & (yv > 0 if logy else np.isfinite(yv))
        yy = np.where(ok, yv, np.nan)
        yy = np.log10(yy) if logy else yy
        pts = " ".join(
            f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xs, yy) if np.isfinite(b)
        )
        color = colors[idx % len(colors)]
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{width - margin - 6}" y="{margin + 16 + 14 * idx}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif" fill="{color}">{label}</text>'
        )
    for mx in markers or []:
        vx = np.log10(mx) if logx else mx
        parts.append(
            f'<line x1="{px(vx):.2f}" y1="{margin}" x2="{px(vx):.2f}" '
            f'y2="{height - margin}" stroke="#555" stroke-dasharray="5,4"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
