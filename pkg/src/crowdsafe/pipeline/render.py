"""Hand-written SVG output for congestion scatter plots and decision grids.

Output is plain text with fixed number formatting so identical inputs give
byte-identical files.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from crowdsafe.congestion.kmeans import as_point_array

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#d62728",
)
WIDTH, HEIGHT, PAD = 640, 480, 48
MARGIN = 0.10
N_TICKS = 5


def _fmt(v):
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


class _Frame:
    """Maps data coordinates to SVG pixels, y axis pointing up."""

    def __init__(self, xs, ys):
        if len(xs):
            x_lo, x_hi = float(min(xs)), float(max(xs))
            y_lo, y_hi = float(min(ys)), float(max(ys))
        else:
            x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0
        dx = (x_hi - x_lo) or 1.0
        dy = (y_hi - y_lo) or 1.0
        self.x_lo, self.x_hi = x_lo - MARGIN * dx, x_hi + MARGIN * dx
        self.y_lo, self.y_hi = y_lo - MARGIN * dy, y_hi + MARGIN * dy

    def px(self, x):
        return PAD + (x - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - 2 * PAD)

    def py(self, y):
        return HEIGHT - PAD - (y - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - 2 * PAD)


def _header(title):
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect class="background" x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text class="title" x="{WIDTH // 2}" y="{PAD // 2}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{escape(title)}</text>'
        )
    return out


def _axes(frame, x_label="x (m)", y_label="y (m)"):
    x0, x1 = PAD, WIDTH - PAD
    y0, y1 = HEIGHT - PAD, PAD
    out = [
        '<g class="axes" stroke="black" stroke-width="1" font-family="sans-serif" font-size="10">',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>',
    ]
    for i in range(N_TICKS):
        t = i / (N_TICKS - 1)
        xv = frame.x_lo + t * (frame.x_hi - frame.x_lo)
        yv = frame.y_lo + t * (frame.y_hi - frame.y_lo)
        xp, yp = _fmt(frame.px(xv)), _fmt(frame.py(yv))
        out.append(f'<line x1="{xp}" y1="{y0}" x2="{xp}" y2="{y0 + 4}"/>')
        out.append(f'<text x="{xp}" y="{y0 + 16}" text-anchor="middle" stroke="none">{_fmt(xv)}</text>')
        out.append(f'<line x1="{x0 - 4}" y1="{yp}" x2="{x0}" y2="{yp}"/>')
        out.append(f'<text x="{x0 - 6}" y="{yp}" text-anchor="end" stroke="none">{_fmt(yv)}</text>')
    out.append(f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 8}" text-anchor="middle" stroke="none">{x_label}</text>')
    out.append(
        f'<text x="12" y="{(y0 + y1) // 2}" text-anchor="middle" stroke="none" '
        f'transform="rotate(-90 12 {(y0 + y1) // 2})">{y_label}</text>'
    )
    out.append("</g>")
    return out


def scatter_svg(report, points, title=None):
    """Points colored by cluster, red centroid circles, dashed boxes around flagged clusters."""
    P = as_point_array(points) if len(points) else np.zeros((0, 2))
    centroids = list(report.centroids) if report is not None else []
    xs = list(P[:, 0]) + [c.x for c in centroids]
    ys = list(P[:, 1]) + [c.y for c in centroids]
    frame = _Frame(xs, ys)
    out = _header(title) + _axes(frame)

    if report is not None and len(P):
        labels = report.labels
        out.append('<g class="people">')
        for (x, y), lab in zip(P, labels):
            out.append(
                f'<circle class="person" cx="{_fmt(frame.px(x))}" cy="{_fmt(frame.py(y))}" r="2.5" '
                f'fill="{PALETTE[lab % len(PALETTE)]}"/>'
            )
        out.append("</g>")
        out.append('<g class="congestion" fill="none" stroke="black" stroke-width="1.5">')
        for cluster in report.congested_clusters:
            members = P[np.array(labels) == cluster]
            left = frame.px(members[:, 0].min()) - 6
            right = frame.px(members[:, 0].max()) + 6
            top = frame.py(members[:, 1].max()) - 6
            bottom = frame.py(members[:, 1].min()) + 6
            out.append(
                f'<rect class="congestion-box" data-cluster="{cluster}" x="{_fmt(left)}" y="{_fmt(top)}" '
                f'width="{_fmt(right - left)}" height="{_fmt(bottom - top)}" stroke-dasharray="6,4"/>'
            )
        out.append("</g>")
    if centroids:
        out.append('<g class="centroids" fill="none" stroke="red" stroke-width="2">')
        for i, c in enumerate(centroids):
            out.append(
                f'<circle class="centroid" data-cluster="{i}" cx="{_fmt(frame.px(c.x))}" '
                f'cy="{_fmt(frame.py(c.y))}" r="7"/>'
            )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_scatter(report, points, out_path, title=None):
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(scatter_svg(report, points, title))
    return out_path


def decision_grid_svg(trace, X, y, title=None, threshold=0.5):
    """Rasterized class map of a toy classifier with its training points on top."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).reshape(-1)
    gx, gy, values = trace.grid_x, trace.grid_y, trace.grid_values
    frame = _Frame([gx[0], gx[-1]], [gy[0], gy[-1]])
    frame.x_lo, frame.x_hi, frame.y_lo, frame.y_hi = gx[0], gx[-1], gy[0], gy[-1]
    out = _header(title)
    cw = (WIDTH - 2 * PAD) / (len(gx) - 1)
    ch = (HEIGHT - 2 * PAD) / (len(gy) - 1)
    out.append('<g class="grid" stroke="none">')
    for j in range(len(gy) - 1):
        for i in range(len(gx) - 1):
            v = values[j, i]
            fill = "#f4c7a1" if v > threshold else "#a9c8e8"
            out.append(
                f'<rect x="{_fmt(frame.px(gx[i]))}" y="{_fmt(frame.py(gy[j]) - ch)}" '
                f'width="{_fmt(cw)}" height="{_fmt(ch)}" fill="{fill}"/>'
            )
    out.append("</g>")
    out += _axes(frame, "x1", "x2")
    out.append('<g class="samples" stroke="black" stroke-width="0.5">')
    for (a, b), lab in zip(X, y):
        color = PALETTE[1] if lab > 0.5 else PALETTE[0]
        out.append(f'<circle cx="{_fmt(frame.px(a))}" cy="{_fmt(frame.py(b))}" r="3" fill="{color}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
