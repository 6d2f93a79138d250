"""Static SVG charts emitted by hand.

Every chart uses a fixed 800x600 viewport, fixed-precision coordinates and
carries its source data as CSV inside ``<metadata>`` so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .csvio import csv_text

WIDTH, HEIGHT = 800, 600
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
FONT = 'font-family="Helvetica, Arial, sans-serif"'


def esc(text) -> str:
    return (
        str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )


def num(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / max(count, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


def padded(lo: float, hi: float, frac: float = 0.05) -> tuple[float, float]:
    if hi == lo:
        pad = abs(lo) * 0.1 or 1.0
        return lo - pad, hi + pad
    pad = (hi - lo) * frac
    return lo - pad, hi + pad


@dataclass
class Axes:
    left: float
    top: float
    width: float
    height: float
    xlim: tuple[float, float]
    ylim: tuple[float, float]
    parts: list[str] = field(default_factory=list)

    def x(self, v: float) -> float:
        lo, hi = self.xlim
        return self.left + (v - lo) / (hi - lo) * self.width

    def y(self, v: float) -> float:
        lo, hi = self.ylim
        return self.top + self.height - (v - lo) / (hi - lo) * self.height

    def frame(self, xlabel="", ylabel="", title="", xticks=True):
        p = self.parts
        p.append(
            f'<rect x="{num(self.left)}" y="{num(self.top)}" width="{num(self.width)}" height="{num(self.height)}" '
            'fill="none" stroke="#333" stroke-width="1"/>'
        )
        if xticks:
            for t in nice_ticks(*self.xlim):
                xp = self.x(t)
                yb = self.top + self.height
                p.append(f'<line x1="{num(xp)}" y1="{num(yb)}" x2="{num(xp)}" y2="{num(yb + 4)}" stroke="#333"/>')
                p.append(f'<text x="{num(xp)}" y="{num(yb + 16)}" font-size="10" text-anchor="middle" {FONT}>{esc(f"{t:g}")}</text>')
        for t in nice_ticks(*self.ylim):
            yp = self.y(t)
            p.append(f'<line x1="{num(self.left - 4)}" y1="{num(yp)}" x2="{num(self.left)}" y2="{num(yp)}" stroke="#333"/>')
            p.append(f'<text x="{num(self.left - 6)}" y="{num(yp + 3)}" font-size="10" text-anchor="end" {FONT}>{esc(f"{t:g}")}</text>')
        if xlabel:
            p.append(
                f'<text x="{num(self.left + self.width / 2)}" y="{num(self.top + self.height + 32)}" font-size="12" '
                f'text-anchor="middle" {FONT}>{esc(xlabel)}</text>'
            )
        if ylabel:
            cx, cy = self.left - 42, self.top + self.height / 2
            p.append(
                f'<text x="{num(cx)}" y="{num(cy)}" font-size="12" text-anchor="middle" '
                f'transform="rotate(-90 {num(cx)} {num(cy)})" {FONT}>{esc(ylabel)}</text>'
            )
        if title:
            p.append(
                f'<text x="{num(self.left + self.width / 2)}" y="{num(self.top - 8)}" font-size="13" '
                f'text-anchor="middle" {FONT}>{esc(title)}</text>'
            )

    def polyline(self, xs, ys, color, width=2.0, dash=None):
        pts = " ".join(f"{num(self.x(a))},{num(self.y(b))}" for a, b in zip(xs, ys))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>')

    def band(self, xs, lo, hi, color, opacity=0.25):
        upper = [f"{num(self.x(a))},{num(self.y(b))}" for a, b in zip(xs, hi)]
        lower = [f"{num(self.x(a))},{num(self.y(b))}" for a, b in zip(reversed(xs), reversed(lo))]
        self.parts.append(f'<polygon points="{" ".join(upper + lower)}" fill="{color}" fill-opacity="{opacity}" stroke="none"/>')

    def point(self, x, y, color, label=None, radius=4.0, shape="circle"):
        cx, cy = self.x(x), self.y(y)
        if shape == "square":
            r = radius
            self.parts.append(
                f'<rect x="{num(cx - r)}" y="{num(cy - r)}" width="{num(2 * r)}" height="{num(2 * r)}" fill="{color}"/>'
            )
        else:
            self.parts.append(f'<circle cx="{num(cx)}" cy="{num(cy)}" r="{num(radius)}" fill="{color}"/>')
        if label:
            self.text(x, y, label, color=color, dx=6, dy=-6)

    def text(self, x, y, label, color="#111", dx=0.0, dy=0.0, size=11, anchor="start"):
        self.parts.append(
            f'<text x="{num(self.x(x) + dx)}" y="{num(self.y(y) + dy)}" font-size="{size}" fill="{color}" '
            f'text-anchor="{anchor}" {FONT}>{esc(label)}</text>'
        )

    def arrow(self, x0, y0, x1, y1, color, label=None):
        ax, ay, bx, by = self.x(x0), self.y(y0), self.x(x1), self.y(y1)
        self.parts.append(
            f'<line x1="{num(ax)}" y1="{num(ay)}" x2="{num(bx)}" y2="{num(by)}" stroke="{color}" '
            'stroke-width="1.5" marker-end="url(#arrow)"/>'
        )
        if label:
            self.parts.append(
                f'<text x="{num(bx + 4)}" y="{num(by - 4)}" font-size="11" fill="{color}" {FONT}>{esc(label)}</text>'
            )

    def rect(self, x0, y0, x1, y1, color):
        xa, xb = sorted((self.x(x0), self.x(x1)))
        ya, yb = sorted((self.y(y0), self.y(y1)))
        self.parts.append(
            f'<rect x="{num(xa)}" y="{num(ya)}" width="{num(xb - xa)}" height="{num(yb - ya)}" fill="{color}"/>'
        )

    def hline(self, v, color="#999", dash="4 3"):
        y = self.y(v)
        self.parts.append(
            f'<line x1="{num(self.left)}" y1="{num(y)}" x2="{num(self.left + self.width)}" y2="{num(y)}" '
            f'stroke="{color}" stroke-dasharray="{dash}"/>'
        )

    def vline(self, v, color="#999", dash="4 3"):
        x = self.x(v)
        self.parts.append(
            f'<line x1="{num(x)}" y1="{num(self.top)}" x2="{num(x)}" y2="{num(self.top + self.height)}" '
            f'stroke="{color}" stroke-dasharray="{dash}"/>'
        )


def document(title: str, axes: Sequence[Axes], header, rows, extra: Sequence[str] = ()) -> str:
    data = csv_text(header, rows)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<title>{esc(title)}</title>",
        f"<metadata><![CDATA[\n{data}]]></metadata>",
        '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" '
        'orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z" fill="context-stroke"/></marker></defs>',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.2f}" y="24" font-size="16" text-anchor="middle" {FONT}>{esc(title)}</text>',
    ]
    for ax in axes:
        out.extend(ax.parts)
    out.extend(extra)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def legend(entries, x=None, y=50) -> list[str]:
    x = WIDTH - 170 if x is None else x
    parts = []
    for i, (label, color) in enumerate(entries):
        yy = y + 16 * i
        parts.append(f'<rect x="{x}" y="{yy - 9}" width="12" height="10" fill="{color}"/>')
        parts.append(f'<text x="{x + 18}" y="{yy}" font-size="11" {FONT}>{esc(label)}</text>')
    return parts


def write(path, text: str) -> Path:
    path = Path(path)
    path.write_text(text, encoding="utf-8", newline="")
    return path


# --------------------------------------------------------------------------- charts


def bar_panels(title, groups, panels, units=None) -> str:
    """Grid of bar charts, one panel per named series over the same groups."""
    names = list(panels)
    ncols = 3
    nrows = max(1, math.ceil(len(names) / ncols))
    pw, ph = 200.0, (HEIGHT - 90) / nrows - 70
    axes, rows = [], []
    colors = {g: PALETTE[i % len(PALETTE)] for i, g in enumerate(groups)}
    for k, name in enumerate(names):
        values = list(panels[name])
        r, c = divmod(k, ncols)
        top = 70 + r * (ph + 70)
        left = 70 + c * (pw + 60)
        hi = max([0.0] + [v for v in values if math.isfinite(v)])
        ax = Axes(left, top, pw, ph, (0.0, float(len(groups))), (0.0, hi * 1.1 or 1.0))
        for i, (g, v) in enumerate(zip(groups, values)):
            if math.isfinite(v):
                ax.rect(i + 0.15, 0.0, i + 0.85, v, colors[g])
            rows.append([name, g, v])
        unit = f" [{units[name]}]" if units and units.get(name) not in (None, "-") else ""
        ax.frame(title=f"{name}{unit}", xticks=False)
        axes.append(ax)
    return document(title, axes, ["panel", "group", "value"], rows, legend([(g, colors[g]) for g in groups], x=WIDTH - 120, y=HEIGHT - 16 * len(groups) - 4))


def line_bands(title, series, xlabel, ylabel, header=None, rows=None) -> str:
    """Lines with optional shaded bands: ``series`` holds (label, x, y, lo, hi)."""
    xs = [v for s in series for v in s[1]]
    ys = [v for s in series for arr in (s[2], s[3] or s[2], s[4] or s[2]) for v in arr]
    ax = Axes(90, 50, 520, 470, padded(min(xs), max(xs), 0.0), padded(min(ys), max(ys)))
    entries = []
    for i, (label, x, y, lo, hi) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        if lo is not None and hi is not None:
            ax.band(x, lo, hi, color)
        ax.polyline(x, y, color)
        entries.append((label, color))
    ax.frame(xlabel, ylabel)
    if rows is None:
        header = ["series", "x", "y", "lo", "hi"]
        rows = [
            [label, a, b, (lo[i] if lo is not None else None), (hi[i] if hi is not None else None)]
            for label, x, y, lo, hi in series
            for i, (a, b) in enumerate(zip(x, y))
        ]
    return document(title, [ax], header, rows, legend(entries))


def biplot(title, xlabel, ylabel, row_points, col_points, vectors) -> str:
    """Symmetric CA map: rows as circles, columns as squares, supplementary vectors as arrows."""
    pts = [(x, y) for _, x, y in row_points + col_points]
    xs = [p[0] for p in pts] + [0.0]
    ys = [p[1] for p in pts] + [0.0]
    half = max(max(abs(v) for v in xs), max(abs(v) for v in ys)) or 1.0
    half *= 1.15
    ax = Axes(110, 50, 500, 500, (-half, half), (-half, half))
    ax.hline(0.0)
    ax.vline(0.0)
    rows = []
    for label, x, y in row_points:
        ax.point(x, y, PALETTE[0], label, radius=5)
        rows.append(["row", label, x, y])
    for label, x, y in col_points:
        ax.point(x, y, PALETTE[1], label, radius=3.5, shape="square")
        rows.append(["column", label, x, y])
    scale = half / 1.15
    for label, x, y in vectors:
        ax.arrow(0.0, 0.0, x * scale, y * scale, PALETTE[2], label)
        rows.append(["supplementary", label, x, y])
    ax.frame(xlabel, ylabel)
    return document(
        title,
        [ax],
        ["kind", "label", "dim1", "dim2"],
        rows,
        legend([("burgers", PALETTE[0]), ("CATA attributes", PALETTE[1]), ("TPA parameters", PALETTE[2])]),
    )


def scatter_fit(title, xlabel, ylabel, labels, x, y, annotation) -> str:
    ax = Axes(90, 50, 520, 470, padded(min(x), max(x), 0.1), padded(min(y), max(y), 0.1))
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    slope = sum((a - mx) * (b - my) for a, b in zip(x, y)) / sxx if sxx else 0.0
    x0, x1 = ax.xlim
    ax.polyline([x0, x1], [my + slope * (x0 - mx), my + slope * (x1 - mx)], "#999", 1.5, dash="6 4")
    rows = []
    for i, (lab, a, b) in enumerate(zip(labels, x, y)):
        ax.point(a, b, PALETTE[i % len(PALETTE)], lab, radius=5)
        rows.append([lab, a, b])
    ax.frame(xlabel, ylabel)
    note = f'<text x="{WIDTH - 180}" y="60" font-size="13" {FONT}>{esc(annotation)}</text>'
    return document(title, [ax], ["label", "x", "y"], rows, [note])


def coefficient_bars(title, names, estimates, errors) -> str:
    lo = min([0.0] + [e - 1.96 * s for e, s in zip(estimates, errors)])
    hi = max([0.0] + [e + 1.96 * s for e, s in zip(estimates, errors)])
    ax = Axes(90, 50, 560, 440, (0.0, float(len(names))), padded(lo, hi))
    ax.hline(0.0, "#333", "2 0")
    rows = []
    for i, (name, est, se) in enumerate(zip(names, estimates, errors)):
        color = PALETTE[i % len(PALETTE)]
        ax.rect(i + 0.2, 0.0, i + 0.8, est, color)
        ax.polyline([i + 0.5, i + 0.5], [est - 1.96 * se, est + 1.96 * se], "#111", 1.5)
        ax.text(i + 0.5, lo, name, anchor="middle", dy=18, size=10)
        rows.append([name, est, se])
    ax.frame(ylabel="standardized coefficient", xticks=False)
    return document(title, [ax], ["term", "estimate", "se"], rows)
