"""Minimal static SVG output: line plots and heatmaps.

Deliberately small: linear or logarithmic axes, a handful of tick labels, an
optional dashed overlay curve on heatmaps.  Every figure is rendered from
columnar data that is also written as CSV, so plots are derived artifacts
and never the only record of a run.
"""

import math

__all__ = ["line_plot", "heatmap"]

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 30, 30, 55
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#17becf", "#e377c2", "#7f7f7f", "#bcbd22")

# compact viridis-like color ramp for heatmaps
_RAMP = ((0.267, 0.005, 0.329), (0.283, 0.141, 0.458), (0.254, 0.265, 0.530),
         (0.207, 0.372, 0.553), (0.164, 0.471, 0.558), (0.128, 0.567, 0.551),
         (0.135, 0.659, 0.518), (0.267, 0.749, 0.441), (0.478, 0.821, 0.318),
         (0.741, 0.873, 0.150), (0.993, 0.906, 0.144))


def _ramp_color(u: float) -> str:
    u = min(max(u, 0.0), 1.0)
    x = u * (len(_RAMP) - 1)
    k = min(int(x), len(_RAMP) - 2)
    f = x - k
    rgb = [(1 - f) * _RAMP[k][c] + f * _RAMP[k + 1][c] for c in range(3)]
    return "#%02x%02x%02x" % tuple(int(round(255 * v)) for v in rgb)


class _Axis:
    def __init__(self, lo, hi, pixel_lo, pixel_hi, log=False):
        if log and (lo <= 0 or hi <= 0):
            raise ValueError("log axis needs positive bounds")
        if lo == hi:
            pad = abs(lo) * 0.05 + 1e-12
            lo, hi = lo - pad, hi + pad
        self.lo, self.hi, self.log = lo, hi, log
        self.p0, self.p1 = pixel_lo, pixel_hi

    def place(self, v: float) -> float:
        if self.log:
            u = (math.log10(v) - math.log10(self.lo)) / (math.log10(self.hi) - math.log10(self.lo))
        else:
            u = (v - self.lo) / (self.hi - self.lo)
        return self.p0 + u * (self.p1 - self.p0)

    def ticks(self, count=5):
        if self.log:
            lo, hi = math.ceil(math.log10(self.lo) - 1e-9), math.floor(math.log10(self.hi) + 1e-9)
            return [10.0 ** k for k in range(int(lo), int(hi) + 1)]
        return [self.lo + (self.hi - self.lo) * k / (count - 1) for k in range(count)]


def _tick_label(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.0e}"
    return f"{v:.4g}"


def _frame(parts, xaxis, yaxis, xlabel, ylabel, title):
    parts.append(f'<rect x="{_ML}" y="{_MT}" width="{_W-_ML-_MR}" height="{_H-_MT-_MB}" '
                 'fill="none" stroke="#333"/>')
    for v in xaxis.ticks():
        x = xaxis.place(v)
        parts.append(f'<line x1="{x:.1f}" y1="{_H-_MB}" x2="{x:.1f}" y2="{_H-_MB+5}" stroke="#333"/>')
        parts.append(f'<text x="{x:.1f}" y="{_H-_MB+18}" font-size="11" text-anchor="middle">'
                     f'{_tick_label(v)}</text>')
    for v in yaxis.ticks():
        y = yaxis.place(v)
        parts.append(f'<line x1="{_ML-5}" y1="{y:.1f}" x2="{_ML}" y2="{y:.1f}" stroke="#333"/>')
        parts.append(f'<text x="{_ML-8}" y="{y+4:.1f}" font-size="11" text-anchor="end">'
                     f'{_tick_label(v)}</text>')
    parts.append(f'<text x="{(_ML+_W-_MR)/2}" y="{_H-12}" font-size="13" text-anchor="middle">'
                 f'{xlabel}</text>')
    parts.append(f'<text x="16" y="{(_MT+_H-_MB)/2}" font-size="13" text-anchor="middle" '
                 f'transform="rotate(-90 16 {(_MT+_H-_MB)/2})">{ylabel}</text>')
    if title:
        parts.append(f'<text x="{(_ML+_W-_MR)/2}" y="18" font-size="13" text-anchor="middle">'
                     f'{title}</text>')


def line_plot(path, series, *, xlabel="", ylabel="", title="", logx=False, logy=False):
    """Write a multi-series line plot.

    ``series`` is a list of (label, x values, y values [, style]) where style
    may contain "dash" for a dashed stroke.
    """
    xs = [x for s in series for x in s[1]]
    ys = [y for s in series for y in s[2]]
    if not xs:
        raise ValueError("no data to plot")
    xaxis = _Axis(min(xs), max(xs), _ML, _W - _MR, log=logx)
    yaxis = _Axis(min(ys), max(ys), _H - _MB, _MT, log=logy)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
             f'viewBox="0 0 {_W} {_H}" font-family="sans-serif">',
             f'<rect width="{_W}" height="{_H}" fill="white"/>']
    _frame(parts, xaxis, yaxis, xlabel, ylabel, title)
    for k, entry in enumerate(series):
        label, sx, sy = entry[0], entry[1], entry[2]
        style = entry[3] if len(entry) > 3 else ""
        pts = " ".join(f"{xaxis.place(x):.2f},{yaxis.place(y):.2f}" for x, y in zip(sx, sy))
        dash = ' stroke-dasharray="6,4"' if "dash" in style else ""
        color = _COLORS[k % len(_COLORS)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>')
        parts.append(f'<text x="{_W-_MR-6}" y="{_MT+16+14*k}" font-size="11" text-anchor="end" '
                     f'fill="{color}">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def heatmap(path, x_values, y_values, grid, *, xlabel="", ylabel="", title="",
            overlay=None, vmin=None, vmax=None):
    """Write a cell heatmap of grid[i][j] over (x_values[j], y_values[i]).

    ``overlay`` is an optional (x array, y array) curve drawn dashed white,
    e.g. a threshold line on top of a population map.
    """
    nx, ny = len(x_values), len(y_values)
    flat = [grid[i][j] for i in range(ny) for j in range(nx)
            if not math.isnan(grid[i][j])]
    if not flat:
        raise ValueError("empty heatmap grid")
    lo = min(flat) if vmin is None else vmin
    hi = max(flat) if vmax is None else vmax
    span = hi - lo if hi > lo else 1.0

    xaxis = _Axis(min(x_values), max(x_values), _ML, _W - _MR)
    yaxis = _Axis(min(y_values), max(y_values), _H - _MB, _MT)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
             f'viewBox="0 0 {_W} {_H}" font-family="sans-serif">',
             f'<rect width="{_W}" height="{_H}" fill="white"/>']
    # cell edges at midpoints between sample coordinates
    def edges(vals, axis):
        es = [axis.place(vals[0])]
        for a, b in zip(vals[:-1], vals[1:]):
            es.append(axis.place(0.5 * (a + b)))
        es.append(axis.place(vals[-1]))
        return es

    xe, ye = edges(list(x_values), xaxis), edges(list(y_values), yaxis)
    for i in range(ny):
        for j in range(nx):
            v = grid[i][j]
            if math.isnan(v):
                continue
            color = _ramp_color((v - lo) / span)
            x0, x1 = sorted((xe[j], xe[j + 1]))
            y0, y1 = sorted((ye[i], ye[i + 1]))
            parts.append(f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{x1-x0:.2f}" '
                         f'height="{y1-y0:.2f}" fill="{color}"/>')
    _frame(parts, xaxis, yaxis, xlabel, ylabel, title)
    if overlay is not None:
        ox, oy = overlay
        pts = " ".join(
            f"{xaxis.place(x):.2f},{yaxis.place(y):.2f}"
            for x, y in zip(ox, oy)
            if xaxis.lo <= x <= xaxis.hi and yaxis.lo <= y <= yaxis.hi
        )
        if pts:
            parts.append(f'<polyline points="{pts}" fill="none" stroke="white" '
                         'stroke-width="2" stroke-dasharray="8,5"/>')
    parts.append(f'<text x="{_W-_MR-6}" y="{_MT-8}" font-size="10" text-anchor="end">'
                 f'range [{_tick_label(lo)}, {_tick_label(hi)}]</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
