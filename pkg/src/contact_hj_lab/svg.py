"""Standalone SVG line charts for the experiment artifacts.

Pure string assembly: fixed palette, fixed geometry, "%.2f" pixel
coordinates, so a chart is a deterministic function of its inputs. The
log-y mode drops nonpositive points (they have no log image); a series
that loses every point still appears in the legend so its absence is
visible rather than silent.
"""

from __future__ import annotations

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 24, 44, 52


def _nice_step(span: float) -> float:
    raw = span / 5.0
    mag = 10.0 ** np.floor(np.log10(raw))
    for m in (1.0, 2.0, 5.0):
        if raw <= m * mag:
            return m * mag
    return 10.0 * mag


def _linear_ticks(lo: float, hi: float):
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    step = _nice_step(hi - lo)
    first = np.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else float(v))
        v += step
    return ticks


def _decade_ticks(lo_exp: int, hi_exp: int):
    count = hi_exp - lo_exp + 1
    stride = max(1, int(np.ceil(count / 8.0)))
    return list(range(lo_exp, hi_exp + 1, stride))


def _fmt_tick(v: float) -> str:
    return "%g" % v


def line_chart(path, series, *, title: str, x_label: str = "t",
               y_label: str = "value", log_y: bool = False,
               width: int = 760, height: int = 460) -> None:
    """Write an SVG chart; series is an iterable of (label, (k,2) array)."""
    kept = []
    for label, arr in series:
        arr = np.asarray(arr, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("series %r must be a (k, 2) array" % label)
        mask = np.isfinite(arr).all(axis=1)
        if log_y:
            mask &= arr[:, 1] > 0
        kept.append((label, arr[mask]))

    pts = np.vstack([a for _, a in kept if len(a)]) if any(len(a) for _, a in kept) else None
    if pts is None:
        raise ValueError("no drawable points (log scale drops values <= 0)")

    x_lo, x_hi = float(np.min(pts[:, 0])), float(np.max(pts[:, 0]))
    if x_hi <= x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    pad = 0.02 * (x_hi - x_lo)
    x_lo, x_hi = x_lo - pad, x_hi + pad

    if log_y:
        y = np.log10(pts[:, 1])
    else:
        y = pts[:, 1]
    y_lo, y_hi = float(np.min(y)), float(np.max(y))
    if y_hi <= y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B

    def sx(v):
        return _MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v):
        vv = np.log10(v) if log_y else v
        return _MARGIN_T + (y_hi - vv) / (y_hi - y_lo) * plot_h

    out = []
    out.append('<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
               'viewBox="0 0 %d %d" font-family="monospace" font-size="12">'
               % (width, height, width, height))
    out.append('<rect width="%d" height="%d" fill="white"/>' % (width, height))
    out.append('<text x="%.2f" y="20" text-anchor="middle" font-size="14">%s</text>'
               % (width / 2.0, title))

    # axes box
    out.append('<rect x="%d" y="%d" width="%d" height="%d" fill="none" '
               'stroke="black" stroke-width="1"/>'
               % (_MARGIN_L, _MARGIN_T, plot_w, plot_h))

    for v in _linear_ticks(x_lo, x_hi):
        px = sx(v)
        out.append('<line x1="%.2f" y1="%d" x2="%.2f" y2="%d" stroke="#cccccc"/>'
                   % (px, _MARGIN_T, px, _MARGIN_T + plot_h))
        out.append('<text x="%.2f" y="%d" text-anchor="middle">%s</text>'
                   % (px, _MARGIN_T + plot_h + 18, _fmt_tick(v)))

    if log_y:
        for e in _decade_ticks(int(np.ceil(y_lo)), int(np.floor(y_hi))):
            py = _MARGIN_T + (y_hi - e) / (y_hi - y_lo) * plot_h
            out.append('<line x1="%d" y1="%.2f" x2="%d" y2="%.2f" stroke="#cccccc"/>'
                       % (_MARGIN_L, py, _MARGIN_L + plot_w, py))
            out.append('<text x="%d" y="%.2f" text-anchor="end">1e%d</text>'
                       % (_MARGIN_L - 6, py + 4, e))
    else:
        for v in _linear_ticks(y_lo, y_hi):
            py = _MARGIN_T + (y_hi - v) / (y_hi - y_lo) * plot_h
            out.append('<line x1="%d" y1="%.2f" x2="%d" y2="%.2f" stroke="#cccccc"/>'
                       % (_MARGIN_L, py, _MARGIN_L + plot_w, py))
            out.append('<text x="%d" y="%.2f" text-anchor="end">%s</text>'
                       % (_MARGIN_L - 6, py + 4, _fmt_tick(v)))

    out.append('<text x="%.2f" y="%d" text-anchor="middle">%s</text>'
               % (_MARGIN_L + plot_w / 2.0, height - 12, x_label))
    out.append('<text x="16" y="%.2f" text-anchor="middle" '
               'transform="rotate(-90 16 %.2f)">%s</text>'
               % (_MARGIN_T + plot_h / 2.0, _MARGIN_T + plot_h / 2.0, y_label))

    for k, (label, arr) in enumerate(kept):
        color = PALETTE[k % len(PALETTE)]
        if len(arr):
            coords = " ".join("%.2f,%.2f" % (sx(p[0]), sy(p[1])) for p in arr)
            out.append('<polyline points="%s" fill="none" stroke="%s" '
                       'stroke-width="1.5"/>' % (coords, color))
        ly = _MARGIN_T + 14 + 16 * k
        lx = _MARGIN_L + plot_w - 150
        out.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="%s" '
                   'stroke-width="1.5"/>' % (lx, ly - 4, lx + 22, ly - 4, color))
        out.append('<text x="%d" y="%d">%s</text>' % (lx + 28, ly, label))

    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
