"""
Minimal SVG 1.1 line charts, written by hand.

Charts are pure functions of the CSV rows they plot (string values as read
back from the file), so an SVG never disagrees with its CSV.
"""

from __future__ import annotations

from html import escape

_W, _H = 640, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 170, 40, 60
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_TICKS = 5

Series = tuple[str, list[tuple[float, float]]]


def _span(values: list[float], pad_zero: bool) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if pad_zero:
        lo = min(lo, 0.0)
    if hi - lo < 1e-12:
        hi = lo + 1.0
    return lo, hi


def line_chart(
    title: str,
    x_label: str,
    y_label: str,
    series: list[Series],
    y_range: tuple[float, float] | None = None,
    x_from_zero: bool = False,
) -> str:
    xs = [x for _, pts in series for x, _ in pts] or [0.0, 1.0]
    ys = [y for _, pts in series for _, y in pts] or [0.0, 1.0]
    x0, x1 = _span(xs, x_from_zero)
    y0, y1 = y_range if y_range is not None else _span(ys, True)
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def px(x: float) -> float:
        return _LEFT + (x - x0) / (x1 - x0) * pw

    def py(y: float) -> float:
        return _TOP + ph - (y - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_W}" '
        f'height="{_H}" viewBox="0 0 {_W} {_H}" '
        'font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="22" text-anchor="middle" font-size="14">'
        f"{escape(title)}</text>",
        f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
    ]
    for i in range(_TICKS + 1):
        tx = x0 + (x1 - x0) * i / _TICKS
        ty = y0 + (y1 - y0) * i / _TICKS
        out.append(
            f'<line x1="{px(tx):.2f}" y1="{_TOP + ph}" x2="{px(tx):.2f}" '
            f'y2="{_TOP + ph + 5}" stroke="black"/>'
        )
        out.append(
            f'<text x="{px(tx):.2f}" y="{_TOP + ph + 18}" '
            f'text-anchor="middle">{tx:.2f}</text>'
        )
        out.append(
            f'<line x1="{_LEFT - 5}" y1="{py(ty):.2f}" x2="{_LEFT}" y2="{py(ty):.2f}" '
            'stroke="black"/>'
        )
        out.append(
            f'<text x="{_LEFT - 8}" y="{py(ty) + 4:.2f}" '
            f'text-anchor="end">{ty:.2f}</text>'
        )
    out.append(
        f'<text x="{_LEFT + pw / 2:.1f}" y="{_H - 18}" text-anchor="middle">'
        f"{escape(x_label)}</text>"
    )
    out.append(
        f'<text x="18" y="{_TOP + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {_TOP + ph / 2:.1f})">{escape(y_label)}</text>'
    )
    for i, (label, pts) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(
            f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        for x, y in pts:
            out.append(
                f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}"/>'
            )
        ly = _TOP + 16 + 18 * i
        out.append(
            f'<line x1="{_W - _RIGHT + 12}" y1="{ly - 4}" x2="{_W - _RIGHT + 36}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>'
        )
        out.append(f'<text x="{_W - _RIGHT + 42}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _group(rows: list[dict[str, str]], key: str, x: str, y: str) -> list[Series]:
    order: list[str] = []
    points: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        label = row[key]
        if label not in points:
            order.append(label)
            points[label] = []
        points[label].append((float(row[x]), float(row[y])))
    return [(label, points[label]) for label in order]


def sweep_chart(rows: list[dict[str, str]]) -> str:
    return line_chart(
        "Mean MS-SSIM vs pre-digital SINR",
        "pre-digital SINR (dB)",
        "MS-SSIM",
        _group(rows, "series", "sinr_db", "ms_ssim_mean"),
        y_range=(0.0, 1.0),
    )


def region_chart(rows: list[dict[str, str]]) -> str:
    """Both axes are normalized to the SDD maxima; raw values without an SDD row."""
    sdd = [r for r in rows if r["paradigm"] == "SDD"]
    sx = max((float(r["f_ab"]) for r in sdd), default=0.0) or 1.0
    sy = max((float(r["f_ba"]) for r in sdd), default=0.0) or 1.0
    series = [
        (label, [(x / sx, y / sy) for x, y in pts])
        for label, pts in _group(rows, "paradigm", "f_ab", "f_ba")
    ]
    return line_chart(
        "Feasible region boundaries",
        "feasibility A->B (SDD max = 1)",
        "feasibility B->A (SDD max = 1)",
        series,
        x_from_zero=True,
    )
