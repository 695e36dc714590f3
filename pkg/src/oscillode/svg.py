"""Minimal deterministic SVG line plots for error reports.

No timestamps, no randomness: identical inputs give identical bytes.
"""

from __future__ import annotations

from pathlib import Path

__all__ = ["emit_svg"]

_WIDTH, _HEIGHT = 800, 500
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 30, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _plot(title, xlabel, ylabel, xs, series):
    x_lo, x_hi = float(min(xs)), float(max(xs))
    y_lo = min(float(min(ys)) for _, ys in series)
    y_hi = max(float(max(ys)) for _, ys in series)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(x):
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y):
        return _MARGIN_T + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title}</text>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black"/>',
    ]
    for xt in _ticks(x_lo, x_hi):
        parts.append(
            f'<line x1="{px(xt):.2f}" y1="{_MARGIN_T + plot_h}" x2="{px(xt):.2f}" '
            f'y2="{_MARGIN_T + plot_h + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px(xt):.2f}" y="{_MARGIN_T + plot_h + 20}" text-anchor="middle" '
            f'font-size="11" font-family="sans-serif">{xt:.3g}</text>'
        )
    for yt in _ticks(y_lo, y_hi):
        parts.append(
            f'<line x1="{_MARGIN_L - 5}" y1="{py(yt):.2f}" x2="{_MARGIN_L}" '
            f'y2="{py(yt):.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_L - 8}" y="{py(yt) + 4:.2f}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif">{yt:.3g}</text>'
        )
    parts.append(
        f'<text x="{_MARGIN_L + plot_w / 2:.1f}" y="{_HEIGHT - 10}" text-anchor="middle" '
        f'font-size="12" font-family="sans-serif">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{_MARGIN_T + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-size="12" font-family="sans-serif" '
        f'transform="rotate(-90 18 {_MARGIN_T + plot_h / 2:.1f})">{ylabel}</text>'
    )
    for idx, (label, ys) in enumerate(series):
        color = _COLORS[idx % len(_COLORS)]
        points = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{points}"/>'
        )
        parts.append(
            f'<text x="{_WIDTH - _MARGIN_R - 8}" y="{_MARGIN_T + 16 + 14 * idx}" '
            f'text-anchor="end" font-size="11" font-family="sans-serif" '
            f'fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_svg(report, out_dir):
    """One SVG per (s, omega): real part of the error against time.

    Returns the list of written paths.
    """
    if not report.omegas:
        raise ValueError("report contains no omega values")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for s in report.s_values:
        for omega in report.omegas:
            err = report.errors[(s, omega)]
            series = [
                (f"component {c + 1}", err[:, c].real) for c in range(err.shape[1])
            ]
            text = _plot(
                f"{report.problem}: error real part, s={s}, omega={omega:g}",
                "t",
                "Re(error)",
                report.grid,
                series,
            )
            path = out_dir / f"{report.problem}_s{s}_omega{omega:g}.svg"
            path.write_text(text)
            written.append(path)
    return written
