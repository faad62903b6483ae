"""Plot-ready output: a minimal self-contained SVG line chart of mean regret
against the horizon (log-log), one polyline per (strategy, info mode)."""

from __future__ import annotations

import math

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 20, 50


def _series(report):
    groups: dict = {}
    for row in report.rows:
        if math.isnan(row.mean_regret) or row.mean_regret <= 0:
            continue
        groups.setdefault((row.strategy, row.info_mode), []).append((row.T, row.mean_regret))
    return {k: sorted(v) for k, v in groups.items() if len(v) >= 2}


def write_regret_svg(report, path: str) -> None:
    groups = _series(report)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="monospace" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    if not groups:
        parts.append(f'<text x="{_W/2}" y="{_H/2}">no positive regret points</text></svg>')
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(parts))
        return

    xs = [math.log(t) for pts in groups.values() for t, _ in pts]
    ys = [math.log(r) for pts in groups.values() for _, r in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    x1 += (x1 - x0 or 1.0) * 0.02
    y1 += (y1 - y0 or 1.0) * 0.05

    def px(x):
        return _ML + (x - x0) / (x1 - x0) * (_W - _ML - _MR)

    def py(y):
        return _H - _MB - (y - y0) / (y1 - y0) * (_H - _MT - _MB)

    parts.append(f'<line x1="{_ML}" y1="{_H-_MB}" x2="{_W-_MR}" y2="{_H-_MB}" stroke="black"/>')
    parts.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H-_MB}" stroke="black"/>')
    parts.append(f'<text x="{_W/2}" y="{_H-12}">horizon T (log)</text>')
    parts.append(f'<text x="14" y="{_H/2}" transform="rotate(-90 14 {_H/2})">mean regret (log)</text>')

    seen_ts = sorted({t for pts in groups.values() for t, _ in pts})
    for t in seen_ts:
        x = px(math.log(t))
        parts.append(f'<line x1="{x:.1f}" y1="{_H-_MB}" x2="{x:.1f}" y2="{_H-_MB+4}" stroke="black"/>')
        parts.append(f'<text x="{x:.1f}" y="{_H-_MB+18}" text-anchor="middle">{t}</text>')

    for i, (key, pts) in enumerate(sorted(groups.items())):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{px(math.log(t)):.1f},{py(math.log(r)):.1f}" for t, r in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        label = f"{key[0]} ({key[1]})"
        parts.append(f'<text x="{_W-_MR-180}" y="{_MT+16*(i+1)}" fill="{color}">{label}</text>')

    parts.append("</svg>")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(parts))
