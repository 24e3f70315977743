"""Minimal dependency-free SVG figures for the report directory."""

from xml.sax.saxutils import escape

import numpy as np

W, H, PAD = 360, 220, 36
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22")


def _num(v):
    return format(float(v), ".6g")


def _axis(x0, y0, w, h):
    return (f'<line x1="{x0}" y1="{y0 + h}" x2="{x0 + w}" y2="{y0 + h}" stroke="black"/>'
            f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y0 + h}" stroke="black"/>')


def _doc(width, height, body):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">\n'
            + "\n".join(body) + "\n</svg>\n")


def bias_histograms_svg(biases, bins=20):
    """One histogram panel per estimator on a common bias axis; a dashed line marks zero."""
    names = list(biases)
    if not names:
        return _doc(W, H, ['<text x="10" y="20">no replications</text>'])
    allv = np.concatenate([np.asarray(biases[k], dtype=float) for k in names])
    allv = allv[np.isfinite(allv)]
    lo, hi = (float(allv.min()), float(allv.max())) if allv.size else (-1.0, 1.0)
    lo, hi = min(lo, 0.0), max(hi, 0.0)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    body = []
    pw, ph = W - 2 * PAD, H - 2 * PAD
    for i, name in enumerate(names):
        y0 = i * H
        v = np.asarray(biases[name], dtype=float)
        counts, _ = np.histogram(v[np.isfinite(v)], edges)
        top = max(int(counts.max()), 1)
        body.append(f'<g transform="translate(0,{y0})">')
        body.append(f'<text x="{PAD}" y="{PAD - 10}">{escape(str(name))} (n={v.size})</text>')
        body.append(_axis(PAD, PAD, pw, ph))
        bw = pw / bins
        color = PALETTE[i % len(PALETTE)]
        for j, c in enumerate(counts):
            h = ph * c / top
            body.append(f'<rect x="{_num(PAD + j * bw)}" y="{_num(PAD + ph - h)}" width="{_num(bw)}" '
                        f'height="{_num(h)}" fill="{color}" stroke="white"/>')
        zx = PAD + pw * (0.0 - lo) / (hi - lo)
        body.append(f'<line x1="{_num(zx)}" y1="{PAD}" x2="{_num(zx)}" y2="{PAD + ph}" stroke="black" stroke-dasharray="4,3"/>')
        body.append(f'<text x="{PAD}" y="{PAD + ph + 14}">{_num(lo)}</text>')
        body.append(f'<text x="{PAD + pw}" y="{PAD + ph + 14}" text-anchor="end">{_num(hi)}</text>')
        body.append(f'<text x="{PAD + pw / 2}" y="{PAD + ph + 28}" text-anchor="middle">bias</text>')
        body.append("</g>")
    return _doc(W, H * len(names), body)


def scatter_svg(points, xlabel, ylabel):
    """Scatter with one circle per point and the identity line."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    pts = pts[np.all(np.isfinite(pts), axis=1)]
    if pts.size:
        lo, hi = float(pts.min()), float(pts.max())
    else:
        lo, hi = -1.0, 1.0
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pw, ph = W - 2 * PAD, W - 2 * PAD
    sx = lambda v: PAD + pw * (v - lo) / (hi - lo)
    sy = lambda v: PAD + ph - ph * (v - lo) / (hi - lo)
    body = [_axis(PAD, PAD, pw, ph),
            f'<line x1="{_num(sx(lo))}" y1="{_num(sy(lo))}" x2="{_num(sx(hi))}" y2="{_num(sy(hi))}" '
            'stroke="grey" stroke-dasharray="4,3"/>']
    for x, y in pts:
        body.append(f'<circle cx="{_num(sx(x))}" cy="{_num(sy(y))}" r="2.5" fill="{PALETTE[0]}" fill-opacity="0.6"/>')
    body.append(f'<text x="{PAD + pw / 2}" y="{PAD + ph + 28}" text-anchor="middle">{escape(xlabel)}</text>')
    body.append(f'<text x="12" y="{PAD + ph / 2}" transform="rotate(-90 12 {PAD + ph / 2})" '
                f'text-anchor="middle">{escape(ylabel)}</text>')
    body.append(f'<text x="{PAD}" y="{PAD + ph + 14}">{_num(lo)}</text>')
    body.append(f'<text x="{PAD + pw}" y="{PAD + ph + 14}" text-anchor="end">{_num(hi)}</text>')
    return _doc(W, W, body)
