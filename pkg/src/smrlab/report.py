"""CSV, JSON and SVG emission for experiment artifacts."""

from __future__ import annotations

import csv
import json
import math

from .harness import RatioReport

__all__ = [
    "CSV_COLUMNS",
    "SCHEMA_VERSION",
    "write_report_csv",
    "report_summary",
    "write_json",
    "write_svg_chart",
]

SCHEMA_VERSION = "1"

CSV_COLUMNS = [
    "experiment_id",
    "path_id",
    "p",
    "q",
    "sigma",
    "kappa",
    "K",
    "M",
    "N_noise",
    "margin",
    "J",
    "sol_norm",
    "ratio",
]


def _num(x) -> str:
    """Shortest round-trippable decimal form, stable across runs."""
    return format(x, ".17g")


def write_report_csv(reports, fileobj, timestamp: str | None = None) -> None:
    """One CSV row per path, fixed column order; reports may be a list.

    A timestamp comment line is prepended when one is supplied; leaving
    it out makes repeated runs byte-identical.
    """
    if isinstance(reports, RatioReport):
        reports = [reports]
    if timestamp is not None:
        fileobj.write(f"# generated {timestamp}\n")
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        s = rep.spec
        for row in rep.rows:
            writer.writerow(
                [
                    rep.experiment_id,
                    row.path_id,
                    _num(s.p),
                    _num(s.q),
                    _num(s.sigma),
                    _num(s.kappa),
                    rep.K,
                    rep.M,
                    rep.n_noise,
                    _num(rep.margin),
                    _num(row.J),
                    _num(row.sol_norm),
                    _num(row.ratio),
                ]
            )


def report_summary(reports) -> dict:
    """Aggregate JSON document for one or more ratio reports."""
    if isinstance(reports, RatioReport):
        reports = [reports]
    out = {"schema_version": SCHEMA_VERSION, "experiments": []}
    for rep in reports:
        s = rep.spec
        out["experiments"].append(
            {
                "experiment_id": rep.experiment_id,
                "p": s.p,
                "q": s.q,
                "sigma": s.sigma,
                "kappa": s.kappa,
                "K": rep.K,
                "M": rep.M,
                "N_noise": rep.n_noise,
                "n_paths": rep.n_paths,
                "margin": rep.margin,
                "compliant": rep.compliant,
                "J": rep.J,
                "sol_norm": rep.sol_norm,
                "ratio": rep.ratio,
                "ratio_p95": rep.ratio_p95,
                "sup_norm": rep.sup_norm,
            }
        )
    return out


def write_json(document: dict, fileobj) -> None:
    json.dump(document, fileobj, indent=2, sort_keys=True)
    fileobj.write("\n")


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(s for s in (mag, 2 * mag, 2.5 * mag, 5 * mag, 10 * mag) if s >= raw)
    t = math.ceil(lo / step) * step
    out = []
    while t <= hi + 1e-12 * step:
        out.append(round(t, 12))
        t += step
    return out


def write_svg_chart(series, fileobj, title: str, xlabel: str, ylabel: str) -> None:
    """Hand-written SVG line chart; series is a list of (label, xs, ys)."""
    W, H = 640, 420
    L, R, T, B = 70, 20, 40, 50
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    if not xs_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def X(x):
        return L + (x - x0) / (x1 - x0) * (W - L - R)

    def Y(y):
        return H - B - (y - y0) / (y1 - y0) * (H - T - B)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    w = fileobj.write
    w(f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" ')
    w(f'viewBox="0 0 {W} {H}" font-family="monospace" font-size="12">\n')
    w(f'<rect width="{W}" height="{H}" fill="white"/>\n')
    w(f'<text x="{W/2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>\n')
    w(f'<line x1="{L}" y1="{H-B}" x2="{W-R}" y2="{H-B}" stroke="black"/>\n')
    w(f'<line x1="{L}" y1="{T}" x2="{L}" y2="{H-B}" stroke="black"/>\n')
    for t in _ticks(x0, x1):
        w(f'<line x1="{X(t):.1f}" y1="{H-B}" x2="{X(t):.1f}" y2="{H-B+5}" stroke="black"/>\n')
        w(f'<text x="{X(t):.1f}" y="{H-B+18}" text-anchor="middle">{t:g}</text>\n')
    for t in _ticks(y0, y1):
        w(f'<line x1="{L-5}" y1="{Y(t):.1f}" x2="{L}" y2="{Y(t):.1f}" stroke="black"/>\n')
        w(f'<text x="{L-8}" y="{Y(t)+4:.1f}" text-anchor="end">{t:g}</text>\n')
    w(f'<text x="{(L+W-R)/2:.1f}" y="{H-10}" text-anchor="middle">{xlabel}</text>\n')
    w(
        f'<text x="16" y="{(T+H-B)/2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(T+H-B)/2:.1f})">{ylabel}</text>\n'
    )
    for idx, (label, xs, ys) in enumerate(series):
        color = colors[idx % len(colors)]
        pts = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in zip(xs, ys))
        w(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>\n')
        for x, y in zip(xs, ys):
            w(f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="3" fill="{color}"/>\n')
        ly = T + 16 * idx
        w(f'<line x1="{W-150}" y1="{ly}" x2="{W-130}" y2="{ly}" stroke="{color}" stroke-width="1.5"/>\n')
        w(f'<text x="{W-125}" y="{ly+4}">{label}</text>\n')
    w("</svg>\n")
