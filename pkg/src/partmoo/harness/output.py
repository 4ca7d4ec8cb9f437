"""CSV and SVG writers for run results."""
from __future__ import annotations

import csv
import math
from xml.sax.saxutils import escape

CSV_COLUMNS = ("run_id", "seed", "iteration", "samples_used", "hypervolume", "hv_log_diff",
               "selected_leaf_id", "hv_evaluations", "wall_ms", "fallback")


def _blank(value):
    return "" if value is None else value


def emit_csv(result, path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for rec in result.records:
                writer.writerow([
                    result.run_id, result.seed, rec.iteration, rec.samples_used,
                    repr(float(rec.hypervolume)),
                    "" if rec.hv_log_diff is None else repr(float(rec.hv_log_diff)),
                    _blank(rec.selected_leaf_id), rec.hv_evaluations, f"{rec.wall_ms:.3f}",
                    rec.fallback,
                ])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_csv(path) -> list[dict]:
    """Parse a file written by :func:`emit_csv` back into typed rows."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            rows.append({
                "run_id": row["run_id"],
                "seed": int(row["seed"]),
                "iteration": int(row["iteration"]),
                "samples_used": int(row["samples_used"]),
                "hypervolume": float(row["hypervolume"]),
                "hv_log_diff": float(row["hv_log_diff"]) if row["hv_log_diff"] else None,
                "selected_leaf_id": int(row["selected_leaf_id"]) if row["selected_leaf_id"] else None,
                "hv_evaluations": int(row["hv_evaluations"]),
                "wall_ms": float(row["wall_ms"]),
                "fallback": int(row["fallback"]),
            })
    return rows


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def emit_plot(results, path, metric: str = "hypervolume", width: int = 720, height: int = 440) -> None:
    """Line chart of ``metric`` against samples used, one polyline per run."""
    results = list(results)
    if not results:
        raise ValueError("need at least one result to plot")
    series = []
    for res in results:
        pts = [(r.samples_used, getattr(r, metric)) for r in res.records
               if getattr(r, metric) is not None]
        series.append((res.run_id, pts))
    xs = [x for _, pts in series for x, _ in pts] or [0, 1]
    ys = [y for _, pts in series for _, y in pts] or [0, 1]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if math.isclose(y0, y1):
        y0, y1 = y0 - 0.5, y1 + 0.5
    left, right, top, bottom = 70, 200, 20, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    label = "log hypervolume difference" if metric == "hv_log_diff" else "hypervolume"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
        f'<text x="{left + pw / 2}" y="{height - 12}" text-anchor="middle">samples used</text>',
        f'<text x="16" y="{top + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2})">{label}</text>',
    ]
    for k in range(5):
        xv = x0 + (x1 - x0) * k / 4
        yv = y0 + (y1 - y0) * k / 4
        parts.append(f'<text x="{sx(xv):.1f}" y="{top + ph + 16}" text-anchor="middle">{xv:.0f}</text>')
        parts.append(f'<text x="{left - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    for k, (name, pts) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = top + 14 + 18 * k
        parts.append(f'<line x1="{left + pw + 12}" y1="{ly - 4}" x2="{left + pw + 32}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{left + pw + 36}" y="{ly}">{escape(name)}</text>')
    parts.append("</svg>")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(parts) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
