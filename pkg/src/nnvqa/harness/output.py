"""Records JSON, stats CSV and standalone SVG plots for one batch."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from xml.sax.saxutils import escape

from ..algorithms import RunRecord
from ..problems import MaxCutInstance, brute_force_minimum
from .stats import MODES, SummaryStats, summarize

RECORDS_FILE = "records.json"
STATS_FILE = "stats.csv"
TIMINGS_FILE = "timings.json"
STATS_COLUMNS = ["group", "algorithm", "mode", "count", "median", "q1", "q3", "whisker_low",
                 "whisker_high", "outliers", "pct_improved", "pct_deteriorated"]

_COLORS = {"standard": "#4c72b0", "escape": "#dd8452", "guide": "#55a868"}


def records_document(records: list[RunRecord], instance: MaxCutInstance, config: dict | None = None) -> dict:
    return {"config": config, "instance": instance.to_dict(),
            "ground_energy": brute_force_minimum(instance)[0],
            "records": [r.to_dict() for r in records]}


def read_records(path: str | Path) -> tuple[list[RunRecord], MaxCutInstance, dict]:
    doc = json.loads(Path(path).read_text())
    return ([RunRecord.from_dict(r) for r in doc["records"]], MaxCutInstance.from_dict(doc["instance"]), doc)


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def stats_csv(stats: list[SummaryStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STATS_COLUMNS)
    for s in stats:
        w.writerow([s.group, s.algorithm, s.mode, s.count, _num(s.median), _num(s.q1), _num(s.q3),
                    _num(s.whisker_low), _num(s.whisker_high), " ".join(_num(o) for o in s.outliers),
                    _num(s.pct_improved), _num(s.pct_deteriorated)])
    return buf.getvalue()


def all_stats(records, threshold=0.1, deterioration_threshold=0.1) -> list[SummaryStats]:
    return [row for mode in MODES for row in summarize(records, mode, threshold, deterioration_threshold)]


# --- SVG -----------------------------------------------------------------

_W, _H = 640, 400
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 20, 40, 50


def _f(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def _frame(title: str, xlabel: str, ylabel: str, body: list[str], yticks, ymap, xtick_labels) -> str:
    plot_w = _W - _LEFT - _RIGHT
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
           f'<text x="{_W / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{_H - _BOTTOM}" stroke="black"/>',
           f'<line x1="{_LEFT}" y1="{_H - _BOTTOM}" x2="{_W - _RIGHT}" y2="{_H - _BOTTOM}" stroke="black"/>']
    for t in yticks:
        y = ymap(t)
        out.append(f'<line x1="{_LEFT - 4}" y1="{_f(y)}" x2="{_LEFT}" y2="{_f(y)}" stroke="black"/>')
        out.append(f'<text x="{_LEFT - 6}" y="{_f(y + 4)}" text-anchor="end">{t:.3g}</text>')
    for x, label in xtick_labels:
        out.append(f'<text x="{_f(x)}" y="{_H - _BOTTOM + 16}" text-anchor="middle">{escape(label)}</text>')
    out.append(f'<text x="{_LEFT + plot_w / 2}" y="{_H - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{(_TOP + _H - _BOTTOM) / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {(_TOP + _H - _BOTTOM) / 2})">{escape(ylabel)}</text>')
    out.extend(body)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _legend(algorithms: list[str]) -> list[str]:
    out = []
    for i, alg in enumerate(algorithms):
        x = _W - _RIGHT - 110
        y = _TOP + 4 + 16 * i
        out.append(f'<rect x="{x}" y="{y}" width="10" height="10" fill="{_COLORS.get(alg, "#888888")}"/>')
        out.append(f'<text x="{x + 14}" y="{y + 9}">{escape(alg)}</text>')
    return out


def _layout(groups: list[str], algorithms: list[str]):
    plot_w = _W - _LEFT - _RIGHT
    slot = plot_w / max(1, len(groups))
    width = min(40.0, 0.8 * slot / max(1, len(algorithms)))

    def center(gi, ai):
        return _LEFT + slot * (gi + 0.5) + (ai - (len(algorithms) - 1) / 2) * width

    return slot, width, center


def _order(stats):
    groups, algs = [], []
    for s in stats:
        if s.group not in groups:
            groups.append(s.group)
        if s.algorithm not in algs:
            algs.append(s.algorithm)
    return groups, algs


def boxplot_svg(stats: list[SummaryStats], title: str, xlabel: str, ground_energy: float | None = None) -> str:
    """Box and whisker plot of final energies per architecture group, one box per algorithm."""
    groups, algs = _order(stats)
    vals = [v for s in stats if s.count for v in (s.whisker_low, s.whisker_high, *s.outliers)]
    if ground_energy is not None:
        vals.append(ground_energy)
    lo, hi = (min(vals), max(vals)) if vals else (0.0, 1.0)
    pad = 0.05 * (hi - lo) if hi > lo else 0.5
    lo, hi = lo - pad, hi + pad
    plot_h = _H - _TOP - _BOTTOM

    def ymap(v):
        return _TOP + (hi - v) / (hi - lo) * plot_h

    slot, width, center = _layout(groups, algs)
    body = []
    if ground_energy is not None:
        y = ymap(ground_energy)
        body.append(f'<line x1="{_LEFT}" y1="{_f(y)}" x2="{_W - _RIGHT}" y2="{_f(y)}" stroke="#999999" '
                    f'stroke-dasharray="4 3"/>')
    for s in stats:
        if not s.count:
            continue
        cx = center(groups.index(s.group), algs.index(s.algorithm))
        color = _COLORS.get(s.algorithm, "#888888")
        half = 0.4 * width
        body.append(f'<line x1="{_f(cx)}" y1="{_f(ymap(s.whisker_low))}" x2="{_f(cx)}" '
                    f'y2="{_f(ymap(s.whisker_high))}" stroke="black"/>')
        for w in (s.whisker_low, s.whisker_high):
            body.append(f'<line x1="{_f(cx - half / 2)}" y1="{_f(ymap(w))}" x2="{_f(cx + half / 2)}" '
                        f'y2="{_f(ymap(w))}" stroke="black"/>')
        top, bot = ymap(s.q3), ymap(s.q1)
        body.append(f'<rect x="{_f(cx - half)}" y="{_f(top)}" width="{_f(2 * half)}" '
                    f'height="{_f(max(bot - top, 0.5))}" fill="{color}" stroke="black"/>')
        body.append(f'<line x1="{_f(cx - half)}" y1="{_f(ymap(s.median))}" x2="{_f(cx + half)}" '
                    f'y2="{_f(ymap(s.median))}" stroke="black" stroke-width="2"/>')
        for o in s.outliers:
            body.append(f'<circle cx="{_f(cx)}" cy="{_f(ymap(o))}" r="2.5" fill="none" stroke="black"/>')
    body.extend(_legend(algs))
    xt = [(_LEFT + slot * (i + 0.5), g) for i, g in enumerate(groups)]
    return _frame(title, xlabel, "energy", body, _ticks(lo, hi), ymap, xt)


def improvement_svg(stats: list[SummaryStats], title: str, xlabel: str) -> str:
    """Bars of percent improved and percent deteriorated per group."""
    rows = [s for s in stats if s.mode == "all" and s.pct_improved is not None]
    groups = [s.group for s in rows]
    kinds = ["improved", "deteriorated"]
    colors = {"improved": "#55a868", "deteriorated": "#c44e52"}
    plot_h = _H - _TOP - _BOTTOM

    def ymap(v):
        return _TOP + (100.0 - v) / 100.0 * plot_h

    slot, width, center = _layout(groups, kinds)
    body = []
    for gi, s in enumerate(rows):
        for ki, (kind, v) in enumerate(zip(kinds, (s.pct_improved, s.pct_deteriorated))):
            cx = center(gi, ki)
            y = ymap(v)
            body.append(f'<rect x="{_f(cx - 0.4 * width)}" y="{_f(y)}" width="{_f(0.8 * width)}" '
                        f'height="{_f(_H - _BOTTOM - y)}" fill="{colors[kind]}"/>')
    for i, kind in enumerate(kinds):
        x, y = _W - _RIGHT - 110, _TOP + 4 + 16 * i
        body.append(f'<rect x="{x}" y="{y}" width="10" height="10" fill="{colors[kind]}"/>')
        body.append(f'<text x="{x + 14}" y="{y + 9}">{kind}</text>')
    xt = [(_LEFT + slot * (i + 0.5), g) for i, g in enumerate(groups)]
    return _frame(title, xlabel, "percent of runs", body, _ticks(0.0, 100.0), ymap, xt)


def _xlabel(records: list[RunRecord]) -> str:
    return "p" if records and records[0].ansatz["type"] == "qaoa" else "rotation axes"


def write_plots(stats: list[SummaryStats], records: list[RunRecord], out: Path, name: str,
                ground_energy: float | None = None) -> list[Path]:
    xlabel = _xlabel(records)
    paths = []
    for mode in MODES:
        rows = [s for s in stats if s.mode == mode]
        p = out / f"boxplot_{mode}.svg"
        p.write_text(boxplot_svg(rows, f"{name}: final energy ({mode.replace('_', ' ')})", xlabel, ground_energy))
        paths.append(p)
    p = out / "improvement.svg"
    p.write_text(improvement_svg(stats, f"{name}: improvement and deterioration", xlabel))
    paths.append(p)
    return paths


def emit_outputs(records: list[RunRecord], instance: MaxCutInstance, out: str | Path, name: str = "experiment",
                 config: dict | None = None, threshold: float = 0.1,
                 deterioration_threshold: float = 0.1) -> dict[str, Path]:
    """Write every artifact for one batch into ``out``; returns the paths by kind."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    doc = records_document(records, instance, config)
    paths = {"records": out / RECORDS_FILE, "stats": out / STATS_FILE, "timings": out / TIMINGS_FILE}
    paths["records"].write_text(json.dumps(doc, indent=1) + "\n")
    stats = all_stats(records, threshold, deterioration_threshold)
    paths["stats"].write_text(stats_csv(stats))
    timings = [{"algorithm": r.algorithm, "ansatz": r.ansatz, "run_index": r.run_index, "wall_time": r.wall_time}
               for r in records]
    paths["timings"].write_text(json.dumps(timings, indent=1) + "\n")
    for p in write_plots(stats, records, out, name, doc["ground_energy"]):
        paths[p.stem] = p
    return paths
