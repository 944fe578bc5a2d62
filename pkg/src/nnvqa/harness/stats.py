"""Whisker statistics and improvement/deterioration percentages over a batch of runs."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from ..algorithms import RunRecord

MODES = ("all", "improved_only")


def quartiles(values) -> tuple[float, float, float]:
    """(q1, median, q3) with linear interpolation between order statistics (numpy's default method)."""
    q1, med, q3 = np.percentile(np.asarray(values, dtype=float), [25, 50, 75])
    return float(q1), float(med), float(q3)


def whiskers(values) -> tuple[float, float, list[float]]:
    """Most extreme data points within 1.5 IQR of the box, plus everything beyond them."""
    x = np.sort(np.asarray(values, dtype=float))
    q1, _, q3 = quartiles(x)
    iqr = q3 - q1
    inside = x[(x >= q1 - 1.5 * iqr) & (x <= q3 + 1.5 * iqr)]
    outliers = x[(x < q1 - 1.5 * iqr) | (x > q3 + 1.5 * iqr)]
    return float(inside.min()), float(inside.max()), [float(v) for v in outliers]


def group_label(ansatz: dict) -> str:
    return str(ansatz["p"]) if ansatz["type"] == "qaoa" else ansatz["axes"]


@dataclass
class SummaryStats:
    group: str
    algorithm: str
    mode: str
    count: int
    median: float | None = None
    q1: float | None = None
    q3: float | None = None
    whisker_low: float | None = None
    whisker_high: float | None = None
    outliers: list[float] = field(default_factory=list)
    pct_improved: float | None = None
    pct_deteriorated: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _stats(group, algorithm, mode, values, pct_imp=None, pct_det=None) -> SummaryStats:
    s = SummaryStats(group, algorithm, mode, len(values), pct_improved=pct_imp, pct_deteriorated=pct_det)
    if values:
        s.q1, s.median, s.q3 = quartiles(values)
        s.whisker_low, s.whisker_high, s.outliers = whiskers(values)
    return s


def _ordered_groups(records: list[RunRecord]) -> list[str]:
    seen = []
    for r in records:
        g = group_label(r.ansatz)
        if g not in seen:
            seen.append(g)
    return seen


def summarize(records: list[RunRecord], mode: str = "all", threshold: float = 0.1,
              deterioration_threshold: float | None = None) -> list[SummaryStats]:
    """One row per (architecture group, algorithm) for the requested mode.

    ESCAPE batches yield a "standard" row (the converged cost before escaping) and
    an "escape" row. GUIDE batches pair each GUIDE run with the standard run of the
    same init seed. Percentages are over all R runs of the group.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    det = threshold if deterioration_threshold is None else deterioration_threshold
    ok = [r for r in records if r.error is None and r.c_post is not None]
    if not ok:
        if mode == "all":
            raise ValueError("no successful runs to summarize")
        return []
    by_group = defaultdict(lambda: defaultdict(list))
    for r in ok:
        by_group[group_label(r.ansatz)][r.algorithm].append(r)

    rows = []
    for g in _ordered_groups(ok):
        algs = by_group[g]
        if "escape" in algs:
            runs = algs["escape"]
            total = len(runs)
            keep = [r for r in runs if r.improved] if mode == "improved_only" else runs
            pct_imp = 100.0 * sum(r.improved for r in runs) / total
            pct_det = 100.0 * sum(r.c_post - r.c_pre > det for r in runs) / total
            rows.append(_stats(g, "standard", mode, [r.c_pre for r in keep]))
            rows.append(_stats(g, "escape", mode, [r.c_post for r in keep], pct_imp, pct_det))
        elif "guide" in algs:
            guide = algs["guide"]
            std = {r.init_seed: r for r in algs.get("standard", [])}
            pairs = [(std[r.init_seed], r) for r in guide if r.init_seed in std]
            if pairs:
                improved = [(s, gd) for s, gd in pairs if s.c_post - gd.c_post > threshold]
                pct_imp = 100.0 * len(improved) / len(pairs)
                pct_det = 100.0 * sum(gd.c_post - s.c_post > det for s, gd in pairs) / len(pairs)
                keep = improved if mode == "improved_only" else pairs
                rows.append(_stats(g, "standard", mode, [s.c_post for s, _ in keep]))
                rows.append(_stats(g, "guide", mode, [gd.c_post for _, gd in keep], pct_imp, pct_det))
            else:
                keep = [] if mode == "improved_only" else guide
                rows.append(_stats(g, "guide", mode, [r.c_post for r in keep]))
        else:
            keep = [] if mode == "improved_only" else algs["standard"]
            rows.append(_stats(g, "standard", mode, [r.c_post for r in keep]))
    return rows
