"""Goodput accounting and per-stream fairness."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .core import DropReason, FrameStatus
from .engine import ScheduleTrace
from .offline import OfflineSolution

SWEEP_COLUMNS = ("policy", "k", "d", "b", "seed", "goodput", "benchmark_goodput", "ratio")


@dataclass
class MetricsReport:
    goodput: int
    benchmark_goodput: int
    goodput_ratio: float
    per_stream_completed: dict[int, int] = field(default_factory=dict)
    per_stream_offered: dict[int, int] = field(default_factory=dict)
    per_stream_fraction: dict[int, float] = field(default_factory=dict)
    drops_by_reason: dict[str, int] = field(default_factory=dict)
    delivered_packets: int = 0
    total_packets: int = 0

    def as_dict(self) -> dict:
        return {
            "goodput": self.goodput,
            "benchmark_goodput": self.benchmark_goodput,
            "goodput_ratio": self.goodput_ratio,
            "delivered_packets": self.delivered_packets,
            "total_packets": self.total_packets,
            "drops_by_reason": self.drops_by_reason,
            "per_stream_completed": {str(s): v for s, v in sorted(self.per_stream_completed.items())},
            "per_stream_fraction": {str(s): v for s, v in sorted(self.per_stream_fraction.items())},
        }


def goodput_ratio(online: int, benchmark: int) -> float:
    # not clamped: the benchmark is an approximation and can be beaten
    if benchmark == 0:
        return 1.0 if online == 0 else float("inf")
    return online / benchmark


def compute_report(trace: ScheduleTrace, benchmark: OfflineSolution) -> MetricsReport:
    if benchmark.digest and benchmark.digest != trace.digest:
        raise ValueError("trace and benchmark were computed on different sequences")
    completed: Counter = Counter()
    offered: Counter = Counter()
    for fid, status in trace.statuses.items():
        stream = trace.frame_streams.get(fid, 0)
        if fid in trace.offered:
            offered[stream] += 1
        if status is FrameStatus.SUCCESSFUL:
            completed[stream] += 1
    streams = sorted(set(offered) | set(completed))
    drops = trace.drop_counts()
    return MetricsReport(
        goodput=trace.goodput,
        benchmark_goodput=benchmark.goodput,
        goodput_ratio=goodput_ratio(trace.goodput, benchmark.goodput),
        per_stream_completed={s: completed[s] for s in streams},
        per_stream_offered={s: offered[s] for s in streams},
        per_stream_fraction={s: completed[s] / offered[s] if offered[s] else 0.0 for s in streams},
        drops_by_reason={r.value: drops.get(r, 0) for r in DropReason},
        delivered_packets=sum(1 for r in trace.records if r.delivered is not None),
        total_packets=trace.total_packets,
    )


def completion_cdf(report: MetricsReport) -> list[float]:
    """Per-stream completion fractions, sorted ascending (the empirical CDF support)."""
    return sorted(report.per_stream_fraction.values())


def bimodal_share(fractions: list[float], tol: float = 0.05) -> float:
    """Share of streams that completed almost nothing or almost everything."""
    if not fractions:
        return 1.0
    return sum(1 for x in fractions if x <= tol or x >= 1 - tol) / len(fractions)


def write_cdf_csv(report: MetricsReport, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["stream", "fraction"])
        for stream, frac in sorted(report.per_stream_fraction.items(), key=lambda kv: (kv[1], kv[0])):
            w.writerow([stream, f"{frac:.6f}"])


def write_sweep_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for row in rows:
            out = dict(row)
            out["ratio"] = f"{row['ratio']:.6f}"
            w.writerow(out)
