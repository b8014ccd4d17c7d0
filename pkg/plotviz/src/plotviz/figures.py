"""The three figure kinds rendered from benchmark CSV files.

scaling:    throughput versus threads or rank bound, one line per
            structure, standard-deviation band over repeated runs.
timeseries: throughput and mean rank error over a run, with vertical
            markers annotated W/D at user-initiated relaxation changes.
latency:    producer/consumer latency and the width target during a
            producer-consumer run, active producers on a top panel.

Rendering is deterministic: fixed style, fixed hash salt, no embedded
dates.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams.update({
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "plotviz",
})

import matplotlib.pyplot as plt

from .csvdata import DataError, Table, read_table

__all__ = ["PlotSpec", "render", "FIGURE_KINDS"]

FIGURE_KINDS = ("scaling", "timeseries", "latency")

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf")


@dataclass
class PlotSpec:
    kind: str
    inputs: list[str]
    output: str
    smoothing_s: float = 0.025
    title: str = ""

    def validate(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise DataError(f"unknown figure kind {self.kind!r}; "
                            f"choose from {', '.join(FIGURE_KINDS)}")
        if not self.inputs:
            raise DataError("at least one input CSV is required")


def _smooth(ts, ys, window_s, bucket_s=0.025):
    """Centered moving average over the series' native buckets."""
    span = max(1, round(window_s / bucket_s))
    if span <= 1:
        return ts, ys
    half = span // 2
    out = []
    for i in range(len(ys)):
        lo = max(0, i - half)
        hi = min(len(ys), i + half + 1)
        vals = [v for v in ys[lo:hi] if v is not None]
        out.append(statistics.fmean(vals) if vals else None)
    return ts, out


def _series(table: Table, x_name: str, y_name: str):
    xs, ys = [], []
    for x, y in zip(table.column(x_name), table.column(y_name)):
        if x is None or y is None:
            continue
        xs.append(x)
        ys.append(y)
    return xs, ys


def _save(fig, spec: PlotSpec) -> str:
    fig.savefig(spec.output, metadata={"Date": None}
                if spec.output.endswith(".svg") else None)
    plt.close(fig)
    return spec.output


def render(spec: PlotSpec) -> str:
    """Render the figure described by `spec`; returns the output path."""
    spec.validate()
    tables = [read_table(path) for path in spec.inputs]
    if spec.kind == "scaling":
        return _render_scaling(spec, tables)
    if spec.kind == "timeseries":
        return _render_timeseries(spec, tables)
    return _render_latency(spec, tables)


def _render_scaling(spec: PlotSpec, tables: list[Table]) -> str:
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    color_idx = 0
    for table in tables:
        table.require("structure", "threads", "k", "run", "throughput")
        groups: dict[str, dict] = {}
        threads = sorted({v for v in table.column("threads")})
        bounds = sorted({v for v in table.column("k")})
        x_name = "threads" if len(threads) > 1 else "k"
        for structure, x, k, thr in zip(
                table.column("structure"), table.column("threads"),
                table.column("k"), table.column("throughput")):
            key = structure if x_name == "threads" else structure
            xv = x if x_name == "threads" else k
            groups.setdefault(structure, {}).setdefault(xv, []).append(thr)
        for structure in sorted(groups):
            xs = sorted(groups[structure])
            means = [statistics.fmean(groups[structure][x]) for x in xs]
            stds = [statistics.pstdev(groups[structure][x])
                    if len(groups[structure][x]) > 1 else 0.0 for x in xs]
            color = _COLORS[color_idx % len(_COLORS)]
            color_idx += 1
            ax.plot(xs, means, marker="o", label=structure, color=color)
            ax.fill_between(xs, [m - s for m, s in zip(means, stds)],
                            [m + s for m, s in zip(means, stds)],
                            color=color, alpha=0.2, linewidth=0)
        if x_name == "k" and len(bounds) > 1:
            ax.set_xscale("log")
        ax.set_xlabel("threads" if x_name == "threads" else "rank bound k")
    ax.set_ylabel("throughput (ops/s)")
    ax.set_title(spec.title or "throughput scaling")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, spec)


def _annotate_schedule(ax, schedule) -> None:
    for t, width, depth in schedule:
        ax.axvline(t, color="#555555", linestyle="--", linewidth=0.9)
        ax.annotate(f"W={width} D={depth}", xy=(t, 1.01),
                    xycoords=("data", "axes fraction"),
                    fontsize=7, ha="left", rotation=0)


def _render_timeseries(spec: PlotSpec, tables: list[Table]) -> str:
    fig, (ax_thr, ax_rank) = plt.subplots(
        2, 1, figsize=(5.6, 4.2), sharex=True,
        gridspec_kw={"height_ratios": [3, 2]})
    for i, table in enumerate(tables):
        table.require("t_s", "ops_per_s", "rank_mean")
        label = table.meta.get("structure", f"run {i}")
        color = _COLORS[i % len(_COLORS)]
        ts, thr = _series(table, "t_s", "ops_per_s")
        ax_thr.plot(*_smooth(ts, thr, spec.smoothing_s), color=color,
                    label=label)
        ts, rank = _series(table, "t_s", "rank_mean")
        if ts:
            ax_rank.plot(*_smooth(ts, rank, spec.smoothing_s), color=color)
        _annotate_schedule(ax_thr, table.schedule())
        for t, _, _ in table.schedule():
            ax_rank.axvline(t, color="#555555", linestyle="--", linewidth=0.9)
    ax_thr.set_ylabel("throughput (ops/s)")
    ax_thr.legend(fontsize=8)
    ax_rank.set_ylabel("mean rank error")
    ax_rank.set_xlabel("time (s)")
    if spec.title:
        ax_thr.set_title(spec.title)
    fig.tight_layout()
    return _save(fig, spec)


def _render_latency(spec: PlotSpec, tables: list[Table]) -> str:
    fig, (ax_act, ax_lat) = plt.subplots(
        2, 1, figsize=(5.6, 4.2), sharex=True,
        gridspec_kw={"height_ratios": [1, 3]})
    ax_width = ax_lat.twinx()
    for i, table in enumerate(tables):
        table.require("t_s", "producer_latency_us", "consumer_latency_us",
                      "width", "active_producers")
        ts, active = _series(table, "t_s", "active_producers")
        ax_act.step(ts, active, where="post",
                    color=_COLORS[(2 * i) % len(_COLORS)])
        ts, prod = _series(table, "t_s", "producer_latency_us")
        ax_lat.plot(*_smooth(ts, prod, spec.smoothing_s),
                    color=_COLORS[(2 * i) % len(_COLORS)],
                    label=f"producer ({table.meta.get('structure', i)})")
        ts, cons = _series(table, "t_s", "consumer_latency_us")
        if ts:
            ax_lat.plot(*_smooth(ts, cons, spec.smoothing_s),
                        color=_COLORS[(2 * i + 1) % len(_COLORS)],
                        linestyle=":", label="consumer")
        ts, width = _series(table, "t_s", "width")
        if ts:
            ax_width.step(ts, width, where="post", color="#777777",
                          linewidth=0.9, alpha=0.8)
    ax_act.set_ylabel("active\nproducers", fontsize=8)
    ax_lat.set_ylabel("operation latency (us)")
    ax_lat.set_xlabel("time (s)")
    ax_width.set_ylabel("width target", color="#777777", fontsize=8)
    ax_lat.legend(fontsize=8)
    if spec.title:
        ax_act.set_title(spec.title)
    fig.tight_layout()
    return _save(fig, spec)
