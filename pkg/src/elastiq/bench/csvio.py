"""CSV emission and parsing for benchmark output.

Layout contract (consumed by the plotting tool, which reads only these
files): metadata as leading '#' key=value comment lines, one header row,
then data rows.  Three kinds are produced:

timeseries: t_s,ops_per_s,rank_mean,width,depth
scaling:    structure,threads,k,run,throughput,rank_mean,rank_max
latency:    t_s,producer_latency_us,consumer_latency_us,width,active_producers
"""

from __future__ import annotations

from typing import Any, Iterable

from .config import BenchConfig
from .runner import RunRecord

__all__ = ["emit_csv", "parse_csv", "timeseries_rows", "latency_rows",
           "TIMESERIES_HEADER", "SCALING_HEADER", "LATENCY_HEADER",
           "config_meta"]

_WINDOW_S = 0.025

TIMESERIES_HEADER = ["t_s", "ops_per_s", "rank_mean", "width", "depth"]
SCALING_HEADER = ["structure", "threads", "k", "run", "throughput",
                  "rank_mean", "rank_max"]
LATENCY_HEADER = ["t_s", "producer_latency_us", "consumer_latency_us",
                  "width", "active_producers"]


def emit_csv(path: str, header: list[str], rows: Iterable[Iterable[Any]],
             meta: dict[str, Any] | None = None) -> None:
    try:
        with open(path, "w", encoding="utf-8") as f:
            for key, value in (meta or {}).items():
                f.write(f"# {key}={value}\n")
            f.write(",".join(header) + "\n")
            for row in rows:
                f.write(",".join("" if v is None else _fmt(v) for v in row)
                        + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _coerce(text: str) -> Any:
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_csv(path: str):
    """Returns (meta, header, rows); numeric cells are coerced."""
    meta: dict[str, str] = {}
    header: list[str] = []
    rows: list[list[Any]] = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if "=" in body:
                        key, _, value = body.partition("=")
                        meta[key.strip()] = value.strip()
                    continue
                if not header:
                    header = line.split(",")
                    continue
                rows.append([_coerce(cell) for cell in line.split(",")])
    except OSError as exc:
        raise OSError(f"cannot read CSV from {path}: {exc}") from exc
    return meta, header, rows


def config_meta(cfg: BenchConfig, record: RunRecord | None = None) -> dict:
    meta = {
        "structure": cfg.structure,
        "threads": cfg.threads,
        "workload": cfg.workload,
        "prefill": cfg.prefill,
        "seed": cfg.seed,
        "mode": cfg.mode,
        "window": f"{record.width}x{record.depth}" if record else "",
        "schedule": ";".join(f"{t}:{w}:{d}" for t, w, d in cfg.schedule),
        "activity": ";".join(f"{t}:{n}" for t, n in cfg.activity),
        "controller": int(cfg.controller),
        "smoothing_window_s": _WINDOW_S,
    }
    if record is not None:
        meta["total_ops"] = record.total_ops
        meta["duration_s"] = f"{record.duration_s:.6g}"
    return meta


def _bucket(t: float) -> int:
    return round(t / _WINDOW_S)


def timeseries_rows(record: RunRecord) -> list[list[Any]]:
    cells: dict[int, list[Any]] = {}

    def slot(b: int) -> list[Any]:
        return cells.setdefault(b, [None, None, None, None])

    for t, rate in record.rate_series:
        slot(_bucket(t))[0] = rate
    for t, rank in record.rank_series:
        slot(_bucket(t))[1] = rank
    for t, width, depth in record.width_series:
        entry = slot(_bucket(t))
        entry[2] = width
        entry[3] = depth
    return [[b * _WINDOW_S] + cells[b] for b in sorted(cells)]


def _activity_at(activity, t: float, start: int) -> int:
    level = start
    for t_off, n in activity:
        if t_off <= t:
            level = n
    return level


def latency_rows(record: RunRecord) -> list[list[Any]]:
    cfg = record.config
    cells: dict[int, list[Any]] = {}

    def slot(b: int) -> list[Any]:
        return cells.setdefault(b, [None, None, None, None])

    for t, us in record.producer_latency:
        slot(_bucket(t))[0] = us
    for t, us in record.consumer_latency:
        slot(_bucket(t))[1] = us
    for t, width, _ in record.width_series:
        slot(_bucket(t))[2] = width
    rows = []
    for b in sorted(cells):
        t = b * _WINDOW_S
        entry = cells[b]
        entry[3] = _activity_at(sorted(cfg.activity), t, cfg.producers or 0)
        rows.append([t] + entry)
    return rows
