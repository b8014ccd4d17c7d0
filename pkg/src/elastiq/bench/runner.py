"""Benchmark runner: worker threads, schedules, and series aggregation.

Workers hammer one shared structure for a fixed duration (or a fixed
per-thread operation quota), stamping a timestamp every 1000 operations;
the stamps are aggregated into a 25 ms throughput series.  A scheduler
thread applies user-initiated width/depth changes at their offsets, and
the producer-consumer workload drives a step function of active
producers while sampling per-operation latency.

Rank measurement (oracle mode) serializes all linearizations, so those
runs are never compared against throughput runs; their timeline can be
stretched and is compressed back in the reported series.
"""

from __future__ import annotations

import os
import sys
import threading
import time
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable

from ..controller import ControllerConfig
from ..atomics import ReclamationDomain
from ..lanes import EMPTY
from ..law_queue import ChainedWindowQueue
from ..lpw_queue import SplitWindowQueue
from ..lpw_stack import SlidingWindowStack
from ..oracle import OracleSummary, RankOracle, RankSample
from ..strict import StrictQueue, StrictStack
from .config import STACKS, BenchConfig

import random

__all__ = ["RunRecord", "run_benchmark", "make_structure"]

_WINDOW_S = 0.025  # aggregation window for all series
_STAMP_EVERY = 1000
_PREFILL_TAG = 1 << 62


@dataclass
class RunRecord:
    config: BenchConfig
    width: int
    depth: int
    duration_s: float = 0.0
    total_ops: int = 0
    per_thread_ops: list[int] = field(default_factory=list)
    rate_series: list[tuple[float, float]] = field(default_factory=list)
    rank_series: list[tuple[float, float]] = field(default_factory=list)
    producer_latency: list[tuple[float, float]] = field(default_factory=list)
    consumer_latency: list[tuple[float, float]] = field(default_factory=list)
    width_series: list[tuple[float, int, int]] = field(default_factory=list)
    markers: list[tuple[float, int, int]] = field(default_factory=list)
    oracle: OracleSummary | None = None
    oracle_checks: dict[str, int] = field(default_factory=dict)
    samples: list[RankSample] = field(default_factory=list)
    inserted: set | None = None
    removed: list | None = None
    leftover: list | None = None
    final_head: tuple | None = None
    final_tail: tuple | None = None
    pinned: bool = False

    @property
    def throughput(self) -> float:
        return self.total_ops / self.duration_s if self.duration_s else 0.0


def make_structure(cfg: BenchConfig, oracle: RankOracle | None):
    """Build the structure under test plus its insert/remove callables."""
    width, depth = cfg.window_plan()
    ctl = ControllerConfig(*cfg.controller_constants) if cfg.controller else None
    domain = ReclamationDomain()
    kind = cfg.structure
    if kind == "law-queue":
        s = ChainedWindowQueue(cfg.max_width, width, depth, domain=domain,
                               oracle=oracle, controller=ctl, seed=cfg.seed)
        return s, s.enqueue, s.dequeue
    if kind == "lpw-queue":
        s = SplitWindowQueue(cfg.max_width, width, depth, domain=domain,
                             oracle=oracle, controller=ctl, seed=cfg.seed)
        return s, s.enqueue, s.dequeue
    if kind == "lpw-stack":
        s = SlidingWindowStack(cfg.max_width, width, depth, domain=domain,
                               oracle=oracle, controller=ctl, seed=cfg.seed,
                               static_check=cfg.static_check,
                               lemma_scan_every=cfg.lemma_scan_every)
        return s, s.push, s.pop
    if kind == "ms-queue":
        s = StrictQueue(domain=domain, oracle=oracle)
        return s, s.enqueue, s.dequeue
    if kind == "treiber-stack":
        s = StrictStack(domain=domain, oracle=oracle)
        return s, s.push, s.pop
    raise ValueError(f"unknown structure {kind!r}")


def _pin_strategy(cfg: BenchConfig) -> str:
    return cfg.pin or os.environ.get("ELASTIQ_PIN", "roundrobin")


def _pin_thread(idx: int, strategy: str) -> bool:
    if strategy == "none":
        return False
    try:
        cpus = sorted(os.sched_getaffinity(0))
        os.sched_setaffinity(0, {cpus[idx % len(cpus)]})
        return True
    except (AttributeError, OSError) as exc:  # pragma: no cover - platform
        warnings.warn(f"thread pinning unavailable ({exc}); continuing unpinned")
        return False


class _Shared:
    def __init__(self, cfg: BenchConfig):
        self.stop = threading.Event()
        self.barrier = threading.Barrier(cfg.threads + 1)
        self.active_producers = cfg.producers or 0
        self.t0_ns = 0


def _mixed_worker(idx, cfg, shared, insert, remove, out, pin):
    if pin:
        _pin_thread(idx, pin)
    rng = random.Random(cfg.seed * 10_000 + idx)
    stamps = []
    inserted = set() if cfg.audit else None
    removed = [] if cfg.audit else None
    quota = cfg.ops_per_thread or 0
    stop = shared.stop
    shared.barrier.wait()
    n = 0
    while True:
        if rng.getrandbits(1):
            value = (idx << 40) | n
            if inserted is not None:
                inserted.add(value)
            insert(value)
        else:
            value = remove()
            if removed is not None and value is not EMPTY:
                removed.append(value)
        n += 1
        if n % _STAMP_EVERY == 0:
            stamps.append(time.monotonic_ns())
            if stop.is_set():
                break
        if quota and n >= quota:
            break
    out[idx] = {"ops": n, "stamps": stamps, "inserted": inserted,
                "removed": removed, "latency": [], "role": "mixed"}


def _producer_worker(idx, cfg, shared, insert, out, pin):
    if pin:
        _pin_thread(idx, pin)
    stamps = []
    latency = []
    inserted = set() if cfg.audit else None
    stop = shared.stop
    shared.barrier.wait()
    n = 0
    while not stop.is_set():
        if idx >= shared.active_producers:
            time.sleep(0.0005)
            continue
        value = (idx << 40) | n
        if inserted is not None:
            inserted.add(value)
        t0 = time.perf_counter_ns()
        insert(value)
        latency.append((time.monotonic_ns(), time.perf_counter_ns() - t0))
        n += 1
        if n % _STAMP_EVERY == 0:
            stamps.append(time.monotonic_ns())
    out[idx] = {"ops": n, "stamps": stamps, "inserted": inserted,
                "removed": None, "latency": latency, "role": "producer"}


def _consumer_worker(idx, cfg, shared, remove, out, pin):
    if pin:
        _pin_thread(idx, pin)
    stamps = []
    latency = []
    removed = [] if cfg.audit else None
    pace = cfg.consumer_pace_s
    stop = shared.stop
    shared.barrier.wait()
    n = 0
    while not stop.is_set():
        t0 = time.perf_counter_ns()
        value = remove()
        if value is EMPTY:
            time.sleep(0.0002)
            continue
        latency.append((time.monotonic_ns(), time.perf_counter_ns() - t0))
        if removed is not None:
            removed.append(value)
        n += 1
        if pace:
            time.sleep(pace)
        if n % _STAMP_EVERY == 0:
            stamps.append(time.monotonic_ns())
    out[idx] = {"ops": n, "stamps": stamps, "inserted": None,
                "removed": removed, "latency": latency, "role": "consumer"}


def _wait_until(shared, deadline_ns):
    while not shared.stop.is_set():
        remaining = deadline_ns - time.monotonic_ns()
        if remaining <= 0:
            return True
        time.sleep(min(remaining / 1e9, 0.002))
    return False


def _scheduler(cfg, shared, structure, stretch, markers):
    for t_off, width, depth in sorted(cfg.schedule):
        if not _wait_until(shared, shared.t0_ns + int(t_off * stretch * 1e9)):
            return
        structure.set_width(width)
        structure.set_depth(depth)
        markers.append((t_off, width, depth))


def _activity_driver(cfg, shared, stretch):
    for t_off, count in sorted(cfg.activity):
        if not _wait_until(shared, shared.t0_ns + int(t_off * stretch * 1e9)):
            return
        shared.active_producers = count


def _monitor(cfg, shared, structure, stretch, series):
    while not shared.stop.is_set():
        now = (time.monotonic_ns() - shared.t0_ns) / 1e9 / stretch
        width, depth = structure.get_targets()
        series.append((now, width, depth))
        time.sleep(0.002)


def _bucketize(points, t0_ns, stretch, weight=None):
    """(t_ns, value) pairs -> per-25ms-window means on the compressed axis."""
    buckets: dict[int, tuple[int, float]] = {}
    for t_ns, value in points:
        b = int((t_ns - t0_ns) / 1e9 / stretch / _WINDOW_S)
        cnt, acc = buckets.get(b, (0, 0.0))
        buckets[b] = (cnt + 1, acc + value)
    return [(b * _WINDOW_S, acc / cnt) for b, (cnt, acc) in sorted(buckets.items())]


def _rate_series(stamp_lists, t0_ns, stretch):
    buckets: dict[int, int] = {}
    for stamps in stamp_lists:
        for t_ns in stamps:
            b = int((t_ns - t0_ns) / 1e9 / stretch / _WINDOW_S)
            buckets[b] = buckets.get(b, 0) + _STAMP_EVERY
    return [(b * _WINDOW_S, ops / _WINDOW_S) for b, ops in sorted(buckets.items())]


def run_benchmark(cfg: BenchConfig) -> RunRecord:
    cfg.validate()
    stretch = cfg.stretch()
    width, depth = cfg.window_plan()
    record = RunRecord(config=cfg, width=width, depth=depth)

    oracle = None
    if cfg.mode == "oracle":
        discipline = "lifo" if cfg.structure in STACKS else "fifo"
        oracle = RankOracle(discipline,
                            track_lateness=cfg.structure == "law-queue")

    structure, insert, remove = make_structure(cfg, oracle)
    for i in range(cfg.prefill):
        insert(_PREFILL_TAG | i)
    prefilled = {_PREFILL_TAG | i for i in range(cfg.prefill)}

    shared = _Shared(cfg)
    pin = _pin_strategy(cfg)
    record.pinned = pin != "none"
    out: list[Any] = [None] * cfg.threads

    workers = []
    if cfg.workload == "mixed50":
        for i in range(cfg.threads):
            workers.append(threading.Thread(
                target=_mixed_worker,
                args=(i, cfg, shared, insert, remove, out, pin)))
    else:
        for i in range(cfg.producers):
            workers.append(threading.Thread(
                target=_producer_worker,
                args=(i, cfg, shared, insert, out, pin)))
        for i in range(cfg.producers, cfg.threads):
            workers.append(threading.Thread(
                target=_consumer_worker,
                args=(i, cfg, shared, remove, out, pin)))

    prev_interval = sys.getswitchinterval()
    if cfg.switch_interval:
        sys.setswitchinterval(cfg.switch_interval)
    try:
        for t in workers:
            t.start()
        helpers = []
        shared.barrier.wait()
        shared.t0_ns = time.monotonic_ns()
        if cfg.schedule:
            helpers.append(threading.Thread(
                target=_scheduler,
                args=(cfg, shared, structure, stretch, record.markers)))
        if cfg.activity:
            helpers.append(threading.Thread(
                target=_activity_driver, args=(cfg, shared, stretch)))
        if cfg.controller or cfg.workload == "producer-consumer":
            helpers.append(threading.Thread(
                target=_monitor,
                args=(cfg, shared, structure, stretch, record.width_series)))
        for t in helpers:
            t.start()
        if cfg.ops_per_thread:
            for t in workers:
                t.join()
            shared.stop.set()
        else:
            _wait_until(shared, shared.t0_ns
                        + int(cfg.duration * stretch * 1e9))
            shared.stop.set()
            for t in workers:
                t.join()
        end_ns = time.monotonic_ns()
        for t in helpers:
            t.join()
    finally:
        sys.setswitchinterval(prev_interval)

    record.duration_s = (end_ns - shared.t0_ns) / 1e9 / stretch
    record.per_thread_ops = [w["ops"] for w in out]
    record.total_ops = sum(record.per_thread_ops)
    record.rate_series = _rate_series([w["stamps"] for w in out],
                                      shared.t0_ns, stretch)
    prod_lat = [p for w in out if w["role"] == "producer"
                for p in w["latency"]]
    cons_lat = [p for w in out if w["role"] == "consumer"
                for p in w["latency"]]
    record.producer_latency = _bucketize(
        ((t, v / 1e3) for t, v in prod_lat), shared.t0_ns, stretch)
    record.consumer_latency = _bucketize(
        ((t, v / 1e3) for t, v in cons_lat), shared.t0_ns, stretch)

    if cfg.audit:
        record.leftover = structure.drain_remaining()
        inserted = set(prefilled)
        removed = []
        for w in out:
            if w["inserted"]:
                inserted |= w["inserted"]
            if w["removed"]:
                removed.extend(w["removed"])
        record.inserted = inserted
        record.removed = removed
    if cfg.structure in ("law-queue", "lpw-queue"):
        record.final_head = tuple(structure.head_view())
        record.final_tail = tuple(structure.tail_view())
    elif cfg.structure == "lpw-stack":
        view = structure.window_view()
        record.final_head = record.final_tail = (view.max, view.depth,
                                                 view.push_width)

    if oracle is not None:
        if cfg.audit:
            oracle.verify_drained()
        record.oracle = oracle.summary()
        record.oracle_checks = dict(oracle.checks_run)
        record.samples = oracle.samples
        record.rank_series = [(t, v) for t, v in record.oracle.series]
    return record
