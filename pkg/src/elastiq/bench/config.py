"""Benchmark configuration and the rank-bound to window-size mapping."""

from __future__ import annotations

from dataclasses import dataclass, field

QUEUES = ("law-queue", "lpw-queue", "ms-queue")
STACKS = ("lpw-stack", "treiber-stack")
STRUCTURES = QUEUES + STACKS
STRICT = ("ms-queue", "treiber-stack")

# serialized rank measurement runs this much longer, then timestamps are
# compressed back for alignment with throughput runs
ORACLE_STRETCH_QUEUE = 1000.0
ORACLE_STRETCH_STACK = 2000.0


def stack_static_bound(width: int, depth: int) -> int:
    """Worst-case rank error of the stack under a fixed configuration."""
    shift = depth // 2
    return (2 * depth + 2 * shift + ((depth - 1) // shift) * shift) * (width - 1)


def plan_from_bound(structure: str, k: int, threads: int,
                    max_width: int = 256) -> tuple[int, int]:
    """Choose (width, depth) for a target rank-error bound k.

    Width aims at twice the thread count; depth is the largest value
    keeping the structure's static bound within k.  Width backs off when
    even the smallest depth would overshoot.
    """
    if k < 0:
        raise ValueError("rank bound must be >= 0")
    if structure in STRICT or k == 0:
        return 1, 1 if structure in QUEUES else 2
    if structure in QUEUES:
        width = min(2 * threads, k + 1, max_width)
        while width > 1 and k // (width - 1) < 1:
            width -= 1
        depth = k // (width - 1) if width > 1 else 1
        return width, max(1, depth)
    width = min(2 * threads, max_width)
    while width > 1:
        ceiling = k // (width - 1)
        for depth in range(min(ceiling, 0x7FFF), 1, -1):
            if stack_static_bound(width, depth) <= k:
                return width, depth
        width -= 1
    return 1, 2


@dataclass
class BenchConfig:
    """One benchmark run; every field is a CLI flag."""

    structure: str = "law-queue"
    threads: int = 8
    duration: float = 1.0
    prefill: int = 2 ** 15
    width: int | None = None
    depth: int | None = None
    rank_bound: int | None = None
    max_width: int = 256
    # (time offset s, width, depth) applied during the run
    schedule: tuple[tuple[float, int, int], ...] = ()
    workload: str = "mixed50"  # or "producer-consumer"
    producers: int | None = None
    consumers: int | None = None
    # (time offset s, number of active producers)
    activity: tuple[tuple[float, int], ...] = ()
    # constant-pace consumers: sleep this long after each removal
    consumer_pace_s: float = 0.0
    seed: int = 1
    mode: str = "throughput"  # or "oracle"
    controller: bool = False
    controller_constants: tuple[int, int, int, int] = (1, 75, 5000, 5)
    switch_interval: float | None = 1e-5
    ops_per_thread: int | None = None
    oracle_stretch: float | None = None  # None: paper default for the kind
    pin: str | None = None  # None: ELASTIQ_PIN env or round-robin
    audit: bool = False  # collect inserted/removed values for multiset checks
    lemma_scan_every: int = 1
    static_check: bool = False
    label: str = ""

    def validate(self) -> None:
        if self.structure not in STRUCTURES:
            raise ValueError(f"unknown structure {self.structure!r}; "
                             f"choose from {', '.join(STRUCTURES)}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.prefill < 0:
            raise ValueError("prefill must be >= 0")
        if self.mode not in ("throughput", "oracle"):
            raise ValueError("mode must be 'throughput' or 'oracle'")
        if self.workload not in ("mixed50", "producer-consumer"):
            raise ValueError("workload must be 'mixed50' or 'producer-consumer'")
        if self.duration <= 0 and not self.ops_per_thread:
            raise ValueError("duration must be positive (or set ops_per_thread)")
        for t, _, _ in self.schedule:
            if not 0 <= t <= self.duration:
                raise ValueError(f"schedule offset {t} outside the run duration")
        if self.workload == "producer-consumer":
            producers = self.producers or 0
            consumers = self.consumers or 0
            if producers + consumers != self.threads or not producers or not consumers:
                raise ValueError("producer-consumer needs producers + consumers "
                                 "== threads, both positive")
            for t, n in self.activity:
                if not 0 <= t <= self.duration or not 0 <= n <= producers:
                    raise ValueError(f"activity point ({t}, {n}) out of range")

    def window_plan(self) -> tuple[int, int]:
        if self.rank_bound is not None:
            return plan_from_bound(self.structure, self.rank_bound,
                                   self.threads, self.max_width)
        width = self.width if self.width is not None else 8
        depth = self.depth if self.depth is not None else 8
        return width, depth

    def stretch(self) -> float:
        if self.mode != "oracle":
            return 1.0
        if self.oracle_stretch is not None:
            return self.oracle_stretch
        return ORACLE_STRETCH_STACK if self.structure in STACKS \
            else ORACLE_STRETCH_QUEUE
