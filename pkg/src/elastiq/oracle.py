"""Rank-error measurement oracle.

Serializes the linearization points of a structure under one global lock,
imposing a total order, and mirrors the contents in a strict sequential
shadow structure.  Every non-empty removal then yields an exact *rank
error*: the distance between the removed item and the strict head (FIFO)
or top (LIFO) of the shadow.  The oracle also carries the bookkeeping the
per-design invariant checks hang off: a log of published windows with
suffix maxima, and a log of insert rows with suffix minima.

Serialization changes the timing profile by orders of magnitude, so
oracle runs and throughput runs are never mixed.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Any, Iterable

__all__ = [
    "OracleViolation",
    "RankSample",
    "RankOracle",
    "OracleSummary",
    "summarize",
    "write_samples_csv",
]


class OracleViolation(AssertionError):
    """A bound or invariant asserted by the oracle failed."""


@dataclass(frozen=True)
class RankSample:
    op_index: int
    t_ns: int
    rank_error: int
    bound_k: int
    width: int
    depth: int


@dataclass
class OracleSummary:
    removes: int = 0
    mean_rank: float = 0.0
    max_rank: int = 0
    max_bound: int = 0
    violations: int = 0
    series: list[tuple[float, float]] = field(default_factory=list)


_CHUNK = 64


class _SuffixLog:
    """Append-only log answering max/min over a suffix in chunked time."""

    __slots__ = ("entries", "_chunk_max", "_chunk_min")

    def __init__(self) -> None:
        self.entries: list[tuple[int, ...]] = []
        self._chunk_max: list[tuple[int, ...]] = []
        self._chunk_min: list[tuple[int, ...]] = []

    def append(self, entry: tuple[int, ...]) -> int:
        idx = len(self.entries)
        self.entries.append(entry)
        c = idx // _CHUNK
        if c == len(self._chunk_max):
            self._chunk_max.append(entry)
            self._chunk_min.append(entry)
        else:
            self._chunk_max[c] = tuple(map(max, self._chunk_max[c], entry))
            self._chunk_min[c] = tuple(map(min, self._chunk_min[c], entry))
        return idx

    def _fold(self, start: int, chunks: list, combine) -> tuple[int, ...]:
        entries = self.entries
        end = len(entries)
        if start >= end:
            raise IndexError("empty suffix")
        acc = entries[start]
        i = start + 1
        # walk to the next chunk boundary, then hop whole chunks
        while i < end and i % _CHUNK != 0:
            acc = tuple(map(combine, acc, entries[i]))
            i += 1
        while i + _CHUNK <= end:
            acc = tuple(map(combine, acc, chunks[i // _CHUNK]))
            i += _CHUNK
        while i < end:
            acc = tuple(map(combine, acc, entries[i]))
            i += 1
        return acc

    def suffix_max(self, start: int) -> tuple[int, ...]:
        return self._fold(start, self._chunk_max, max)

    def suffix_min(self, start: int) -> tuple[int, ...]:
        return self._fold(start, self._chunk_min, min)


class RankOracle:
    """Global-lock serialization harness with a sequential shadow.

    discipline: "fifo" (shadow index 0 is the strict head) or "lifo"
    (shadow end is the strict top).  Empty returns are verified against
    the shadow but produce no sample: only non-empty removals are
    relaxed.
    """

    def __init__(
        self,
        discipline: str,
        keep_samples: bool = True,
        track_lateness: bool = False,
    ) -> None:
        if discipline not in ("fifo", "lifo"):
            raise ValueError(f"unknown discipline {discipline!r}")
        self.discipline = discipline
        self.lock = threading.RLock()
        self.shadow: list[Any] = []
        self.samples: list[RankSample] = []
        self.keep_samples = keep_samples
        self.op_index = 0
        self.removes = 0
        self.rank_sum = 0
        self.max_rank = 0
        self.max_bound = 0
        self.window_log = _SuffixLog()
        self.push_log = _SuffixLog()
        self._track_lateness = track_lateness
        self._late_run = 0
        self._late_cap = 0
        self.checks_run: dict[str, int] = {}
        self.t0_ns = time.monotonic_ns()

    # -- assertion helper ------------------------------------------------

    def check(self, cond: bool, label: str, detail: str = "") -> None:
        self.checks_run[label] = self.checks_run.get(label, 0) + 1
        if not cond:
            raise OracleViolation(f"{label}: {detail}" if detail else label)

    # -- linearization hooks (call with self.lock held) --------------------

    def on_insert(self, node: Any) -> None:
        self.op_index += 1
        self.shadow.append(node)

    def on_remove(self, node: Any, bound: int, width: int, depth: int) -> int:
        self.op_index += 1
        shadow = self.shadow
        rank = -1
        if self.discipline == "fifo":
            for i, cand in enumerate(shadow):
                if cand is node:
                    rank = i
                    del shadow[i]
                    break
        else:
            top = len(shadow) - 1
            for i in range(top, -1, -1):
                if shadow[i] is node:
                    rank = top - i
                    del shadow[i]
                    break
        self.check(rank >= 0, "shadow-divergence",
                   "removed item missing from shadow structure")
        self.check(rank <= bound, "rank-bound",
                   f"rank {rank} exceeds bound {bound} (w={width}, d={depth})")
        if self._track_lateness:
            if rank == 0:
                self._late_run = 0
                self._late_cap = bound
            else:
                self._late_run += 1
                if bound > self._late_cap:
                    self._late_cap = bound
                self.check(self._late_run <= self._late_cap, "lateness",
                           f"{self._late_run} consecutive removals skipped the "
                           f"oldest item (cap {self._late_cap})")
        self.removes += 1
        self.rank_sum += rank
        if rank > self.max_rank:
            self.max_rank = rank
        if bound > self.max_bound:
            self.max_bound = bound
        if self.keep_samples:
            self.samples.append(RankSample(
                self.op_index, time.monotonic_ns() - self.t0_ns,
                rank, bound, width, depth,
            ))
        return rank

    def on_empty(self) -> None:
        self.op_index += 1
        self.check(not self.shadow, "shadow-divergence",
                   f"empty returned while {len(self.shadow)} items remain")

    # -- reporting ---------------------------------------------------------

    def summary(self, window_s: float = 0.025) -> OracleSummary:
        return summarize(self.samples, window_s) if self.keep_samples else \
            OracleSummary(
                removes=self.removes,
                mean_rank=(self.rank_sum / self.removes) if self.removes else 0.0,
                max_rank=self.max_rank,
                max_bound=self.max_bound,
            )

    def verify_drained(self) -> None:
        self.check(not self.shadow, "shadow-divergence",
                   f"{len(self.shadow)} items remain in shadow after drain")


def summarize(samples: Iterable[RankSample], window_s: float = 0.025) -> OracleSummary:
    """Aggregate samples: mean/max rank plus a time-bucketed mean series."""
    out = OracleSummary()
    buckets: dict[int, tuple[int, int]] = {}
    window_ns = max(1, int(window_s * 1e9))
    n = 0
    total = 0
    for s in samples:
        n += 1
        total += s.rank_error
        if s.rank_error > out.max_rank:
            out.max_rank = s.rank_error
        if s.bound_k > out.max_bound:
            out.max_bound = s.bound_k
        b = s.t_ns // window_ns
        cnt, acc = buckets.get(b, (0, 0))
        buckets[b] = (cnt + 1, acc + s.rank_error)
    out.removes = n
    out.mean_rank = (total / n) if n else 0.0
    out.series = [
        (b * window_s, acc / cnt) for b, (cnt, acc) in sorted(buckets.items())
    ]
    return out


def write_samples_csv(samples: Iterable[RankSample], path: str,
                      meta: dict[str, Any] | None = None) -> None:
    """Dump samples as CSV: timestamp_ns, op, rank_error, bound_k, width, depth."""
    with open(path, "w", encoding="utf-8") as f:
        for key, value in (meta or {}).items():
            f.write(f"# {key}={value}\n")
        f.write("timestamp_ns,op,rank_error,bound_k,width,depth\n")
        for s in samples:
            f.write(f"{s.t_ns},{s.op_index},{s.rank_error},{s.bound_k},"
                    f"{s.width},{s.depth}\n")
