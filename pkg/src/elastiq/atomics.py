"""Atomic cells and epoch-based deferred reclamation.

CPython offers no native compare-and-swap on object fields, so each cell
guards its compare+store step with a private lock.  Loads are plain
attribute reads (a single reference read is consistent under the
interpreter lock), which keeps the optimistic read paths cheap and makes
failed exchange attempts observable to callers -- the contention signal
the rest of the library feeds on.
"""

from __future__ import annotations

import threading
from typing import Any

__all__ = ["RefCell", "WordCell", "ReclamationDomain", "ReclamationError"]


class RefCell:
    """Atomic reference cell; compare-and-swap by object identity."""

    __slots__ = ("_lock", "_value")

    def __init__(self, value: Any = None) -> None:
        self._lock = threading.Lock()
        self._value = value

    def load(self) -> Any:
        return self._value

    def store(self, value: Any) -> None:
        with self._lock:
            self._value = value

    def compare_and_swap(self, expected: Any, new: Any) -> bool:
        """Install `new` iff the cell still holds `expected` (identity)."""
        with self._lock:
            if self._value is expected:
                self._value = new
                return True
            return False


class WordCell:
    """Atomic machine-word cell; compare-and-swap by integer equality.

    Holds packed window words (plain ints), mirroring a double-width
    hardware compare-exchange.  Callers must guarantee freedom from
    value reuse (monotone fields or an embedded version counter).
    """

    __slots__ = ("_lock", "_value")

    def __init__(self, value: int = 0) -> None:
        self._lock = threading.Lock()
        self._value = value

    def load(self) -> int:
        return self._value

    def store(self, value: int) -> None:
        with self._lock:
            self._value = value

    def compare_and_swap(self, expected: int, new: int) -> bool:
        with self._lock:
            if self._value == expected:
                self._value = new
                return True
            return False


class ReclamationError(RuntimeError):
    """A traversal touched a node that was already reclaimed."""


class _ThreadRecord:
    __slots__ = ("announced", "retired")

    def __init__(self) -> None:
        self.announced: int | None = None
        self.retired: list[tuple[int, Any]] = []


# A node retired in epoch E may be reclaimed once the global epoch has
# advanced past E + 1: every advance requires all pinned threads to have
# announced the then-current epoch, so two advances imply no pinned
# thread predates the retirement.
_GRACE = 2

_RECLAIM_BATCH = 128


class ReclamationDomain:
    """Epoch-based deferred reclamation shared by a family of structures.

    Threads `pin()` before traversing shared nodes and `unpin()` after;
    detached nodes go through `retire()` and are only reclaimed after a
    grace period.  In CPython the garbage collector already guarantees a
    detached node outlives every reference to it, so in release mode the
    epoch machinery stands down (pin/retire are no-ops and reclamation is
    the collector's).  With ``debug=True`` the full scheme runs and
    reclaimed nodes are *poisoned*: `check()` raises if a traversal ever
    reaches one, which is how the tests validate the retire points of the
    data structures.
    """

    def __init__(self, debug: bool = False) -> None:
        self.debug = debug
        self._epoch = 0
        self._lock = threading.Lock()
        self._records: list[_ThreadRecord] = []
        self._tls = threading.local()
        self._poisoned: dict[int, Any] = {}  # id -> node, kept alive in debug
        self.reclaimed = 0

    def _record(self) -> _ThreadRecord:
        rec = getattr(self._tls, "rec", None)
        if rec is None:
            rec = _ThreadRecord()
            self._tls.rec = rec
            with self._lock:
                self._records.append(rec)
        return rec

    def pin(self) -> _ThreadRecord | None:
        if not self.debug:
            return None
        rec = self._record()
        rec.announced = self._epoch
        return rec

    def unpin(self, rec: _ThreadRecord | None = None) -> None:
        if rec is None:
            return
        rec.announced = None

    def retire(self, node: Any) -> None:
        if not self.debug:
            return
        rec = self._record()
        rec.retired.append((self._epoch, node))
        if len(rec.retired) >= _RECLAIM_BATCH:
            self._advance()
            self.collect(rec)

    def _advance(self) -> None:
        with self._lock:
            epoch = self._epoch
            for rec in self._records:
                ann = rec.announced
                if ann is not None and ann < epoch:
                    return
            self._epoch = epoch + 1

    def collect(self, rec: _ThreadRecord | None = None) -> int:
        """Reclaim this thread's retired nodes past the grace period."""
        if rec is None:
            rec = self._record()
        horizon = self._epoch - _GRACE
        keep: list[tuple[int, Any]] = []
        freed = 0
        for epoch, node in rec.retired:
            if epoch <= horizon:
                if self.debug:
                    self._poisoned[id(node)] = node
                freed += 1
            else:
                keep.append((epoch, node))
        rec.retired = keep
        self.reclaimed += freed
        return freed

    def drain(self) -> None:
        """Force reclamation of everything retired by this thread.

        Only valid at quiescence (no concurrent operations in flight).
        """
        self._epoch += _GRACE + 1
        self.collect()

    def check(self, node: Any) -> None:
        """Debug assertion: `node` must not have been reclaimed."""
        if self.debug and id(node) in self._poisoned:
            raise ReclamationError(
                f"traversed reclaimed node {type(node).__name__} @0x{id(node):x}"
            )
