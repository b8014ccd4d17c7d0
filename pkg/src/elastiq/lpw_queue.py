"""Elastic FIFO queue with decoupled head and tail window words.

Head and tail windows live in two separate 128-bit-style packed words, so
their depths can change independently at every shift.  Width changes only
enter at the tail and are recorded in a strict FIFO log of (row, width)
marks; the head window consumes the log to adapt, and is always narrowed
so that all rows it spans share one width.

The tail delays a requested width by one shift (it lands in `next_width`
first): the log mark is published before any insert can use the new
width, so the head always learns about a width change in time.
"""

from __future__ import annotations

import threading
from typing import Any, NamedTuple

from .atomics import RefCell, ReclamationDomain, WordCell
from .controller import ControllerConfig, ControllerState, controller_update
from .lanes import EMPTY, QueueNode, SubQueue
from .oracle import RankOracle
from .window import (
    HOP_CONTENTION,
    RelaxationTargets,
    ThreadStates,
    WindowView,
    next_lane,
)

__all__ = [
    "SplitWindowQueue",
    "TailView",
    "pack_tail",
    "unpack_tail",
    "pack_head",
    "unpack_head",
]

_M64 = (1 << 64) - 1
_M16 = 0xFFFF


class TailView(NamedTuple):
    max: int
    depth: int
    width: int
    next_width: int

    @property
    def min(self) -> int:
        return self.max - self.depth


# Packed layout (low to high): max:64 | depth:16 | width:16 | next_width:16.
# The head word uses the same layout without next_width.

def pack_tail(max_row: int, depth: int, width: int, next_width: int) -> int:
    return (max_row & _M64) | ((depth & _M16) << 64) | ((width & _M16) << 80) \
        | ((next_width & _M16) << 96)


def unpack_tail(word: int) -> TailView:
    return TailView(word & _M64, (word >> 64) & _M16, (word >> 80) & _M16,
                    (word >> 96) & _M16)


def pack_head(max_row: int, depth: int, width: int) -> int:
    return (max_row & _M64) | ((depth & _M16) << 64) | ((width & _M16) << 80)


def unpack_head(word: int) -> WindowView:
    return WindowView(word & _M64, (word >> 64) & _M16, (word >> 80) & _M16)


class _WidthMark:
    """First row at which a new tail width applies."""

    __slots__ = ("next", "row", "width")

    def __init__(self, row: int, width: int) -> None:
        self.next: _WidthMark | None = None
        self.row = row
        self.width = width


class SplitWindowQueue:
    """k-out-of-order FIFO queue with independent head/tail elasticity.

    Every dequeued item x deviates from strict FIFO order by at most
    (w - 1) * (d_enq + d_deq - 1), where w and d_enq are the width and
    depth of the tail window when x was inserted and d_deq the depth of
    the head window when it was removed.
    """

    def __init__(
        self,
        max_width: int = 256,
        width: int = 8,
        depth: int = 8,
        *,
        domain: ReclamationDomain | None = None,
        oracle: RankOracle | None = None,
        controller: ControllerConfig | None = None,
        seed: int | None = None,
    ) -> None:
        if max_width > _M16:
            raise ValueError("max_width exceeds the packed width field")
        self.targets = RelaxationTargets(max_width, width, depth)
        self.domain = domain if domain is not None else ReclamationDomain()
        lane_domain = self.domain if self.domain.debug else None
        self._lanes = tuple(SubQueue(lane_domain) for _ in range(max_width))
        w0, d0 = self.targets.get()
        tail_word = pack_tail(d0, d0, w0, w0)
        head_word = pack_head(d0, d0, w0)
        self._tail = WordCell(tail_word)
        self._head = WordCell(head_word)
        # one-slot decode caches: window words change only at shifts
        self._tail_seen = (tail_word, unpack_tail(tail_word))
        self._head_seen = (head_word, unpack_head(head_word))
        sentinel = _WidthMark(0, w0)
        self._log_head = RefCell(sentinel)
        self._log_tail = RefCell(sentinel)
        self._log_link = threading.Lock()
        self._states = ThreadStates(seed)
        self._ctl_cfg = controller
        self._oracle = oracle

    # -- public knobs ------------------------------------------------------

    def set_width(self, width: int) -> int:
        return self.targets.set_width(width)

    def set_depth(self, depth: int) -> int:
        return self.targets.set_depth(depth)

    def get_targets(self) -> tuple[int, int]:
        return self.targets.get()

    def _tail_decoded(self, word: int) -> TailView:
        seen = self._tail_seen
        if seen[0] == word:
            return seen[1]
        view = unpack_tail(word)
        self._tail_seen = (word, view)
        return view

    def _head_decoded(self, word: int) -> WindowView:
        seen = self._head_seen
        if seen[0] == word:
            return seen[1]
        view = unpack_head(word)
        self._head_seen = (word, view)
        return view

    def head_view(self) -> WindowView:
        return self._head_decoded(self._head.load())

    def tail_view(self) -> TailView:
        return self._tail_decoded(self._tail.load())

    def hop_stats(self) -> tuple[int, int]:
        st = self._states.get()
        return st.hops_contention, st.hops_invalid

    # -- width-change log ----------------------------------------------------

    def _log_tail_node(self) -> _WidthMark:
        cell = self._log_tail
        while True:
            tail = cell.load()
            nxt = tail.next
            if nxt is None:
                return tail
            cell.compare_and_swap(tail, nxt)

    def _log_append(self, tail: _WidthMark, mark: _WidthMark) -> bool:
        lock = self._log_link
        lock.acquire()
        if tail.next is None:
            tail.next = mark
            lock.release()
            self._log_tail.compare_and_swap(tail, mark)
            return True
        lock.release()
        return False

    def _log_first(self) -> _WidthMark | None:
        return self._log_head.load().next

    def _log_drop_first(self, sentinel: _WidthMark, first: _WidthMark) -> bool:
        if self._log_head.compare_and_swap(sentinel, first):
            self.domain.retire(sentinel)
            return True
        return False

    def _sync_tail(self, view: TailView) -> None:
        """Publish the pending width change for `view`, at most once."""
        orc = self._oracle
        while True:
            tail = self._log_tail_node()
            if tail.row > view.max:
                return  # already published
            mark = _WidthMark(view.max + 1, view.next_width)
            if orc is None:
                if self._log_append(tail, mark):
                    return
            else:
                with orc.lock:
                    if self._log_append(tail, mark):
                        head = unpack_head(self._head.load())
                        orc.check(head.max < mark.row, "log-mark-ahead-of-head",
                                  f"mark row {mark.row} not past head max "
                                  f"{head.max}")
                        return

    # -- window shifts ---------------------------------------------------------

    def _shift_tail(self, old_word: int) -> bool:
        old = unpack_tail(old_word)
        if old.width != old.next_width:
            self._sync_tail(old)
        w, d = self.targets.get()
        new_word = pack_tail(old.max + d, d, old.next_width, w)
        orc = self._oracle
        if orc is None:
            return self._tail.compare_and_swap(old_word, new_word)
        with orc.lock:
            return self._tail.compare_and_swap(old_word, new_word)

    def _lane_exhausted(self, lane: SubQueue, wmax: int) -> bool:
        first = lane.head_node().next
        return first is None or first.row > wmax

    def _shift_head(self, old_word: int) -> bool:
        old = unpack_head(old_word)
        # Tail must be ahead; its monotone progress also freezes the set
        # of rows <= old.max, making the exhaustion recheck below stable.
        tail = unpack_tail(self._tail.load())
        if tail.max <= old.max:
            return False
        # Drop stale width marks already covered by this window.
        while True:
            sentinel = self._log_head.load()
            first = sentinel.next
            if first is None or first.row > old.max:
                break
            self._log_drop_first(sentinel, first)
        orc = self._oracle
        if orc is None:
            return self._shift_head_install(old_word, old, tail)
        with orc.lock:
            ok = self._shift_head_install(old_word, old, tail)
            if ok:
                head = unpack_head(self._head.load())
                orc.check(head.max > old.max, "head-monotone",
                          f"head max did not grow: {head.max} <= {old.max}")
                orc.check(head.max <= unpack_tail(self._tail.load()).max,
                          "head-behind-tail", "head window passed the tail")
            return ok

    def _shift_head_install(self, old_word: int, old: WindowView,
                            tail: TailView) -> bool:
        for j in range(old.width):
            if not self._lane_exhausted(self._lanes[j], old.max):
                return False
        pending = self._log_first()
        new_max = old.max + self.targets.depth
        if new_max > tail.min:
            # Rows above the tail floor can still receive inserts; a head
            # window ending among them would leave its own floor reachable
            # by late inserts.  Cover the whole tail window instead.
            new_max = tail.max
        width = old.width
        if pending is not None and pending.row == old.max + 1:
            # The window starts exactly where a width change applies.
            width = pending.width
            pending = pending.next
        if pending is not None and pending.row <= new_max:
            # Never span a width change: stop just below it (width-change
            # rows start at a past tail-window boundary, so this cap never
            # lands the window back inside the insert range).
            new_max = pending.row - 1
        new_word = pack_head(new_max, new_max - old.max, width)
        return self._head.compare_and_swap(old_word, new_word)

    # -- linearized lane steps ----------------------------------------------

    def _link(self, lane: SubQueue, tail: QueueNode, node: QueueNode) -> bool:
        orc = self._oracle
        if orc is None:
            return lane.try_enqueue(tail, node)
        with orc.lock:
            ok = lane.try_enqueue(tail, node)
            if ok:
                tv = unpack_tail(self._tail.load())
                orc.check(tv.min < node.row <= tv.max, "insert-window",
                          f"row {node.row} outside tail window "
                          f"({tv.min}, {tv.max}]")
                node.enq_width = tv.width
                node.enq_depth = tv.depth
                orc.on_insert(node)
        return ok

    def _unlink(self, lane: SubQueue, head: QueueNode, first: QueueNode):
        orc = self._oracle
        if orc is None:
            if lane.try_dequeue(head, first):
                value = first.value
                first.value = None
                return True, value
            return False, None
        with orc.lock:
            if not lane.try_dequeue(head, first):
                return False, None
            hv = unpack_head(self._head.load())
            orc.check(hv.min < first.row <= hv.max, "remove-window",
                      f"row {first.row} outside head window "
                      f"({hv.min}, {hv.max}]")
            orc.check(first.enq_width == hv.width, "single-width-window",
                      f"item inserted at width {first.enq_width} removed "
                      f"under head width {hv.width}")
            bound = (first.enq_width - 1) * (first.enq_depth + hv.depth - 1)
            orc.on_remove(first, bound, hv.width, hv.depth)
            value = first.value
            first.value = None
            return True, value

    # -- operations ----------------------------------------------------------

    def enqueue(self, value: Any) -> tuple[int, int]:
        """Insert `value`; returns the (lane, row) it landed at."""
        st = self._states.get()
        ctl = self._ctl_cfg
        dom = self.domain
        rec = dom.pin()
        try:
            while True:
                word = self._tail.load()
                win = self._tail_decoded(word)
                width = win.width
                wmax = win.max
                wmin = win.min
                j = st.lane if st.lane < width else st.rng.randrange(width)
                for _ in range(width):
                    lane = self._lanes[j]
                    tail = lane.tail_node()
                    trow = tail.row
                    if trow < wmax:
                        row = (wmin if wmin > trow else trow) + 1
                        node = QueueNode(value, row)
                        ok = self._link(lane, tail, node)
                        if ctl is not None:
                            self._feed_controller(st, ok, win)
                        if ok:
                            st.lane = j
                            return j, row
                        j = next_lane(st, width, HOP_CONTENTION)
                        break
                    st.hops_invalid += 1
                    j = j + 1 if j + 1 < width else 0
                else:
                    self._shift_tail(word)
        finally:
            dom.unpin(rec)

    def dequeue(self) -> Any:
        """Remove a value from the head window, or EMPTY."""
        st = self._states.get()
        ctl = self._ctl_cfg
        dom = self.domain
        rec = dom.pin()
        try:
            while True:
                word = self._head.load()
                win = self._head_decoded(word)
                width = win.width
                wmax = win.max
                j = st.lane if st.lane < width else st.rng.randrange(width)
                for _ in range(width):
                    lane = self._lanes[j]
                    head = lane.head_node()
                    first = head.next
                    if first is not None and first.row <= wmax:
                        ok, value = self._unlink(lane, head, first)
                        if ctl is not None:
                            self._feed_controller(st, ok, self.tail_view())
                        if ok:
                            st.lane = j
                            return value
                        j = next_lane(st, width, HOP_CONTENTION)
                        break
                    st.hops_invalid += 1
                    j = j + 1 if j + 1 < width else 0
                else:
                    tail_word = self._tail.load()
                    if self._tail_decoded(tail_word).max > wmax:
                        self._shift_head(word)
                        continue
                    if self._collect_empty(word, tail_word, width):
                        return EMPTY
        finally:
            dom.unpin(rec)

    def _collect_empty(self, head_word: int, tail_word: int, width: int) -> bool:
        orc = self._oracle
        if orc is None:
            return self._double_collect(head_word, tail_word, width)
        with orc.lock:
            if self._double_collect(head_word, tail_word, width):
                orc.on_empty()
                return True
            return False

    def _double_collect(self, head_word: int, tail_word: int, width: int) -> bool:
        if unpack_head(head_word).max != unpack_tail(tail_word).max:
            return False
        if self._head.load() != head_word or self._tail.load() != tail_word:
            return False
        snap = []
        for j in range(width):
            head = self._lanes[j].head_node()
            if head.next is not None:
                return False
            snap.append(head)
        if self._head.load() != head_word or self._tail.load() != tail_word:
            return False
        for j in range(width):
            head = self._lanes[j].head_node()
            if head is not snap[j] or head.next is not None:
                return False
        return True

    def _feed_controller(self, st, ok: bool, tail: TailView) -> None:
        ctl_state = st.ctl
        if ctl_state is None:
            ctl_state = st.ctl = ControllerState()
        controller_update(ctl_state, ok, tail.max, tail.width,
                          self.targets, self._ctl_cfg)

    # -- audits ----------------------------------------------------------------

    def drain_remaining(self) -> list[Any]:
        out = []
        while True:
            value = self.dequeue()
            if value is EMPTY:
                return out
            out.append(value)

    def log_marks(self) -> list[tuple[int, int]]:
        """Snapshot of the pending width-change log (test audit)."""
        out = []
        node = self._log_head.load().next
        while node is not None:
            out.append((node.row, node.width))
            node = node.next
        return out
