"""Elastic FIFO queue whose relaxation windows form the side log itself.

The side structure is a strict FIFO chain of window records; the head and
tail records of the chain *are* the active dequeue and enqueue windows.
Shifting the tail appends a fresh window built from the shared targets,
shifting the head pops the drained front record, so elastic changes enter
at the tail and propagate to the head through the chain.
"""

from __future__ import annotations

import threading
from typing import Any

from .atomics import RefCell, ReclamationDomain
from .controller import ControllerConfig, ControllerState, controller_update
from .lanes import EMPTY, QueueNode, SubQueue
from .oracle import RankOracle
from .window import (
    HOP_CONTENTION,
    HOP_INVALID_ROW,
    RelaxationTargets,
    ThreadStates,
    WindowView,
    next_lane,
)

__all__ = ["ChainedWindowQueue"]


class _WindowRecord:
    """One relaxation window; also a link of the window chain."""

    __slots__ = ("next", "max", "depth", "width")

    def __init__(self, max_row: int, depth: int, width: int) -> None:
        self.next: _WindowRecord | None = None
        self.max = max_row
        self.depth = depth
        self.width = width

    def view(self) -> WindowView:
        return WindowView(self.max, self.depth, self.width)


class ChainedWindowQueue:
    """k-out-of-order FIFO queue with run-time adjustable window size.

    Every dequeued item deviates from strict FIFO order by at most
    (width - 1) * depth of the head window active at its removal.
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
        self.targets = RelaxationTargets(max_width, width, depth)
        self.domain = domain if domain is not None else ReclamationDomain()
        lane_domain = self.domain if self.domain.debug else None
        self._lanes = tuple(SubQueue(lane_domain) for _ in range(max_width))
        w0, d0 = self.targets.get()
        first = _WindowRecord(d0, d0, w0)
        self._chain_head = RefCell(first)
        self._chain_tail = RefCell(first)
        self._chain_link = threading.Lock()
        self._states = ThreadStates(seed)
        self._ctl_cfg = controller
        self._oracle = oracle
        if oracle is not None:
            # insert/remove slot accounting per window record
            self._win_counts: dict[int, list[int]] = {id(first): [0, 0]}

    # -- public knobs ------------------------------------------------------

    def set_width(self, width: int) -> int:
        return self.targets.set_width(width)

    def set_depth(self, depth: int) -> int:
        return self.targets.set_depth(depth)

    def get_targets(self) -> tuple[int, int]:
        return self.targets.get()

    def head_view(self) -> WindowView:
        return self._chain_head.load().view()

    def tail_view(self) -> WindowView:
        return self._tail_record().view()

    def current_bound(self) -> int:
        view = self.head_view()
        return (view.width - 1) * view.depth

    def hop_stats(self) -> tuple[int, int]:
        st = self._states.get()
        return st.hops_contention, st.hops_invalid

    # -- window chain ------------------------------------------------------

    def _tail_record(self) -> _WindowRecord:
        cell = self._chain_tail
        while True:
            tail = cell.load()
            nxt = tail.next
            if nxt is None:
                return tail
            cell.compare_and_swap(tail, nxt)

    def _append_record(self, old: _WindowRecord, new: _WindowRecord) -> bool:
        lock = self._chain_link
        lock.acquire()
        if old.next is None:
            old.next = new
            lock.release()
            self._chain_tail.compare_and_swap(old, new)
            return True
        lock.release()
        return False

    def _shift_tail(self, old: _WindowRecord) -> bool:
        w, d = self.targets.get()
        new = _WindowRecord(old.max + d, d, w)
        orc = self._oracle
        if orc is None:
            return self._append_record(old, new)
        with orc.lock:
            ok = self._append_record(old, new)
            if ok:
                self._win_counts[id(new)] = [0, 0]
            return ok

    def _lane_exhausted(self, lane: SubQueue, wmax: int) -> bool:
        first = lane.head_node().next
        return first is None or first.row > wmax

    def _shift_head(self, cur: _WindowRecord) -> bool:
        nxt = cur.next
        if nxt is None:
            return False
        orc = self._oracle
        if orc is None:
            # Revalidate exhaustion right before the exchange: a late
            # enqueue under this window must keep it the head.
            for j in range(cur.width):
                if not self._lane_exhausted(self._lanes[j], cur.max):
                    return False
            ok = self._chain_head.compare_and_swap(cur, nxt)
            if ok:
                self.domain.retire(cur)
            return ok
        with orc.lock:
            for j in range(cur.width):
                if not self._lane_exhausted(self._lanes[j], cur.max):
                    return False
            ok = self._chain_head.compare_and_swap(cur, nxt)
            if ok:
                ins, rem = self._win_counts.pop(id(cur))
                slots = cur.width * cur.depth
                orc.check(ins == slots and rem == slots, "window-conservation",
                          f"window retired with {ins}/{rem} of {slots} slots")
                self.domain.retire(cur)
            return ok

    # -- linearized lane steps ----------------------------------------------

    def _link(self, lane: SubQueue, tail: QueueNode, node: QueueNode) -> bool:
        orc = self._oracle
        if orc is None:
            return lane.try_enqueue(tail, node)
        with orc.lock:
            ok = lane.try_enqueue(tail, node)
            if ok:
                tw = self._tail_record()
                orc.check(tw.max - tw.depth < node.row <= tw.max, "insert-window",
                          f"row {node.row} outside tail window "
                          f"({tw.max - tw.depth}, {tw.max}]")
                self._win_counts[id(tw)][0] += 1
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
            hw = self._chain_head.load()
            orc.check(hw.max - hw.depth < first.row <= hw.max, "remove-window",
                      f"row {first.row} outside head window "
                      f"({hw.max - hw.depth}, {hw.max}]")
            self._win_counts[id(hw)][1] += 1
            orc.on_remove(first, (hw.width - 1) * hw.depth, hw.width, hw.depth)
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
                win = self._tail_record()
                width = win.width
                wmax = win.max
                wmin = wmax - win.depth
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
                    self._shift_tail(win)
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
                win = self._chain_head.load()
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
                            self._feed_controller(st, ok, self._tail_record())
                        if ok:
                            st.lane = j
                            return value
                        j = next_lane(st, width, HOP_CONTENTION)
                        break
                    st.hops_invalid += 1
                    j = j + 1 if j + 1 < width else 0
                else:
                    # window exhausted under this view
                    tail = self._tail_record()
                    if win is not tail:
                        self._shift_head(win)
                        continue
                    if all(self._lanes[i].tail_node().row >= wmax
                           for i in range(width)):
                        # the single window is full and drained: every
                        # enqueuer is blocked on the shift, so help it
                        # (a partial window must never be shifted past:
                        # each window takes exactly width*depth inserts)
                        self._shift_tail(win)
                        continue
                    if self._collect_empty(win, width):
                        return EMPTY
        finally:
            dom.unpin(rec)

    def _collect_empty(self, win: _WindowRecord, width: int) -> bool:
        orc = self._oracle
        if orc is None:
            return self._double_collect(win, width)
        with orc.lock:
            if self._double_collect(win, width):
                orc.on_empty()
                return True
            return False

    def _double_collect(self, win: _WindowRecord, width: int) -> bool:
        if self._chain_head.load() is not win or win.next is not None:
            return False
        snap = []
        for j in range(width):
            head = self._lanes[j].head_node()
            if head.next is not None:
                return False
            snap.append(head)
        if self._chain_head.load() is not win or win.next is not None:
            return False
        for j in range(width):
            head = self._lanes[j].head_node()
            if head is not snap[j] or head.next is not None:
                return False
        return True

    def _feed_controller(self, st, ok: bool, tail: _WindowRecord) -> None:
        ctl_state = st.ctl
        if ctl_state is None:
            ctl_state = st.ctl = ControllerState()
        controller_update(ctl_state, ok, tail.max, tail.width,
                          self.targets, self._ctl_cfg)

    # -- audits ----------------------------------------------------------------

    def drain_remaining(self) -> list[Any]:
        """Dequeue everything left; single-threaded teardown helper."""
        out = []
        while True:
            value = self.dequeue()
            if value is EMPTY:
                return out
            out.append(value)

    def chain_windows(self) -> list[WindowView]:
        """Snapshot of the window chain from head to tail (test audit)."""
        out = []
        node = self._chain_head.load()
        while node is not None:
            out.append(node.view())
            node = node.next
        return out
