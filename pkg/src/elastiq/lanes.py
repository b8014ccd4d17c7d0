"""Strict per-lane building blocks: row-tagged FIFO and LIFO lanes.

A lane is one disjoint strict sub-structure of a wider relaxed design.
Every node carries the logical *row* it was inserted at; rows are strictly
increasing from head to tail within a FIFO lane and may contain gaps.

Lane operations deliberately do not retry their linearizing exchange:
they attempt it once and report the outcome, so the caller (which owns
lane selection) can observe contention and react to it.
"""

from __future__ import annotations

import threading
from typing import Any

from .atomics import RefCell, ReclamationDomain

__all__ = ["EMPTY", "QueueNode", "SubQueue", "StackNode", "SubStack"]


class _EmptyType:
    """Singleton returned by remove operations that found nothing."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "EMPTY"


EMPTY = _EmptyType()


class QueueNode:
    __slots__ = ("value", "row", "next", "enq_width", "enq_depth")

    def __init__(self, value: Any, row: int) -> None:
        self.value = value
        self.row = row
        self.next: QueueNode | None = None
        # enq_width/enq_depth are only assigned in oracle mode.

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"QueueNode({self.value!r}@{self.row})"


class SubQueue:
    """Michael-Scott FIFO lane with row-tagged nodes.

    The tail-link exchange (the enqueue linearization) and the head
    exchange (the dequeue linearization) are single attempts; only the
    tail catch-up step loops internally.
    """

    __slots__ = ("_head", "_tail", "_link_lock", "_domain")

    def __init__(self, domain: ReclamationDomain | None = None) -> None:
        sentinel = QueueNode(None, 0)
        self._head = RefCell(sentinel)
        self._tail = RefCell(sentinel)
        self._link_lock = threading.Lock()
        self._domain = domain

    def tail_node(self) -> QueueNode:
        """Current tail node (after helping any lagging tail pointer)."""
        while True:
            tail = self._tail.load()
            nxt = tail.next
            if nxt is None:
                if self._domain is not None:
                    self._domain.check(tail)
                return tail
            self._tail.compare_and_swap(tail, nxt)

    def try_enqueue(self, tail: QueueNode, node: QueueNode) -> bool:
        """Link `node` after `tail` iff `tail` is still last. One attempt."""
        lock = self._link_lock
        lock.acquire()
        if tail.next is None:
            tail.next = node
            lock.release()
            self._tail.compare_and_swap(tail, node)
            return True
        lock.release()
        return False

    def head_node(self) -> QueueNode:
        """Current head sentinel; `head_node().next` is the oldest item."""
        head = self._head.load()
        if self._domain is not None:
            self._domain.check(head)
        return head

    def try_dequeue(self, head: QueueNode, first: QueueNode) -> bool:
        """Unlink `first` (== head.next) by advancing head. One attempt."""
        tail = self._tail.load()
        if tail is head:
            # Keep the tail pointer off the sentinel we are about to retire.
            self._tail.compare_and_swap(tail, first)
        if self._head.compare_and_swap(head, first):
            if self._domain is not None:
                self._domain.retire(head)
            return True
        return False

    def is_empty(self) -> bool:
        return self._head.load().next is None

    def drain_rows(self) -> list[tuple[Any, int]]:
        """Sequential drain for audits; not safe under concurrency."""
        out = []
        node = self._head.load().next
        while node is not None:
            out.append((node.value, node.row))
            node = node.next
        return out


class StackNode:
    __slots__ = ("value", "row", "below", "hist_idx", "push_min", "push_seq")

    def __init__(self, value: Any, row: int) -> None:
        self.value = value
        self.row = row
        self.below: StackNode | None = None
        # hist_idx/push_min/push_seq are only assigned in oracle mode.

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"StackNode({self.value!r}@{self.row})"


class SubStack:
    """Treiber LIFO lane with a (top, top_row, stamp) descriptor.

    The descriptor is read in one atomic load so scans see the top node
    and its row consistently; the stamp makes every published descriptor
    unique, ruling out reuse hazards across pop/push cycles.
    """

    __slots__ = ("_desc", "_domain")

    def __init__(self, domain: ReclamationDomain | None = None) -> None:
        self._desc = RefCell((None, 0, 0))
        self._domain = domain

    def descriptor(self) -> tuple[StackNode | None, int, int]:
        return self._desc.load()

    def top_row(self) -> int:
        """Row of the top node; 0 when the lane is empty."""
        return self._desc.load()[1]

    def try_push(self, desc: tuple, node: StackNode) -> bool:
        node.below = desc[0]
        return self._desc.compare_and_swap(desc, (node, node.row, desc[2] + 1))

    def try_pop(self, desc: tuple) -> bool:
        top = desc[0]
        if top is None:
            return False
        if self._domain is not None:
            self._domain.check(top)
        below = top.below
        row = below.row if below is not None else 0
        if self._desc.compare_and_swap(desc, (below, row, desc[2] + 1)):
            if self._domain is not None:
                self._domain.retire(top)
            return True
        return False

    def is_empty(self) -> bool:
        return self._desc.load()[0] is None

    def drain_rows(self) -> list[tuple[Any, int]]:
        """Sequential top-down drain for audits; not safe under concurrency."""
        out = []
        node = self._desc.load()[0]
        while node is not None:
            out.append((node.value, node.row))
            node = node.below
        return out
