"""Strict (non-relaxed) baselines: one-lane FIFO queue and LIFO stack.

These wrap a single lane with a retry loop, giving the classic
linearizable structures the benchmarks compare against.  Rows degenerate
to a per-structure operation counter.
"""

from __future__ import annotations

from typing import Any

from .atomics import ReclamationDomain
from .lanes import EMPTY, QueueNode, StackNode, SubQueue, SubStack
from .oracle import RankOracle

__all__ = ["StrictQueue", "StrictStack"]


class StrictQueue:
    """Michael-Scott FIFO queue."""

    def __init__(self, *, domain: ReclamationDomain | None = None,
                 oracle: RankOracle | None = None) -> None:
        self.domain = domain if domain is not None else ReclamationDomain()
        self._lane = SubQueue(self.domain if self.domain.debug else None)
        self._oracle = oracle

    def enqueue(self, value: Any) -> tuple[int, int]:
        lane = self._lane
        dom = self.domain
        orc = self._oracle
        rec = dom.pin()
        try:
            while True:
                tail = lane.tail_node()
                node = QueueNode(value, tail.row + 1)
                if orc is None:
                    if lane.try_enqueue(tail, node):
                        return 0, node.row
                else:
                    with orc.lock:
                        if lane.try_enqueue(tail, node):
                            orc.on_insert(node)
                            return 0, node.row
        finally:
            dom.unpin(rec)

    def dequeue(self) -> Any:
        lane = self._lane
        dom = self.domain
        orc = self._oracle
        rec = dom.pin()
        try:
            while True:
                head = lane.head_node()
                first = head.next
                if first is None:
                    if orc is None:
                        if lane.head_node() is head and head.next is None:
                            return EMPTY
                        continue
                    with orc.lock:
                        if lane.head_node() is head and head.next is None:
                            orc.on_empty()
                            return EMPTY
                    continue
                if orc is None:
                    if lane.try_dequeue(head, first):
                        value = first.value
                        first.value = None
                        return value
                else:
                    with orc.lock:
                        if lane.try_dequeue(head, first):
                            orc.on_remove(first, 0, 1, 1)
                            value = first.value
                            first.value = None
                            return value
        finally:
            dom.unpin(rec)

    def drain_remaining(self) -> list[Any]:
        out = []
        while True:
            value = self.dequeue()
            if value is EMPTY:
                return out
            out.append(value)


class StrictStack:
    """Treiber LIFO stack."""

    def __init__(self, *, domain: ReclamationDomain | None = None,
                 oracle: RankOracle | None = None) -> None:
        self.domain = domain if domain is not None else ReclamationDomain()
        self._lane = SubStack(self.domain if self.domain.debug else None)
        self._oracle = oracle

    def push(self, value: Any) -> tuple[int, int]:
        lane = self._lane
        dom = self.domain
        orc = self._oracle
        rec = dom.pin()
        try:
            while True:
                desc = lane.descriptor()
                node = StackNode(value, desc[1] + 1)
                if orc is None:
                    if lane.try_push(desc, node):
                        return 0, node.row
                else:
                    with orc.lock:
                        if lane.try_push(desc, node):
                            orc.on_insert(node)
                            return 0, node.row
        finally:
            dom.unpin(rec)

    def pop(self) -> Any:
        lane = self._lane
        dom = self.domain
        orc = self._oracle
        rec = dom.pin()
        try:
            while True:
                desc = lane.descriptor()
                top = desc[0]
                if top is None:
                    if orc is None:
                        if lane.descriptor() is desc:
                            return EMPTY
                        continue
                    with orc.lock:
                        if lane.descriptor() is desc:
                            orc.on_empty()
                            return EMPTY
                    continue
                if orc is None:
                    if lane.try_pop(desc):
                        return top.value
                else:
                    with orc.lock:
                        if lane.try_pop(desc):
                            orc.on_remove(top, 0, 1, 1)
                            return top.value
        finally:
            dom.unpin(rec)

    def drain_remaining(self) -> list[Any]:
        out = []
        while True:
            value = self.pop()
            if value is EMPTY:
                return out
            out.append(value)
