"""Shared relaxation targets, window views, and lane selection.

A *window* is the (max, depth, width) descriptor governing which rows and
lanes an operation may currently use: inserts go to rows up to ``max``,
removals take rows above ``min = max - depth``, both on lanes below
``width``.  The shared targets are the public elasticity knobs; window
shifts pick them up.
"""

from __future__ import annotations

import random
import threading
from typing import NamedTuple

__all__ = [
    "RelaxationTargets",
    "WindowView",
    "OpState",
    "row_valid_insert",
    "row_valid_delete",
    "next_lane",
    "HOP_CONTENTION",
    "HOP_INVALID_ROW",
]

HOP_CONTENTION = "contention"
HOP_INVALID_ROW = "invalid_row"


class RelaxationTargets:
    """Desired width/depth, written at any time, read at window shifts.

    Writes clamp to the valid ranges so shift code never validates.
    Reads and writes are single plain attribute accesses (word-atomic);
    a torn (width, depth) pair across two writes is still a valid
    configuration by design.
    """

    __slots__ = ("max_width", "min_depth", "width", "depth")

    def __init__(self, max_width: int, width: int, depth: int, min_depth: int = 1) -> None:
        if max_width < 1:
            raise ValueError("max_width must be >= 1")
        self.max_width = max_width
        self.min_depth = min_depth
        self.width = 0
        self.depth = 0
        self.set_width(width)
        self.set_depth(depth)

    def set_width(self, width: int) -> int:
        width = max(1, min(int(width), self.max_width))
        self.width = width
        return width

    def set_depth(self, depth: int) -> int:
        # capped at 2^15 - 1 so the sum of two depths fits a packed
        # 16-bit depth field
        depth = max(self.min_depth, min(int(depth), 0x7FFF))
        self.depth = depth
        return depth

    def get(self) -> tuple[int, int]:
        return self.width, self.depth


class WindowView(NamedTuple):
    """Immutable snapshot of a window descriptor."""

    max: int
    depth: int
    width: int

    @property
    def min(self) -> int:
        return self.max - self.depth


def row_valid_insert(view: WindowView, lane_row: int) -> bool:
    """True iff a lane whose top row is `lane_row` can take the next insert."""
    return lane_row < view.max


def row_valid_delete(view: WindowView, lane_row: int) -> bool:
    """True iff an item at `lane_row` is removable under `view`."""
    return lane_row > view.max - view.depth


class OpState:
    """Per-thread operation state: persistent lane cursor plus RNG."""

    __slots__ = ("lane", "rng", "hops_contention", "hops_invalid", "ctl")

    def __init__(self, seed: int | None = None) -> None:
        self.lane = 0
        self.rng = random.Random(seed)
        self.hops_contention = 0
        self.hops_invalid = 0
        self.ctl = None  # lazily created controller state


def next_lane(state: OpState, width: int, reason: str) -> int:
    """Hop the cursor to a uniformly random other lane within `width`."""
    if reason == HOP_CONTENTION:
        state.hops_contention += 1
    else:
        state.hops_invalid += 1
    if width <= 1:
        state.lane = 0
        return 0
    cur = state.lane
    if cur >= width:
        lane = state.rng.randrange(width)
    else:
        lane = state.rng.randrange(width - 1)
        if lane >= cur:
            lane += 1
    state.lane = lane
    return lane


class ThreadStates:
    """Lazily created per-thread OpState attached to one structure."""

    __slots__ = ("_tls", "_seed_lock", "_next_seed")

    def __init__(self, seed: int | None = None) -> None:
        self._tls = threading.local()
        self._seed_lock = threading.Lock()
        self._next_seed = seed

    def get(self) -> OpState:
        st = getattr(self._tls, "st", None)
        if st is None:
            with self._seed_lock:
                seed = self._next_seed
                if seed is not None:
                    self._next_seed = seed + 1
            st = OpState(seed)
            self._tls.st = st
        return st
