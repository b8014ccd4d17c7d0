"""Elastic LIFO stack with a single window sliding up and down.

One packed window word carries the row range plus two widths: pushes use
``push_width`` (the desired shared width), pops use ``pop_width`` (wide
enough to reach every row the window spans, per the width-bound stack).
The window shifts by half its depth in either direction.  Because the
window is not monotone, the side structure of (row, width) bounds must be
restored to consistency -- lowered, pruned, and extended -- by a
two-phase stabilize step before every shift.
"""

from __future__ import annotations

from typing import Any, NamedTuple

from .atomics import RefCell, ReclamationDomain, WordCell
from .controller import ControllerConfig, ControllerState, controller_update
from .lanes import EMPTY, StackNode, SubStack
from .oracle import RankOracle
from .window import HOP_CONTENTION, RelaxationTargets, ThreadStates, next_lane

__all__ = ["SlidingWindowStack", "StackView", "UP", "DOWN",
           "pack_window", "unpack_window"]

UP = 0
DOWN = 1

_M16 = 0xFFFF
_M31 = 0x7FFFFFFF
_M32 = 0xFFFFFFFF


class StackView(NamedTuple):
    max: int
    depth: int
    push_width: int
    pop_width: int
    last_push_width: int
    last_shift: int
    version: int

    @property
    def min(self) -> int:
        return self.max - self.depth


# Packed layout (low to high):
#   max:32 | depth:16 | push_width:16 | pop_width:16 | last_push_width:16
#   | last_shift:1 | version:31

def pack_window(max_row: int, depth: int, push_width: int, pop_width: int,
                last_push_width: int, last_shift: int, version: int) -> int:
    return (
        (max_row & _M32)
        | ((depth & _M16) << 32)
        | ((push_width & _M16) << 48)
        | ((pop_width & _M16) << 64)
        | ((last_push_width & _M16) << 80)
        | ((last_shift & 1) << 96)
        | ((version & _M31) << 97)
    )


def unpack_window(word: int) -> StackView:
    return StackView(
        word & _M32,
        (word >> 32) & _M16,
        (word >> 48) & _M16,
        (word >> 64) & _M16,
        (word >> 80) & _M16,
        (word >> 96) & 1,
        (word >> 97) & _M31,
    )


class _BoundNode:
    """Rows at or below `row` (down to the next node) have width <= `width`."""

    __slots__ = ("next", "row", "width")

    def __init__(self, row: int, width: int,
                 nxt: "_BoundNode | None" = None) -> None:
        self.next = nxt
        self.row = row
        self.width = width


class SlidingWindowStack:
    """k-out-of-order LIFO stack with run-time adjustable window size.

    Every popped item x deviates from strict LIFO order by at most
    (W - 1) * (3 * D - 1), where W and D are the maximum push width and
    depth of any window live during x's residency.
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
        static_check: bool = False,
        lemma_scan_every: int = 1,
    ) -> None:
        if max_width > _M16:
            raise ValueError("max_width exceeds the packed width field")
        # depth 1 would make the half-depth shift zero; floor it at 2
        self.targets = RelaxationTargets(max_width, width, depth, min_depth=2)
        self.domain = domain if domain is not None else ReclamationDomain()
        lane_domain = self.domain if self.domain.debug else None
        self._lanes = tuple(SubStack(lane_domain) for _ in range(max_width))
        w0, d0 = self.targets.get()
        word0 = pack_window(d0, d0, w0, w0, w0, UP, 0)
        self._win = WordCell(word0)
        # one-slot decode cache: the window word changes only at shifts
        self._win_seen = (word0, unpack_window(word0))
        self._bounds = RefCell((_BoundNode(0, 0), 0))
        self._states = ThreadStates(seed)
        self._ctl_cfg = controller
        self._oracle = oracle
        self._static_check = static_check
        self._lemma_scan_every = max(1, lemma_scan_every)
        self._shift_count = 0
        if oracle is not None:
            # per published window: widths/depth plus how far the window
            # boundaries dropped in the transition that installed it
            oracle.window_log.append((w0, d0, 0, 0))

    # -- public knobs ------------------------------------------------------

    def set_width(self, width: int) -> int:
        return self.targets.set_width(width)

    def set_depth(self, depth: int) -> int:
        return self.targets.set_depth(depth)

    def get_targets(self) -> tuple[int, int]:
        return self.targets.get()

    def _decoded(self, word: int) -> StackView:
        seen = self._win_seen
        if seen[0] == word:
            return seen[1]
        view = unpack_window(word)
        self._win_seen = (word, view)
        return view

    def window_view(self) -> StackView:
        return self._decoded(self._win.load())

    def hop_stats(self) -> tuple[int, int]:
        st = self._states.get()
        return st.hops_contention, st.hops_invalid

    # -- width-bound stack ---------------------------------------------------

    def _bound_width(self, top: _BoundNode, row: int) -> int:
        """Largest recorded width bound for rows above `row`; 0 if none."""
        best = 0
        node = top
        while node is not None and node.row > row:
            if node.width > best:
                best = node.width
            node = node.next
        return best

    def _lowered(self, top: _BoundNode, win: StackView) -> _BoundNode:
        """Phase 1: clone-and-lower bound nodes above the window floor.

        Nodes whose width fits in push_width lose their meaning inside
        the window (new pushes may exceed them) and drop to the floor;
        nodes wider than last_push_width can drop to the previous floor
        after a downward shift.  A node lowered onto its neighbour is
        pruned.  Untouched tails are shared, not cloned.
        """
        wmin = win.min
        chain = []
        node = top
        while node.row > wmin:
            chain.append(node)
            node = node.next
        if not chain:
            return top
        pw = win.push_width
        lpw = win.last_push_width
        went_down = win.last_shift == DOWN
        prev_floor = win.max - win.depth // 2
        nxt = node
        for i in range(len(chain) - 1, -1, -1):
            node = chain[i]
            row = node.row
            if node.width <= pw:
                row = wmin
            elif node.width > lpw and went_down and prev_floor < row:
                row = prev_floor
            if row <= node.next.row:
                continue  # subsumed by the node below
            if row == node.row and nxt is node.next:
                nxt = node
            else:
                nxt = _BoundNode(row, node.width, nxt)
        return nxt

    def _stabilize(self, win: StackView, win_word: int) -> None:
        """Restore width-bound consistency for `win`; at most one
        stabilization can take effect per window version."""
        snap = self._bounds.load()
        if self._win.load() != win_word or snap[1] == win.version:
            return
        top = snap[0]
        new_top = self._lowered(top, win)
        pw = win.push_width
        lpw = win.last_push_width
        if pw > lpw:
            # width grew: remember that rows at the floor and below are
            # narrower, so pop_width can tighten when width shrinks later
            if new_top.row < win.min:
                new_top = _BoundNode(win.min, lpw, new_top)
        elif pw < lpw:
            # width shrank: bound the highest rows that might hold items
            # outside the new width
            upper = win.max
            for j in range(pw, lpw):
                row = self._lanes[j].top_row()
                if row > upper:
                    upper = row
            if new_top.row < upper:
                new_top = _BoundNode(upper, lpw, new_top)
        if new_top is top:
            return
        new_snap = (new_top, win.version)
        orc = self._oracle
        if orc is None:
            self._bounds.compare_and_swap(snap, new_snap)
        else:
            with orc.lock:
                self._bounds.compare_and_swap(snap, new_snap)

    # -- window shift ----------------------------------------------------------

    def _shift(self, direction: int, old_word: int) -> bool:
        old = unpack_window(old_word)
        self._stabilize(old, old_word)
        w, d = self.targets.get()
        amount = d // 2
        if direction == UP:
            new_max = old.max + amount
        else:
            new_max = old.max - old.depth + amount
        if new_max < d:
            new_max = d  # keep the floor at row 0
        pop_w = self._bound_width(self._bounds.load()[0], new_max - d)
        if w > pop_w:
            pop_w = w
        if old.push_width > pop_w:
            # the bound node for a width decrease is only published one
            # shift later; until then the outgoing width itself bounds the
            # rows this window spans
            pop_w = old.push_width
        new_word = pack_window(new_max, d, w, pop_w, old.push_width,
                               direction, (old.version + 1) & _M31)
        orc = self._oracle
        if orc is None:
            return self._win.compare_and_swap(old_word, new_word)
        with orc.lock:
            if self._win.load() != old_word:
                return False
            self._shift_count += 1
            if self._shift_count % self._lemma_scan_every == 0:
                self._check_bound_consistency(orc, old)
            ok = self._win.compare_and_swap(old_word, new_word)
            orc.check(ok, "shift-serialization",
                      "window word changed inside the serialized region")
            max_drop = old.max - new_max if old.max > new_max else 0
            new_min = new_max - d
            min_drop = old.min - new_min if old.min > new_min else 0
            orc.window_log.append((w, d, max_drop, min_drop))
            if self._static_check:
                self._check_lane_envelope(orc, unpack_window(new_word))
            return ok

    def _check_bound_consistency(self, orc: RankOracle, win: StackView) -> None:
        """Pre-shift consistency: each resident item's row has a width
        bound covering its lane index."""
        top = self._bounds.load()[0]
        ranges = []  # node bounds rows (next.row, row] with its width
        node = top
        while node.row > 0:
            ranges.append((node.next.row, node.row, node.width))
            node = node.next

        def bound_for(row: int) -> int:
            for low, high, width in ranges:
                if low < row <= high:
                    return width
            return win.push_width

        for j, lane in enumerate(self._lanes):
            node = lane.descriptor()[0]
            while node is not None:
                width = bound_for(node.row)
                orc.check(width >= j + 1, "width-bound-consistency",
                          f"row {node.row} in lane {j} bounded by {width}")
                node = node.below

    def _check_lane_envelope(self, orc: RankOracle, win: StackView) -> None:
        """Static configuration: lane tops sit in one of the two
        half-shift envelopes around the window.

        Row tags are not item counts here: a push from a lane resting
        below the floor skips rows, and popping back to such a gap lands
        the top one gap (at most one shift) below the count-based
        envelope.  The low side therefore carries 2*shift of slack.
        """
        shift = win.depth // 2
        wmin = win.min
        rows = [self._lanes[j].top_row() for j in range(win.push_width)]
        low_ok = all(wmin - 2 * shift <= r <= win.max for r in rows)
        high_ok = all(wmin <= r <= win.max + shift for r in rows)
        orc.check(low_ok or high_ok, "lane-envelope",
                  f"lane rows {rows} outside both envelopes of "
                  f"[{wmin}, {win.max}] (shift {shift})")

    # -- linearized lane steps ----------------------------------------------

    def _push_linearized(self, lane: SubStack, desc: tuple,
                         node: StackNode, word: int) -> bool | None:
        """Single push attempt; None means the window moved (not contention).

        The row and lane were computed against `word`, so the exchange is
        only taken while that window is still current: a later window may
        use a different width regime under which they would be invalid.
        """
        orc = self._oracle
        if orc is None:
            if self._win.load() != word:
                return None
            return lane.try_push(desc, node)
        with orc.lock:
            if self._win.load() != word:
                return None
            ok = lane.try_push(desc, node)
            if ok:
                win = unpack_window(word)
                node.hist_idx = len(orc.window_log.entries) - 1
                node.push_min = win.min
                node.push_seq = orc.push_log.append((node.row,))
                orc.on_insert(node)
        return ok

    def _pop_linearized(self, lane: SubStack, desc: tuple, word: int):
        orc = self._oracle
        top = desc[0]
        if orc is None:
            if self._win.load() != word:
                return None, None
            if lane.try_pop(desc):
                return True, top.value
            return False, None
        with orc.lock:
            if self._win.load() != word:
                return None, None
            if not lane.try_pop(desc):
                return False, None
            win = unpack_window(word)
            log = orc.window_log
            max_w, max_d, _, _ = log.suffix_max(top.hist_idx)
            bound = (max_w - 1) * (3 * max_d - 1)
            # row envelopes: a resident item's lane blocks window descent,
            # so boundaries can outrun it by at most one transition's drop
            if len(log.entries) > top.hist_idx + 1:
                _, _, drop_max, drop_min = log.suffix_max(top.hist_idx + 1)
            else:
                drop_max = drop_min = 0
            if len(orc.push_log.entries) > top.push_seq + 1:
                lowest = orc.push_log.suffix_min(top.push_seq + 1)[0]
                orc.check(lowest >= top.push_min - drop_min,
                          "resident-row-floor",
                          f"row {lowest} pushed below floor "
                          f"{top.push_min - drop_min}")
            if self._lemma_scan_every == 1 or \
                    top.push_seq % self._lemma_scan_every == 0:
                ceiling = win.max + drop_max
                shadow = orc.shadow
                for i in range(len(shadow) - 1, -1, -1):
                    other = shadow[i]
                    if other.push_seq <= top.push_seq:
                        break
                    orc.check(other.row <= ceiling, "resident-row-ceiling",
                              f"row {other.row} resident above ceiling "
                              f"{ceiling}")
            rank = orc.on_remove(top, bound, max_w, max_d)
            if self._static_check:
                sw = win.push_width
                sd = win.depth
                s = sd // 2
                static_bound = (2 * sd + 2 * s + ((sd - 1) // s) * s) * (sw - 1)
                orc.check(rank <= static_bound, "static-rank-bound",
                          f"rank {rank} exceeds static bound {static_bound}")
            return True, top.value

    # -- operations ----------------------------------------------------------

    def push(self, value: Any) -> tuple[int, int]:
        """Insert `value`; returns the (lane, row) it landed at."""
        st = self._states.get()
        ctl = self._ctl_cfg
        dom = self.domain
        rec = dom.pin()
        try:
            while True:
                word = self._win.load()
                win = self._decoded(word)
                width = win.push_width
                wmax = win.max
                wmin = win.min
                j = st.lane if st.lane < width else st.rng.randrange(width)
                for _ in range(width):
                    lane = self._lanes[j]
                    desc = lane.descriptor()
                    top_row = desc[1]
                    if top_row < wmax:
                        row = (wmin if wmin > top_row else top_row) + 1
                        node = StackNode(value, row)
                        ok = self._push_linearized(lane, desc, node, word)
                        if ok is None:
                            break  # window moved: re-read, not contention
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
                    self._shift(UP, word)
        finally:
            dom.unpin(rec)

    def pop(self) -> Any:
        """Remove a value from the window, or EMPTY."""
        st = self._states.get()
        ctl = self._ctl_cfg
        dom = self.domain
        rec = dom.pin()
        try:
            while True:
                word = self._win.load()
                win = self._decoded(word)
                width = win.pop_width
                wmin = win.min
                j = st.lane if st.lane < width else st.rng.randrange(width)
                for _ in range(width):
                    lane = self._lanes[j]
                    desc = lane.descriptor()
                    if desc[1] > wmin:
                        ok, value = self._pop_linearized(lane, desc, word)
                        if ok is None:
                            break  # window moved: re-read, not contention
                        if ctl is not None:
                            self._feed_controller(st, ok, win)
                        if ok:
                            st.lane = j
                            return value
                        j = next_lane(st, width, HOP_CONTENTION)
                        break
                    st.hops_invalid += 1
                    j = j + 1 if j + 1 < width else 0
                else:
                    if wmin > 0:
                        self._shift(DOWN, word)
                        continue
                    if self._collect_empty(word, width):
                        return EMPTY
        finally:
            dom.unpin(rec)

    def _collect_empty(self, word: int, width: int) -> bool:
        orc = self._oracle
        if orc is None:
            return self._double_collect(word, width)
        with orc.lock:
            if self._double_collect(word, width):
                orc.on_empty()
                return True
            return False

    def _double_collect(self, word: int, width: int) -> bool:
        if self._win.load() != word:
            return False
        snap = []
        for j in range(width):
            desc = self._lanes[j].descriptor()
            if desc[0] is not None:
                return False
            snap.append(desc)
        if self._win.load() != word:
            return False
        for j in range(width):
            if self._lanes[j].descriptor() is not snap[j]:
                return False
        return True

    def _feed_controller(self, st, ok: bool, win: StackView) -> None:
        ctl_state = st.ctl
        if ctl_state is None:
            ctl_state = st.ctl = ControllerState()
        controller_update(ctl_state, ok, win.version, win.push_width,
                          self.targets, self._ctl_cfg)

    # -- audits ----------------------------------------------------------------

    def drain_remaining(self) -> list[Any]:
        out = []
        while True:
            value = self.pop()
            if value is EMPTY:
                return out
            out.append(value)

    def bound_nodes(self) -> list[tuple[int, int]]:
        """Snapshot of the width-bound stack, top down (test audit)."""
        out = []
        node = self._bounds.load()[0]
        while node is not None and node.row > 0:
            out.append((node.row, node.width))
            node = node.next
        return out
