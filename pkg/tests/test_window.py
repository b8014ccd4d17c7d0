from collections import Counter

from hypothesis import given
from hypothesis import strategies as st

from elastiq.window import (
    HOP_CONTENTION,
    HOP_INVALID_ROW,
    OpState,
    RelaxationTargets,
    ThreadStates,
    WindowView,
    next_lane,
    row_valid_insert,
    row_valid_delete,
)


def test_row_validity_examples():
    assert row_valid_insert(WindowView(10, 4, 4), 9)
    assert not row_valid_insert(WindowView(10, 4, 4), 10)
    assert row_valid_delete(WindowView(10, 4, 4), 7)  # min = 6
    assert not row_valid_delete(WindowView(10, 4, 4), 6)


def test_row_validity_brute_force():
    # insert valid iff the next row (lane_row + 1) fits at or below max;
    # delete valid iff the row lies above min
    for wmax in range(1, 9):
        for depth in range(1, wmax + 1):
            view = WindowView(wmax, depth, 4)
            for row in range(0, 9):
                assert row_valid_insert(view, row) == (row + 1 <= wmax)
                assert row_valid_delete(view, row) == (row > wmax - depth)


def test_next_lane_width_one_pins_to_zero():
    st_ = OpState(seed=7)
    st_.lane = 3
    assert next_lane(st_, 1, HOP_CONTENTION) == 0
    assert st_.lane == 0


def test_next_lane_never_returns_current_and_is_uniform():
    st_ = OpState(seed=42)
    width = 8
    hops = 100_000
    counts = Counter()
    for _ in range(hops):
        cur = st_.lane
        lane = next_lane(st_, width, HOP_CONTENTION)
        assert lane != cur
        counts[lane] += 1
    expected = hops / width
    for lane in range(width):
        assert abs(counts[lane] - expected) / expected < 0.05
    assert st_.hops_contention == hops


def test_next_lane_handles_cursor_beyond_width():
    st_ = OpState(seed=3)
    st_.lane = 12
    lane = next_lane(st_, 4, HOP_INVALID_ROW)
    assert 0 <= lane < 4
    assert st_.hops_invalid == 1


@given(st.integers(-10, 10_000), st.integers(-10, 10_000))
def test_targets_always_clamped(w, d):
    targets = RelaxationTargets(max_width=256, width=8, depth=8)
    targets.set_width(w)
    targets.set_depth(d)
    width, depth = targets.get()
    assert 1 <= width <= 256
    assert depth >= 1


def test_targets_min_depth_floor():
    targets = RelaxationTargets(max_width=16, width=4, depth=1, min_depth=2)
    assert targets.get() == (4, 2)
    targets.set_depth(1)
    assert targets.depth == 2


def test_thread_states_are_per_thread():
    import threading

    states = ThreadStates(seed=1)
    mine = states.get()
    assert states.get() is mine
    other = []
    t = threading.Thread(target=lambda: other.append(states.get()))
    t.start()
    t.join()
    assert other[0] is not mine
