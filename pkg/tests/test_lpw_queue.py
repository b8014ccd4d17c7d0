import collections
import random
import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from elastiq import EMPTY, OracleViolation, RankOracle, SplitWindowQueue
from elastiq.lpw_queue import pack_head, pack_tail, unpack_head, unpack_tail


@given(st.integers(0, (1 << 64) - 1), st.integers(0, 0xFFFF),
       st.integers(0, 0xFFFF), st.integers(0, 0xFFFF))
def test_tail_word_roundtrip(max_row, depth, width, next_width):
    view = unpack_tail(pack_tail(max_row, depth, width, next_width))
    assert view == (max_row, depth, width, next_width)


@given(st.integers(0, (1 << 64) - 1), st.integers(0, 0xFFFF),
       st.integers(0, 0xFFFF))
def test_head_word_roundtrip(max_row, depth, width):
    view = unpack_head(pack_head(max_row, depth, width))
    assert view == (max_row, depth, width)


def fill_window(q, tag=0):
    """Enqueue exactly one tail window's worth of items."""
    view = q.tail_view()
    for i in range(view.width * view.depth):
        q.enqueue((tag, i))


def test_shift_delays_width_by_one_window():
    q = SplitWindowQueue(max_width=16, width=4, depth=5, seed=0)
    assert q.tail_view() == (5, 5, 4, 4)
    q.set_width(6)
    fill_window(q)
    q.enqueue("spill-1")  # triggers the first shift
    assert q.tail_view() == (10, 5, 4, 6)  # width unchanged, staged in next
    assert q.log_marks() == []
    for i in range(4 * 5 - 1):
        q.enqueue(("fill", i))
    q.enqueue("spill-2")  # second shift activates width 6
    assert q.tail_view() == (15, 5, 6, 6)
    assert q.log_marks() == [(11, 6)]  # first row of the wider region


def test_width_oscillation_leaves_two_marks():
    q = SplitWindowQueue(max_width=16, width=4, depth=2, seed=0)
    q.set_width(6)
    fill_window(q)
    q.enqueue("a")  # shift 1: stage 6
    q.set_width(4)
    for i in range(4 * 2 - 1):
        q.enqueue(i)
    q.enqueue("b")  # shift 2: activate 6, stage 4, mark row 5
    assert q.tail_view() == (6, 2, 6, 4)
    for i in range(6 * 2 - 1):
        q.enqueue(i)
    q.enqueue("c")  # shift 3: activate 4, mark row 7
    assert q.tail_view() == (8, 2, 4, 4)
    assert q.log_marks() == [(5, 6), (7, 4)]


def test_head_shift_plain_advance():
    q = SplitWindowQueue(max_width=16, width=4, depth=5)
    q._tail.store(pack_tail(20, 5, 4, 4))
    q._head.store(pack_head(10, 5, 4))
    q.targets.set_depth(3)
    assert q._shift_head(q._head.load())
    assert q.head_view() == (13, 3, 4)


def test_head_shift_adopts_width_at_boundary():
    q = SplitWindowQueue(max_width=16, width=4, depth=5)
    q._tail.store(pack_tail(20, 5, 4, 4))
    q._head.store(pack_head(10, 5, 4))
    q.targets.set_depth(3)
    sentinel = q._log_head.load()
    mark = type(sentinel)(11, 6)
    assert q._log_append(sentinel, mark)
    assert q._shift_head(q._head.load())
    assert q.head_view() == (13, 3, 6)


def test_head_shift_stops_below_pending_mark():
    q = SplitWindowQueue(max_width=16, width=4, depth=5)
    q._tail.store(pack_tail(20, 5, 4, 4))
    q._head.store(pack_head(10, 5, 4))
    q.targets.set_depth(5)
    sentinel = q._log_head.load()
    mark = type(sentinel)(14, 6)
    assert q._log_append(sentinel, mark)
    assert q._shift_head(q._head.load())
    assert q.head_view() == (13, 3, 4)  # capped one row below the mark


def test_head_never_passes_tail():
    q = SplitWindowQueue(max_width=8, width=2, depth=4, seed=1)
    for i in range(16):
        q.enqueue(i)
    got = []
    while True:
        v = q.dequeue()
        if v is EMPTY:
            break
        got.append(v)
        assert q.head_view().max <= q.tail_view().max
    assert sorted(got) == list(range(16))


def test_strict_config_matches_plain_fifo():
    orc = RankOracle("fifo")
    q = SplitWindowQueue(max_width=4, width=1, depth=1, oracle=orc)
    model = collections.deque()
    rng = random.Random(21)
    for i in range(5000):
        if rng.random() < 0.5 or not model:
            q.enqueue(i)
            model.append(i)
        else:
            assert q.dequeue() == model.popleft()
    assert q.drain_remaining() == list(model)
    orc.verify_drained()
    assert orc.summary().max_rank == 0


def test_oracle_bound_with_mid_run_depth_changes(contended):
    orc = RankOracle("fifo")
    q = SplitWindowQueue(max_width=16, width=4, depth=5, oracle=orc, seed=5)
    stop = threading.Event()

    def tuner():
        rng = random.Random(17)
        while not stop.is_set():
            q.set_depth(rng.choice((2, 3, 5, 8)))
            stop.wait(0.002)

    def worker(idx):
        rng = random.Random(idx)
        for i in range(4000):
            if rng.random() < 0.5:
                q.enqueue((idx, i))
            else:
                q.dequeue()

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(4)]
    tuning = threading.Thread(target=tuner)
    tuning.start()
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    stop.set()
    tuning.join()
    q.drain_remaining()
    orc.verify_drained()
    assert orc.summary().removes > 0


def test_skipping_width_sync_is_detected_by_oracle():
    # mutation: suppress the width-change log and the head never learns
    # the tail widened, so draining "finishes" with resident items
    orc = RankOracle("fifo")
    q = SplitWindowQueue(max_width=8, width=2, depth=2, oracle=orc, seed=0)
    q._sync_tail = lambda view: None
    q.set_width(4)
    fill_window(q)
    q.enqueue("spill-1")
    for i in range(2 * 2 - 1):
        q.enqueue(i)
    q.enqueue("spill-2")  # width 4 becomes active, unannounced
    fill_window(q, tag=1)
    with pytest.raises(OracleViolation):
        q.drain_remaining()


def test_concurrent_multiset_preservation(contended):
    q = SplitWindowQueue(max_width=16, width=4, depth=6, seed=9)
    n_threads = 4
    per_thread = 3000
    inserted = [set() for _ in range(n_threads)]
    removed = [list() for _ in range(n_threads)]

    def worker(idx):
        rng = random.Random(100 + idx)
        for i in range(per_thread):
            if rng.random() < 0.5:
                value = idx * 1_000_000 + i
                inserted[idx].add(value)
                q.enqueue(value)
            else:
                value = q.dequeue()
                if value is not EMPTY:
                    removed[idx].append(value)

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(n_threads)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    leftovers = q.drain_remaining()
    all_inserted = set().union(*inserted)
    all_removed = [v for r in removed for v in r] + leftovers
    assert len(all_removed) == len(set(all_removed))
    assert set(all_removed) == all_inserted
