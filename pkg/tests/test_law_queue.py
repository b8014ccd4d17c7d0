import collections
import random
import threading

from elastiq import EMPTY, ChainedWindowQueue, RankOracle, ReclamationDomain


class ModelLawQueue:
    """Independent sequential model of the chained-window queue.

    Lists for lanes, dicts for windows; mirrors the published scan and
    shift rules only, shares no code with the implementation.
    """

    def __init__(self, max_width, width, depth, seed):
        self.max_width = max_width
        self.target_w = width
        self.target_d = depth
        self.items = [collections.deque() for _ in range(max_width)]
        self.tail_rows = [0] * max_width
        self.chain = [{"max": depth, "depth": depth, "width": width}]
        self.cursor = 0
        self.rng = random.Random(seed)

    def set_width(self, w):
        self.target_w = max(1, min(w, self.max_width))

    def set_depth(self, d):
        self.target_d = max(1, d)

    def _shift_tail(self):
        last = self.chain[-1]
        self.chain.append({
            "max": last["max"] + self.target_d,
            "depth": self.target_d,
            "width": self.target_w,
        })

    def enqueue(self, value):
        while True:
            win = self.chain[-1]
            width = win["width"]
            j = self.cursor if self.cursor < width else self.rng.randrange(width)
            for _ in range(width):
                if self.tail_rows[j] < win["max"]:
                    row = max(win["max"] - win["depth"], self.tail_rows[j]) + 1
                    self.items[j].append((value, row))
                    self.tail_rows[j] = row
                    self.cursor = j
                    return j, row
                j = j + 1 if j + 1 < width else 0
            self._shift_tail()

    def dequeue(self):
        while True:
            win = self.chain[0]
            width = win["width"]
            j = self.cursor if self.cursor < width else self.rng.randrange(width)
            for _ in range(width):
                lane = self.items[j]
                if lane and lane[0][1] <= win["max"]:
                    self.cursor = j
                    return lane.popleft()[0]
                j = j + 1 if j + 1 < width else 0
            if len(self.chain) > 1:
                self.chain.pop(0)
                continue
            if any(self.tail_rows[i] >= win["max"] for i in range(width)):
                self._shift_tail()
                continue
            return EMPTY


def test_first_enqueue_lands_on_row_one():
    q = ChainedWindowQueue(max_width=4, width=2, depth=4)
    assert q.enqueue("v") == (0, 1)


def test_insert_row_skips_to_window_floor():
    # a fresh wider window starts lanes at its floor, leaving row gaps
    q = ChainedWindowQueue(max_width=4, width=2, depth=4, seed=0)
    for i in range(8):
        q.enqueue(i)
    q.set_width(3)
    q.enqueue(8)  # forces the shift to {max 8, depth 4, width 3}
    assert q.tail_view() == (8, 4, 3)
    lane, row = q.enqueue(9)
    while lane != 2:
        lane, row = q.enqueue(9)
    assert row == 5  # lane top was 0: max(8 - 4, 0) + 1


def test_shift_tail_reads_targets():
    q = ChainedWindowQueue(max_width=8, width=2, depth=4)
    for i in range(8):
        q.enqueue(i)
    q.set_width(3)
    q.set_depth(2)
    q.enqueue(8)
    assert q.chain_windows()[-1] == (6, 2, 3)


def test_unchanged_targets_shift_is_pure_translation():
    q = ChainedWindowQueue(max_width=8, width=2, depth=3)
    for i in range(2 * 3 + 1):
        q.enqueue(i)
    views = q.chain_windows()
    assert views[-1] == (views[-2].max + 3, 3, 2)


def test_sequential_matches_model_step_for_step():
    seed = 1234
    q = ChainedWindowQueue(max_width=16, width=4, depth=3, seed=seed)
    m = ModelLawQueue(16, 4, 3, seed=seed)
    rng = random.Random(99)
    for step in range(20_000):
        roll = rng.random()
        if roll < 0.02:
            w = rng.randrange(1, 9)
            q.set_width(w)
            m.set_width(w)
        elif roll < 0.04:
            d = rng.randrange(1, 7)
            q.set_depth(d)
            m.set_depth(d)
        elif roll < 0.55:
            assert q.enqueue(step) == m.enqueue(step), f"step {step}"
        else:
            assert q.dequeue() == m.dequeue(), f"step {step}"
    assert q.drain_remaining() == [v for v in iter(m.dequeue, EMPTY)]


def test_strict_config_behaves_like_plain_fifo():
    q = ChainedWindowQueue(max_width=4, width=1, depth=1,
                           oracle=RankOracle("fifo", track_lateness=True))
    model = collections.deque()
    rng = random.Random(7)
    for i in range(5000):
        if rng.random() < 0.5 or not model:
            q.enqueue(i)
            model.append(i)
        else:
            assert q.dequeue() == model.popleft()
    assert q.drain_remaining() == list(model)


def test_racing_tail_shifts_append_exactly_one_window():
    width, depth = 3, 4
    q = ChainedWindowQueue(max_width=8, width=width, depth=depth)
    total = 3 * 2000

    def worker(idx):
        for i in range(2000):
            q.enqueue((idx, i))

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    views = q.chain_windows()
    assert len(views) == (total - 1) // (width * depth) + 1
    for prev, cur in zip(views, views[1:]):
        assert cur.max == prev.max + cur.depth  # chain arithmetic intact
        assert prev.max < cur.max


def test_concurrent_multiset_and_per_lane_order():
    dom = ReclamationDomain(debug=True)
    q = ChainedWindowQueue(max_width=16, width=4, depth=5, domain=dom, seed=3)
    n_threads = 4
    per_thread = 4000
    inserted = [dict() for _ in range(n_threads)]
    removed = [list() for _ in range(n_threads)]

    def worker(idx):
        rng = random.Random(idx)
        for i in range(per_thread):
            if rng.random() < 0.5:
                value = idx * 1_000_000 + i
                inserted[idx][value] = q.enqueue(value)
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
    all_inserted = {}
    for d in inserted:
        all_inserted.update(d)
    all_removed = [v for r in removed for v in r] + leftovers
    assert sorted(all_removed) == sorted(all_inserted)

    # single-threaded drain sees every lane in strictly increasing rows
    by_lane = collections.defaultdict(list)
    for value in leftovers:
        lane, row = all_inserted[value]
        by_lane[lane].append(row)
    # rows of leftovers per lane arrive in drain order within each window;
    # across the whole drain each lane's rows must be increasing
    for rows in by_lane.values():
        assert rows == sorted(rows)
    dom.drain()


def test_oracle_bound_holds_under_contention():
    orc = RankOracle("fifo", track_lateness=True)
    q = ChainedWindowQueue(max_width=16, width=4, depth=3, oracle=orc, seed=11)
    barrier = threading.Barrier(3)

    def worker(idx):
        rng = random.Random(idx)
        barrier.wait()
        for i in range(5000):
            if rng.random() < 0.5:
                q.enqueue((idx, i))
            else:
                q.dequeue()

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    q.drain_remaining()
    orc.verify_drained()
    s = orc.summary()
    assert s.max_rank <= 9  # (4 - 1) * 3
    assert s.removes > 0


def test_empty_only_when_truly_empty():
    q = ChainedWindowQueue(max_width=8, width=2, depth=2)
    assert q.dequeue() is EMPTY
    q.enqueue(1)
    assert q.dequeue() == 1
    assert q.dequeue() is EMPTY
    # draining a full window leaves the structure reusable
    for i in range(10):
        q.enqueue(i)
    got = [q.dequeue() for _ in range(10)]
    assert sorted(got) == list(range(10))
    assert q.dequeue() is EMPTY
    q.enqueue(42)
    assert q.dequeue() == 42
