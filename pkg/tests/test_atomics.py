import threading

import pytest

from elastiq.atomics import RefCell, ReclamationDomain, ReclamationError, WordCell


class Box:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v


def test_refcell_identity_semantics():
    a, b = Box(1), Box(1)
    cell = RefCell(a)
    assert cell.load() is a
    # equal-valued but distinct object must not match
    assert not cell.compare_and_swap(b, Box(2))
    assert cell.compare_and_swap(a, b)
    assert cell.load() is b


def test_wordcell_value_semantics():
    cell = WordCell(1 << 100)
    assert not cell.compare_and_swap(0, 5)
    assert cell.compare_and_swap(1 << 100, (1 << 100) + 1)
    assert cell.load() == (1 << 100) + 1


def test_wordcell_concurrent_increment_exact():
    cell = WordCell(0)
    per_thread = 2000

    def work():
        for _ in range(per_thread):
            while True:
                cur = cell.load()
                if cell.compare_and_swap(cur, cur + 1):
                    break

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert cell.load() == 4 * per_thread


def test_reclamation_respects_pinned_reader():
    dom = ReclamationDomain(debug=True)
    node = Box(1)

    entered = threading.Event()
    release = threading.Event()

    def reader():
        rec = dom.pin()
        entered.set()
        release.wait()
        dom.unpin(rec)

    t = threading.Thread(target=reader)
    t.start()
    entered.wait()

    dom.retire(node)
    for _ in range(8):
        dom._advance()
    assert dom.collect() == 0  # reader still pinned: no reclamation
    dom.check(node)

    release.set()
    t.join()
    for _ in range(8):
        dom._advance()
    assert dom.collect() == 1
    with pytest.raises(ReclamationError):
        dom.check(node)


def test_reclamation_drain_poisons_everything():
    dom = ReclamationDomain(debug=True)
    nodes = [Box(i) for i in range(10)]
    for n in nodes:
        dom.retire(n)
    dom.drain()
    assert dom.reclaimed == 10
    for n in nodes:
        with pytest.raises(ReclamationError):
            dom.check(n)


def test_release_mode_check_is_noop():
    dom = ReclamationDomain(debug=False)
    node = Box(1)
    dom.retire(node)
    dom.drain()
    dom.check(node)  # never raises outside debug mode
