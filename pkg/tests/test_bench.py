import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastiq.bench import BenchConfig, plan_from_bound, run_benchmark, stack_static_bound
from elastiq.bench.cli import main
from elastiq.bench.csvio import (
    LATENCY_HEADER,
    TIMESERIES_HEADER,
    emit_csv,
    latency_rows,
    parse_csv,
    timeseries_rows,
)


def test_stack_static_bound_values():
    # s = d // 2; (2d + 2s + ((d-1)//s)*s) * (w-1)
    assert stack_static_bound(4, 4) == 42
    assert stack_static_bound(8, 6) == 147
    assert stack_static_bound(2, 2) == 7


def test_plan_from_bound_queues():
    assert plan_from_bound("law-queue", 5000, 8) == (16, 333)
    assert plan_from_bound("lpw-queue", 8, 8) == (9, 1)
    assert plan_from_bound("ms-queue", 5000, 8) == (1, 1)


def test_plan_from_bound_stack_inverts_formula():
    for k in (8, 512, 5000):
        w, d = plan_from_bound("lpw-stack", k, 8)
        assert stack_static_bound(w, d) <= k
        # maximal depth for the chosen width
        if stack_static_bound(w, d + 1) <= k:
            pytest.fail(f"depth {d} not maximal for k={k}")


@given(st.integers(1, 100_000), st.integers(1, 16))
@settings(max_examples=60)
def test_plan_from_bound_always_within_k(k, threads):
    for structure in ("law-queue", "lpw-stack"):
        w, d = plan_from_bound(structure, k, threads)
        assert 1 <= w <= 2 * threads
        if structure == "law-queue":
            assert (w - 1) * d <= k
            assert d >= 1
        else:
            assert d >= 2
            assert w == 1 or stack_static_bound(w, d) <= k


def test_config_validation():
    with pytest.raises(ValueError, match="structure"):
        BenchConfig(structure="bogus").validate()
    with pytest.raises(ValueError, match="schedule"):
        BenchConfig(duration=1.0, schedule=((2.0, 4, 4),)).validate()
    with pytest.raises(ValueError, match="producer-consumer"):
        BenchConfig(workload="producer-consumer", threads=4,
                    producers=4, consumers=4).validate()


def test_smoke_run_strict_queue_fifo_order():
    cfg = BenchConfig(structure="ms-queue", threads=1, duration=0.1,
                      prefill=64, audit=True, switch_interval=None, seed=7)
    record = run_benchmark(cfg)
    assert record.total_ops > 0
    assert record.duration_s > 0
    # single-threaded strict queue: removals come out in insertion order
    prefill_removed = [v for v in record.removed + record.leftover
                       if v >= (1 << 62)]
    assert prefill_removed == sorted(prefill_removed)
    # multiset preserved
    assert set(record.removed + record.leftover) == record.inserted


def test_run_reports_ops_consistently():
    cfg = BenchConfig(structure="law-queue", threads=2, ops_per_thread=3000,
                      prefill=256, width=4, depth=8, switch_interval=None)
    record = run_benchmark(cfg)
    assert record.total_ops == sum(record.per_thread_ops) == 6000
    assert abs(record.throughput - record.total_ops / record.duration_s) \
        < 0.01 * record.throughput


def test_schedule_applies_and_reaches_both_windows():
    cfg = BenchConfig(structure="lpw-queue", threads=2, duration=0.6,
                      prefill=1024, width=4, depth=8, audit=True,
                      schedule=((0.05, 12, 6), (0.2, 3, 4)), seed=3)
    record = run_benchmark(cfg)
    assert record.markers == [(0.05, 12, 6), (0.2, 3, 4)]
    # after the drain both windows sit at the last scheduled width
    assert record.final_head[2] == 3
    assert record.final_tail[2] == 3
    assert set(record.removed + record.leftover) == record.inserted


def test_oracle_mode_produces_samples_and_series():
    cfg = BenchConfig(structure="lpw-stack", threads=2, ops_per_thread=2000,
                      prefill=512, width=4, depth=4, mode="oracle",
                      oracle_stretch=1.0, audit=True, seed=5)
    record = run_benchmark(cfg)
    assert record.oracle is not None
    assert record.oracle.removes > 0
    assert record.oracle.violations == 0
    assert record.samples
    assert record.rank_series


def test_csv_roundtrip_numeric_fields(tmp_path):
    path = str(tmp_path / "t.csv")
    rows = [[0.025, 1000.5, None, 4, 8], [0.05, 2000.25, 1.5, 4, 8]]
    emit_csv(path, TIMESERIES_HEADER, rows, {"structure": "law-queue"})
    meta, header, parsed = parse_csv(path)
    assert meta["structure"] == "law-queue"
    assert header == TIMESERIES_HEADER
    assert parsed == rows


@given(st.lists(st.tuples(st.floats(0, 10, allow_nan=False, width=16),
                          st.integers(0, 10 ** 6)), max_size=20))
@settings(max_examples=40)
def test_csv_roundtrip_property(tmp_path_factory, pairs):
    path = str(tmp_path_factory.mktemp("csv") / "r.csv")
    rows = [[float(t), n] for t, n in pairs]
    emit_csv(path, ["t", "n"], rows)
    _, header, parsed = parse_csv(path)
    assert header == ["t", "n"]
    assert len(parsed) == len(rows)
    for (t0, n0), row in zip(rows, parsed):
        assert row[1] == n0
        assert row[0] == pytest.approx(t0, rel=1e-4, abs=1e-9)


def test_timeseries_rows_merge_series():
    cfg = BenchConfig()
    from elastiq.bench.runner import RunRecord
    record = RunRecord(config=cfg, width=4, depth=8)
    record.rate_series = [(0.025, 40000.0), (0.05, 42000.0)]
    record.rank_series = [(0.025, 3.5)]
    record.width_series = [(0.05, 8, 4)]
    rows = timeseries_rows(record)
    assert rows == [[0.025, 40000.0, 3.5, None, None],
                    [0.05, 42000.0, None, 8, 4]]


def test_latency_rows_carry_activity_level():
    cfg = BenchConfig(workload="producer-consumer", threads=6,
                      producers=4, consumers=2,
                      activity=((0.0, 1), (0.05, 4)))
    from elastiq.bench.runner import RunRecord
    record = RunRecord(config=cfg, width=4, depth=8)
    record.producer_latency = [(0.025, 12.0), (0.075, 30.0)]
    record.consumer_latency = [(0.025, 8.0)]
    rows = latency_rows(record)
    assert rows[0] == [0.025, 12.0, 8.0, None, 1]
    assert rows[1] == pytest.approx([0.075, 30.0, None, None, 4])


def test_cli_run_writes_csv(tmp_path):
    out = str(tmp_path / "run.csv")
    code = main(["run", "--structure", "law-queue", "--threads", "2",
                 "--ops-per-thread", "2000", "--prefill", "256",
                 "--width", "4", "--depth", "8", "--audit", "--out", out])
    assert code == 0
    meta, header, rows = parse_csv(out)
    assert meta["structure"] == "law-queue"
    assert header == TIMESERIES_HEADER


def test_cli_rejects_bad_config(capsys):
    code = main(["run", "--structure", "law-queue", "--duration", "-1"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_cli_pc_writes_latency_csv(tmp_path):
    out = str(tmp_path / "lat.csv")
    code = main(["pc", "--structure", "law-queue", "--producers", "3",
                 "--consumers", "1", "--duration", "0.3", "--prefill", "2048",
                 "--activity", "0:1,0.1:3", "--controller",
                 "--controller-constants", "1,75,750,5",
                 "--consumer-pace", "0.0002", "--out", out])
    assert code == 0
    meta, header, rows = parse_csv(out)
    assert header == LATENCY_HEADER
    assert rows, "latency series must not be empty"
