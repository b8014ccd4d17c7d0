"""Command-line benchmark harness.

Three subcommands cover the desk-scale experiments:

  run    one configuration -> timeseries CSV (+ rank samples in oracle mode)
  sweep  structures x threads x rank bounds, repeated -> scaling CSV
  pc     producer-consumer step workload -> latency CSV

Exit status: 0 when the run completed and every enabled assertion held,
1 on an oracle violation or failed audit, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import statistics
import sys

from ..oracle import OracleViolation, write_samples_csv
from .config import STRUCTURES, BenchConfig
from .csvio import (
    LATENCY_HEADER,
    SCALING_HEADER,
    TIMESERIES_HEADER,
    config_meta,
    emit_csv,
    latency_rows,
    timeseries_rows,
)
from .runner import run_benchmark

__all__ = ["main", "build_parser"]


def _parse_schedule(text: str):
    out = []
    for part in text.split(","):
        t, w, d = part.split(":")
        out.append((float(t), int(w), int(d)))
    return tuple(out)


def _parse_activity(text: str):
    out = []
    for part in text.split(","):
        t, n = part.split(":")
        out.append((float(t), int(n)))
    return tuple(out)


def _parse_constants(text: str):
    vals = tuple(int(v) for v in text.split(","))
    if len(vals) != 4:
        raise ValueError("expected SUCC_INC,FAIL_DEC,CONT_THRESHOLD,WIDTH_DIFF")
    return vals


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--structure", default="law-queue", choices=STRUCTURES)
    p.add_argument("--threads", type=int, default=8)
    p.add_argument("--duration", type=float, default=1.0, help="seconds")
    p.add_argument("--prefill", type=int, default=2 ** 15)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--rank-bound", type=int, default=None, metavar="K",
                   help="derive width/depth from a target rank-error bound")
    p.add_argument("--max-width", type=int, default=256)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--mode", choices=("throughput", "oracle"),
                   default="throughput")
    p.add_argument("--schedule", type=_parse_schedule, default=(),
                   metavar="T:W:D[,T:W:D...]",
                   help="width/depth changes at time offsets")
    p.add_argument("--controller", action="store_true",
                   help="enable the contention controller")
    p.add_argument("--controller-constants", type=_parse_constants,
                   default=(1, 75, 5000, 5), metavar="I,D,T,W")
    p.add_argument("--switch-interval", type=float, default=1e-5,
                   help="interpreter thread switch interval (0 keeps default)")
    p.add_argument("--ops-per-thread", type=int, default=None,
                   help="stop after a fixed op count instead of a duration")
    p.add_argument("--stretch", type=float, default=None, dest="oracle_stretch",
                   help="oracle run duration multiplier (default: paper ratio)")
    p.add_argument("--pin", choices=("roundrobin", "none"), default=None,
                   help="thread pinning strategy (or ELASTIQ_PIN env var)")
    p.add_argument("--audit", action="store_true",
                   help="track and verify the full multiset of items")
    p.add_argument("--lemma-scan-every", type=int, default=1)
    p.add_argument("--static-check", action="store_true",
                   help="assert the static stack envelope and bound")


def _cfg_from_args(args, **overrides) -> BenchConfig:
    fields = dict(
        structure=args.structure,
        threads=args.threads,
        duration=args.duration,
        prefill=args.prefill,
        width=args.width,
        depth=args.depth,
        rank_bound=args.rank_bound,
        max_width=args.max_width,
        schedule=args.schedule,
        seed=args.seed,
        mode=args.mode,
        controller=args.controller,
        controller_constants=args.controller_constants,
        switch_interval=args.switch_interval or None,
        ops_per_thread=args.ops_per_thread,
        oracle_stretch=args.oracle_stretch,
        pin=args.pin,
        audit=args.audit,
        lemma_scan_every=args.lemma_scan_every,
        static_check=args.static_check,
    )
    fields.update(overrides)
    return BenchConfig(**fields)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elastiq-bench",
        description="benchmarks for the elastic relaxed queues and stacks")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="single run -> timeseries CSV")
    _add_common(run)
    run.add_argument("--out", default=None, help="timeseries CSV path")
    run.add_argument("--samples-out", default=None,
                     help="per-operation rank sample CSV (oracle mode)")

    sweep = sub.add_parser("sweep", help="scaling grid -> scaling CSV")
    _add_common(sweep)
    sweep.add_argument("--structures", default=None,
                       help="comma list (defaults to --structure)")
    sweep.add_argument("--threads-list", default=None,
                       help="comma list of thread counts")
    sweep.add_argument("--bounds", default=None,
                       help="comma list of rank bounds K")
    sweep.add_argument("--reps", type=int, default=5)
    sweep.add_argument("--out", required=True)

    pc = sub.add_parser("pc", help="producer-consumer workload -> latency CSV")
    _add_common(pc)
    pc.add_argument("--producers", type=int, required=True)
    pc.add_argument("--consumers", type=int, required=True)
    pc.add_argument("--activity", type=_parse_activity, default=(),
                    metavar="T:N[,T:N...]",
                    help="active producer count at time offsets")
    pc.add_argument("--consumer-pace", type=float, default=0.0,
                    help="seconds a consumer idles after each removal")
    pc.add_argument("--out", default=None, help="latency CSV path")
    return parser


def _audit_ok(record) -> bool:
    if record.inserted is None:
        return True
    removed_all = list(record.removed) + list(record.leftover)
    ok = len(removed_all) == len(set(removed_all)) \
        and set(removed_all) == record.inserted
    if not ok:
        missing = len(record.inserted) - len(set(removed_all) & record.inserted)
        print(f"AUDIT FAILED: {missing} items lost, "
              f"{len(removed_all) - len(set(removed_all))} duplicated",
              file=sys.stderr)
    return ok


def _cmd_run(args) -> int:
    cfg = _cfg_from_args(args)
    record = run_benchmark(cfg)
    print(f"{cfg.structure}: {record.total_ops} ops in "
          f"{record.duration_s:.3f}s = {record.throughput:,.0f} ops/s "
          f"(window {record.width}x{record.depth})")
    if record.oracle is not None:
        print(f"rank error: mean {record.oracle.mean_rank:.2f} "
              f"max {record.oracle.max_rank} "
              f"(largest applied bound {record.oracle.max_bound})")
    if args.out:
        emit_csv(args.out, TIMESERIES_HEADER, timeseries_rows(record),
                 config_meta(cfg, record))
        print(f"wrote {args.out}")
    if args.samples_out and record.samples:
        write_samples_csv(record.samples, args.samples_out,
                          config_meta(cfg, record))
        print(f"wrote {args.samples_out}")
    return 0 if _audit_ok(record) else 1


def _cmd_sweep(args) -> int:
    structures = (args.structures.split(",") if args.structures
                  else [args.structure])
    threads_list = ([int(v) for v in args.threads_list.split(",")]
                    if args.threads_list else [args.threads])
    bounds = ([int(v) for v in args.bounds.split(",")]
              if args.bounds else [args.rank_bound or 0])
    rows = []
    for structure in structures:
        for threads in threads_list:
            for k in bounds:
                per_rep = []
                for rep in range(args.reps):
                    cfg = _cfg_from_args(
                        args, structure=structure, threads=threads,
                        rank_bound=k if k > 0 else None,
                        seed=args.seed + rep)
                    record = run_benchmark(cfg)
                    summary = record.oracle
                    rows.append([structure, threads, k, rep,
                                 record.throughput,
                                 summary.mean_rank if summary else None,
                                 summary.max_rank if summary else None])
                    per_rep.append(record.throughput)
                mean = statistics.fmean(per_rep)
                sd = statistics.pstdev(per_rep) if len(per_rep) > 1 else 0.0
                print(f"{structure} threads={threads} k={k}: "
                      f"{mean:,.0f} ops/s (sd {sd:,.0f})")
    emit_csv(args.out, SCALING_HEADER, rows, {
        "kind": "scaling", "reps": args.reps, "mode": args.mode,
        "prefill": args.prefill, "duration": args.duration,
    })
    print(f"wrote {args.out}")
    return 0


def _cmd_pc(args) -> int:
    cfg = _cfg_from_args(args, workload="producer-consumer",
                         producers=args.producers, consumers=args.consumers,
                         activity=args.activity,
                         consumer_pace_s=args.consumer_pace,
                         threads=args.producers + args.consumers)
    record = run_benchmark(cfg)
    print(f"{cfg.structure} producers={args.producers} "
          f"consumers={args.consumers}: {record.total_ops} ops, "
          f"final width target {record.config and record.final_tail}")
    if args.out:
        emit_csv(args.out, LATENCY_HEADER, latency_rows(record),
                 config_meta(cfg, record))
        print(f"wrote {args.out}")
    return 0 if _audit_ok(record) else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            code = _cmd_run(args)
        elif args.command == "sweep":
            code = _cmd_sweep(args)
        else:
            code = _cmd_pc(args)
    except OracleViolation as exc:
        print(f"ORACLE VIOLATION: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
