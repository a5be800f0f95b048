"""Command line front end.

Subcommands:
  verify      sweep a range of even n and emit the record stream
  edge-cases  list all equality cases up to a bound
  stats       first-witness-index distribution up to a bound
  goldbach    decompose one even n into two primes, with trace
  lemma       run the constructive step for one (n, k) instance
  selftest    cross-check the engine against brute-force reference code

Exit codes:
  0  success (including a clean sweep, and a requested early stop)
  1  internal failure or failed selftest
  2  bad arguments, mismatched checkpoint, or invalid configuration
  3  prime table too small for the request
  4  I/O failure (unreadable cache, unwritable output, ...)
  5  counterexample candidate found
  6  unit anomaly found (some n - p_i equal to 1)

Record streams go to --output (default stdout) and never contain timing,
so byte-identical reruns are expected; measurements land on stderr.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
import time

from . import __version__
from .bruteforce import BruteOracle, trial_largest_factor, trial_smallest_factor
from .conjecture import (
    construct_lemma_prime,
    evaluate_instance,
    goldbach_decompose,
    make_instance,
    OutcomeKind,
)
from .errors import (
    AnomalyFoundError,
    CacheFormatError,
    CheckpointMismatchError,
    ConfigurationError,
    CounterexampleFoundError,
    CoverageError,
    EngineError,
    GoldbachCounterexampleError,
    PreconditionError,
    ReportWriteError,
    SweepInterrupted,
)
from .report import (
    FORMATS,
    NDJSON,
    RunManifest,
    emit_records,
    render_edge_cases,
    render_proof_trace,
    render_stats,
    summary_digest,
)
from .search import (
    DEFAULT_BLOCK_EVENS,
    RangeJob,
    enumerate_edge_cases,
    verify_range,
    witness_statistics,
)
from .sieve import build_table, load_or_build

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_COVERAGE = 3
EXIT_IO = 4
EXIT_COUNTEREXAMPLE = 5
EXIT_ANOMALY = 6

WORKERS_ENV = "FACTORWITNESS_WORKERS"


def _even(text: str) -> int:
    value = int(text)
    if value % 2:
        raise argparse.ArgumentTypeError(f"{value} is odd; an even value is required")
    return value


def _resolve_workers(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigurationError(f"{WORKERS_ENV}={env!r} is not an integer")
        if value < 1:
            raise ConfigurationError(f"{WORKERS_ENV} must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def _get_table(limit: int, cache_path):
    if cache_path:
        return load_or_build(cache_path, limit)
    return build_table(limit)


def _write_out(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factorwitness",
        description="verify the large-prime-factor witness property of even numbers",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_format=True):
        p.add_argument("--limit", type=int, default=None,
                       help="prime table ceiling (default: the largest n used)")
        p.add_argument("--sieve-cache", metavar="PATH", default=None,
                       help="binary table cache; reused when it covers --limit")
        if needs_format:
            p.add_argument("--format", choices=FORMATS, default=NDJSON)
            p.add_argument("--output", metavar="PATH", default="-",
                           help="record stream destination (default: stdout)")

    p = sub.add_parser("verify", help="sweep all even n in [--min, --max]")
    p.add_argument("--min", type=_even, default=6)
    p.add_argument("--max", type=_even, required=True)
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${WORKERS_ENV} or CPU count)")
    p.add_argument("--checkpoint", metavar="PATH", default=None,
                   help="save progress here after every block; resume if present")
    p.add_argument("--checkpoint-interval", type=int, default=DEFAULT_BLOCK_EVENS,
                   metavar="EVENS", help="even values per block (default %(default)s)")
    p.add_argument("--fail-fast", action="store_true",
                   help="abort on the first block containing a counterexample or anomaly")
    p.add_argument("--stop-after-blocks", type=int, default=None, metavar="B",
                   help="checkpoint and stop after B blocks (interruption drill)")
    p.add_argument("--manifest", metavar="PATH", default=None,
                   help="write a provenance manifest (digest, job, record count)")
    add_common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("edge-cases", help="list equality cases with n <= --max")
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--workers", type=int, default=None)
    add_common(p)
    p.set_defaults(func=_cmd_edge_cases)

    p = sub.add_parser("stats", help="first-witness-index distribution for n <= --max")
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--workers", type=int, default=None)
    add_common(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("goldbach", help="decompose one even n into two primes")
    p.add_argument("--n", type=_even, required=True)
    add_common(p, needs_format=False)
    p.set_defaults(func=_cmd_goldbach)

    p = sub.add_parser("lemma", help="run the constructive step for (n, k)")
    p.add_argument("--n", type=_even, required=True)
    p.add_argument("--k", type=int, required=True)
    add_common(p, needs_format=False)
    p.set_defaults(func=_cmd_lemma)

    p = sub.add_parser("selftest", help="cross-check against brute-force reference code")
    p.add_argument("--limit", type=int, default=1_000_000)
    p.add_argument("--sample", type=int, default=100_000,
                   help="random integers to factor both ways (default %(default)s)")
    p.add_argument("--seed", type=int, default=2026)
    p.set_defaults(func=_cmd_selftest)

    return parser


# ---------------------------------------------------------------------------
# subcommand bodies
# ---------------------------------------------------------------------------


def _cmd_verify(args) -> int:
    limit = args.limit if args.limit is not None else args.max
    workers = _resolve_workers(args.workers)
    table = _get_table(limit, args.sieve_cache)
    job = RangeJob(
        n_min=args.min,
        n_max=args.max,
        table_limit=limit,
        workers=workers,
        checkpoint_interval=args.checkpoint_interval,
    )
    t0 = time.perf_counter()
    summary = verify_range(
        table,
        job,
        checkpoint_path=args.checkpoint,
        fail_fast=args.fail_fast,
        stop_after_blocks=args.stop_after_blocks,
    )
    wall = time.perf_counter() - t0
    if args.output in (None, "-"):
        emit_records(summary, args.format, sys.stdout, include_timing=False)
    else:
        emit_records(summary, args.format, args.output, include_timing=False)
    if args.manifest:
        RunManifest.for_run(__version__, job.identity(), summary).write(args.manifest)
    print(
        f"verified [{job.n_min}, {job.n_max}]: "
        f"{summary.instances_evaluated} instances, "
        f"{summary.counterexample_count} counterexample candidate(s), "
        f"{summary.anomaly_count} anomaly(ies), "
        f"{wall:.2f}s, digest {summary_digest(summary)[:16]}",
        file=sys.stderr,
    )
    if summary.counterexamples:
        return EXIT_COUNTEREXAMPLE
    if summary.anomalies:
        return EXIT_ANOMALY
    return EXIT_OK


def _cmd_edge_cases(args) -> int:
    limit = args.limit if args.limit is not None else max(args.max, 6)
    workers = _resolve_workers(args.workers)
    table = _get_table(limit, args.sieve_cache)
    cases = enumerate_edge_cases(table, args.max, workers=workers)
    _write_out(args.output, render_edge_cases(cases, args.format))
    print(f"{len(cases)} equality case(s) with n <= {args.max}", file=sys.stderr)
    return EXIT_OK


def _cmd_stats(args) -> int:
    limit = args.limit if args.limit is not None else max(args.max, 6)
    workers = _resolve_workers(args.workers)
    table = _get_table(limit, args.sieve_cache)
    stats = witness_statistics(table, args.max, workers=workers)
    _write_out(args.output, render_stats(stats, args.format))
    print(
        f"{stats.witnessed_count} witnessed instance(s) with n <= {args.max}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_goldbach(args) -> int:
    limit = args.limit if args.limit is not None else args.n
    table = _get_table(limit, args.sieve_cache)
    trace = goldbach_decompose(table, args.n, verify=True)
    sys.stdout.write(render_proof_trace(trace))
    return EXIT_OK


def _cmd_lemma(args) -> int:
    limit = args.limit if args.limit is not None else args.n
    table = _get_table(limit, args.sieve_cache)
    inst = make_instance(table, args.n, args.k)
    outcome = evaluate_instance(table, inst)
    if outcome.kind is OutcomeKind.VACUOUS:
        sys.stdout.write(
            f"(n={args.n}, k={args.k}) is vacuous: n - p_{outcome.i} = "
            f"{outcome.prime_hit} is prime; nothing to construct\n"
        )
        return EXIT_OK
    if outcome.kind is OutcomeKind.COUNTEREXAMPLE_CANDIDATE:
        sys.stdout.write(
            f"(n={args.n}, k={args.k}) is a counterexample candidate: "
            f"largest factors {list(outcome.factors)} all below p_{args.k} = {inst.pk}\n"
        )
        return EXIT_COUNTEREXAMPLE
    if outcome.kind is OutcomeKind.ANOMALY_UNIT:
        sys.stdout.write(
            f"(n={args.n}, k={args.k}) hits the unit: n - p_{outcome.i} = 1\n"
        )
        return EXIT_ANOMALY
    trace = construct_lemma_prime(table, inst, outcome)
    sys.stdout.write(render_proof_trace(trace))
    return EXIT_OK


def _cmd_selftest(args) -> int:
    failures = 0

    def check(name: str, ok: bool, detail: str = "") -> None:
        nonlocal failures
        status = "ok" if ok else "FAIL"
        suffix = f" ({detail})" if detail and not ok else ""
        print(f"selftest: {name}: {status}{suffix}", file=sys.stderr)
        if not ok:
            failures += 1

    limit = max(args.limit, 10_000)
    table = build_table(limit)
    oracle = BruteOracle(min(limit, 100_000))

    check(
        "prime counts",
        table.prime_count(oracle.limit) == len(oracle.primes)
        and table.prime_count(10_000) == oracle.prime_count(10_000),
    )

    rng = random.Random(args.seed)
    sample = [rng.randrange(2, limit + 1) for _ in range(args.sample)]
    bad = sum(
        1
        for x in sample
        if table.smallest_prime_factor(x) != trial_smallest_factor(x)
        or table.largest_prime_factor(x) != trial_largest_factor(x)
    )
    check("factor tables vs trial division", bad == 0, f"{bad} mismatches")

    from .report import summary_to_records  # local: avoids the csv path entirely

    job = RangeJob(n_min=6, n_max=10_000, table_limit=limit, workers=1)
    engine_summary = verify_range(table, job)
    oracle_summary = oracle.summarize(6, 10_000)
    check(
        "range summary vs brute force",
        summary_to_records(engine_summary, include_timing=False)
        == summary_to_records(oracle_summary, include_timing=False),
    )

    sound = True
    for n in range(6, 2_002, 2):
        for k in range(1, 6):
            if table.odd_prime(k) >= n:
                break
            inst = make_instance(table, n, k)
            outcome = evaluate_instance(table, inst)
            if outcome.is_witness:
                trace = construct_lemma_prime(table, inst, outcome)
                if not (inst.pk < trace.produced_prime < n):
                    sound = False
    check("constructive step soundness (n <= 2000)", sound)

    return EXIT_OK if failures == 0 else EXIT_FAILURE


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on --help and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except SweepInterrupted as exc:
        print(f"stopped on request: {exc}", file=sys.stderr)
        return EXIT_OK
    except CacheFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigurationError, PreconditionError, CheckpointMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CoverageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COVERAGE
    except (ReportWriteError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CounterexampleFoundError, GoldbachCounterexampleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COUNTEREXAMPLE
    except AnomalyFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANOMALY
    except EngineError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
