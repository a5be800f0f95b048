"""Exhaustive range verification with checkpointing and worker pools.

The sweep walks all even n in [n_min, n_max] in lockstep over the odd
prime index i.  A block of consecutive even values is held as compacted
numpy arrays; at step i every still-active n evaluates its instance
(n, k=i) simultaneously:

    v = n - p_i        (vectorized)
    prime v   -> instance VACUOUS, row leaves the block
    v == 1    -> instance ANOMALY_UNIT, row leaves the block
    composite -> f_i = lpf(v), running max M_i = max(M_{i-1}, f_i),
                 classify by M_i vs p_i, row stays

A row therefore evaluates exactly the instances k = 1 .. i_star(n), where
i_star is the least index with n - p_i prime: every nonvacuous instance
plus the single vacuous instance that certifies all larger k vacuous.

First-witness-index tracking rides along as a (position, value) candidate
pair per row.  The threshold p_i only ever grows, so a candidate stays
minimal until its value drops below the threshold; the few rows whose
candidate dies are rescanned in one batched matrix pass.

Work is split into fixed-size blocks (also the checkpoint granularity).
Blocks are merged strictly in ascending order whatever the worker count,
so summaries and their digests are worker-count independent.
"""

from __future__ import annotations

import json
import multiprocessing
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .conjecture import EdgeCaseRecord, Family, classify_equality, make_instance
from .errors import (
    AnomalyFoundError,
    CheckpointMismatchError,
    ConfigurationError,
    CounterexampleFoundError,
    CoverageError,
    PreconditionError,
    SweepInterrupted,
)
from .sieve import PrimeTable

DEFAULT_BLOCK_EVENS = 100_000
HIST_EXACT_MAX = 64
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class RangeJob:
    """Parameters of one verification sweep over even n in [n_min, n_max]."""

    n_min: int
    n_max: int
    table_limit: int
    workers: int = 1
    checkpoint_interval: int = DEFAULT_BLOCK_EVENS  # even values per block

    def __post_init__(self):
        if self.n_min % 2 or self.n_max % 2:
            raise ConfigurationError(
                f"range endpoints must be even, got [{self.n_min}, {self.n_max}]"
            )
        if self.n_min < 6:
            raise ConfigurationError(f"n_min must be >= 6, got {self.n_min}")
        if self.n_max < self.n_min:
            raise ConfigurationError(
                f"empty range: n_max {self.n_max} < n_min {self.n_min}"
            )
        if self.table_limit < self.n_max:
            raise ConfigurationError(
                f"table_limit {self.table_limit} cannot cover n_max {self.n_max}"
            )
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if self.checkpoint_interval < 1:
            raise ConfigurationError(
                f"checkpoint_interval must be >= 1, got {self.checkpoint_interval}"
            )

    def identity(self) -> dict:
        """Fields that must match for a checkpoint to be resumable.

        The worker count is deliberately absent: block merging is ordered,
        so results do not depend on it and a resume may change it.
        """
        return {
            "n_min": self.n_min,
            "n_max": self.n_max,
            "table_limit": self.table_limit,
            "checkpoint_interval": self.checkpoint_interval,
        }


@dataclass(frozen=True)
class RangeSummary:
    """Aggregated outcome of a sweep.

    Extremes: max_first_witness_index is (value, n, k) and
    max_witness_ratio is (fwi, k, n, k) holding the exact fraction fwi/k;
    ties prefer the lexicographically least (n, k).  The histogram keys
    first-witness-index values exactly up to 64 and by power-of-two upper
    bound beyond.  elapsed_seconds and evens_per_second are measurements,
    not results; canonical serialization drops them.
    """

    n_min: int
    n_max: int
    instances_evaluated: int
    vacuous_count: int
    strict_count: int
    equal_count: int
    counterexamples: tuple[tuple[int, int], ...]
    anomalies: tuple[tuple[int, int], ...]
    equality_cases: tuple[EdgeCaseRecord, ...]
    witness_index_histogram: dict[int, int]
    max_first_witness_index: tuple[int, int, int] | None
    max_witness_ratio: tuple[int, int, int, int] | None
    elapsed_seconds: float
    evens_per_second: float

    @property
    def counterexample_count(self) -> int:
        return len(self.counterexamples)

    @property
    def anomaly_count(self) -> int:
        return len(self.anomalies)

    @property
    def clean(self) -> bool:
        return not self.counterexamples and not self.anomalies


@dataclass(frozen=True)
class WitnessStats:
    """Distribution of first witness indices over witnessed instances."""

    n_max: int
    witnessed_count: int
    histogram: dict[int, int]
    max_first_witness_index: tuple[int, int, int] | None
    max_witness_ratio: tuple[int, int, int, int] | None


@dataclass(frozen=True)
class DecompositionSweep:
    """Result of decomposing every even n in a range into two primes."""

    n_min: int
    n_max: int
    count: int
    failures: tuple[int, ...]
    max_scan: tuple[int, int] | None  # (deepest first-hit index, least such n)


def bucket_of(index: int) -> int:
    """Histogram bucket for a first-witness-index value."""
    if index <= HIST_EXACT_MAX:
        return index
    return 1 << (index - 1).bit_length()


# ---------------------------------------------------------------------------
# block sweep
# ---------------------------------------------------------------------------


@dataclass
class _BlockResult:
    lo: int
    hi: int
    instances: int = 0
    vacuous: int = 0
    strict: int = 0
    equal: int = 0
    equality_pairs: list = field(default_factory=list)  # (n, k)
    cex_pairs: list = field(default_factory=list)
    anomaly_pairs: list = field(default_factory=list)
    hist: dict = field(default_factory=dict)
    best_fwi: tuple | None = None  # (value, n, k)
    best_ratio: tuple | None = None  # (num, den, n, k)


def _better_fwi(a, b):
    """Pick the larger value; ties go to the least (n, k)."""
    if a is None:
        return b
    if b is None:
        return a
    if a[0] != b[0]:
        return a if a[0] > b[0] else b
    return a if (a[1], a[2]) <= (b[1], b[2]) else b


def _better_ratio(a, b):
    """Pick the larger fraction num/den; ties go to the least (n, k)."""
    if a is None:
        return b
    if b is None:
        return a
    lhs, rhs = a[0] * b[1], b[0] * a[1]
    if lhs != rhs:
        return a if lhs > rhs else b
    return a if (a[2], a[3]) <= (b[2], b[3]) else b


def _sweep_block(table: PrimeTable, lo: int, hi: int) -> _BlockResult:
    """Evaluate every instance of every even n in [lo, hi]."""
    res = _BlockResult(lo=lo, hi=hi)
    primality = table.primality
    lpf = table.lpf
    odd = table.odd_primes

    n_act = np.arange(lo, hi + 1, 2, dtype=np.int64)
    run_max = np.zeros(n_act.size, dtype=np.int64)
    wit_pos = np.zeros(n_act.size, dtype=np.int64)
    wit_val = np.zeros(n_act.size, dtype=np.int64)
    hist_small = np.zeros(HIST_EXACT_MAX + 1, dtype=np.int64)
    hist_large: dict[int, int] = {}

    i = 0
    while n_act.size:
        i += 1
        if i > odd.size:
            # Every odd prime below every remaining n has been scanned
            # (the table covers the whole block), so no instance remains.
            break
        p = int(odd[i - 1])
        if p >= n_act[0]:
            # Rows with n <= p have no instance at k = i (p_k < n fails);
            # they ran out of valid k without ever dying, i.e. every one
            # of their instances was a counterexample candidate.
            keep = n_act > p
            n_act = n_act[keep]
            run_max = run_max[keep]
            wit_pos = wit_pos[keep]
            wit_val = wit_val[keep]
            if n_act.size == 0:
                break
        res.instances += n_act.size

        v = n_act - p
        is_prime_hit = primality[v]
        is_unit = v == 1
        hits = int(np.count_nonzero(is_prime_hit))
        res.vacuous += hits
        if is_unit.any():
            for n in n_act[is_unit]:
                res.anomaly_pairs.append((int(n), i))

        survive = ~(is_prime_hit | is_unit)
        n_act = n_act[survive]
        run_max = run_max[survive]
        wit_pos = wit_pos[survive]
        wit_val = wit_val[survive]
        if n_act.size == 0:
            continue

        f = lpf[v[survive]].astype(np.int64)
        run_max = np.maximum(run_max, f)

        gt = run_max > p
        eq = run_max == p
        res.strict += int(np.count_nonzero(gt))
        if eq.any():
            for n in n_act[eq]:
                res.equality_pairs.append((int(n), i))
            res.equal += int(np.count_nonzero(eq))
        lt = ~(gt | eq)
        if lt.any():
            for n in n_act[lt]:
                res.cex_pairs.append((int(n), i))

        # First-witness-index candidates.  The threshold p only grows, so
        # a live candidate stays the least qualifying position until its
        # value falls below p; those few rows get a batched rescan.
        has = wit_pos > 0
        died = has & (wit_val < p)
        fresh = ~has & (f >= p)
        wit_pos[fresh] = i
        wit_val[fresh] = f[fresh]
        if died.any():
            rows = np.flatnonzero(died)
            vm = n_act[rows, None] - odd[None, :i]
            fm = lpf[vm].astype(np.int64)
            mm = np.maximum.accumulate(fm, axis=1)
            passing = mm >= p
            cnt = passing.sum(axis=1)
            pos = np.where(cnt > 0, i - cnt + 1, 0)
            wit_pos[rows] = pos
            val = np.zeros(rows.size, dtype=np.int64)
            found = cnt > 0
            val[found] = mm[np.flatnonzero(found), pos[found] - 1]
            wit_val[rows] = val

        witnessed = wit_pos > 0
        if __debug__:
            # The candidate bookkeeping must agree with the classifier.
            assert np.array_equal(witnessed, gt | eq)
        if witnessed.any():
            wp = wit_pos[witnessed]
            small = wp <= HIST_EXACT_MAX
            if small.any():
                b = np.bincount(wp[small])
                hist_small[: b.size] += b
            for value in wp[~small]:
                key = bucket_of(int(value))
                hist_large[key] = hist_large.get(key, 0) + 1
            step_max = int(wp.max())
            n_at_max = int(n_act[witnessed][wp == step_max][0])
            res.best_fwi = _better_fwi(res.best_fwi, (step_max, n_at_max, i))
            res.best_ratio = _better_ratio(res.best_ratio, (step_max, i, n_at_max, i))

    hist = {ix: int(c) for ix, c in enumerate(hist_small) if c}
    for key in sorted(hist_large):
        hist[key] = hist_large[key]
    res.hist = hist
    assert res.instances == (
        res.vacuous
        + res.strict
        + res.equal
        + len(res.cex_pairs)
        + len(res.anomaly_pairs)
    )
    return res


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


@dataclass
class _Aggregate:
    instances: int = 0
    vacuous: int = 0
    strict: int = 0
    equal: int = 0
    equality: list = field(default_factory=list)  # EdgeCaseRecord
    cex: list = field(default_factory=list)
    anomalies: list = field(default_factory=list)
    hist: dict = field(default_factory=dict)
    best_fwi: tuple | None = None
    best_ratio: tuple | None = None

    def absorb(self, table: PrimeTable, block: _BlockResult) -> None:
        self.instances += block.instances
        self.vacuous += block.vacuous
        self.strict += block.strict
        self.equal += block.equal
        for n, k in block.equality_pairs:
            self.equality.append(classify_equality(table, make_instance(table, n, k)))
        self.cex.extend(block.cex_pairs)
        self.anomalies.extend(block.anomaly_pairs)
        for key, c in block.hist.items():
            self.hist[key] = self.hist.get(key, 0) + c
        self.best_fwi = _better_fwi(self.best_fwi, block.best_fwi)
        self.best_ratio = _better_ratio(self.best_ratio, block.best_ratio)

    def to_state(self) -> dict:
        return {
            "instances": self.instances,
            "vacuous": self.vacuous,
            "strict": self.strict,
            "equal": self.equal,
            "equality": [
                [r.n, r.k, list(r.factors), r.family.value, r.r] for r in self.equality
            ],
            "cex": [list(pair) for pair in self.cex],
            "anomalies": [list(pair) for pair in self.anomalies],
            "hist": {str(key): c for key, c in self.hist.items()},
            "best_fwi": list(self.best_fwi) if self.best_fwi else None,
            "best_ratio": list(self.best_ratio) if self.best_ratio else None,
        }

    @classmethod
    def from_state(cls, state: dict) -> "_Aggregate":
        agg = cls(
            instances=state["instances"],
            vacuous=state["vacuous"],
            strict=state["strict"],
            equal=state["equal"],
        )
        agg.equality = [
            EdgeCaseRecord(n=n, k=k, factors=tuple(fs), family=Family(fam), r=r)
            for n, k, fs, fam, r in state["equality"]
        ]
        agg.cex = [tuple(pair) for pair in state["cex"]]
        agg.anomalies = [tuple(pair) for pair in state["anomalies"]]
        agg.hist = {int(key): c for key, c in state["hist"].items()}
        agg.best_fwi = tuple(state["best_fwi"]) if state["best_fwi"] else None
        agg.best_ratio = tuple(state["best_ratio"]) if state["best_ratio"] else None
        return agg

    def finalize(self, job: RangeJob, elapsed: float) -> RangeSummary:
        evens = (job.n_max - job.n_min) // 2 + 1
        return RangeSummary(
            n_min=job.n_min,
            n_max=job.n_max,
            instances_evaluated=self.instances,
            vacuous_count=self.vacuous,
            strict_count=self.strict,
            equal_count=self.equal,
            counterexamples=tuple(sorted(self.cex)),
            anomalies=tuple(sorted(self.anomalies)),
            equality_cases=tuple(sorted(self.equality, key=lambda r: (r.n, r.k))),
            witness_index_histogram=dict(sorted(self.hist.items())),
            max_first_witness_index=self.best_fwi,
            max_witness_ratio=self.best_ratio,
            elapsed_seconds=elapsed,
            evens_per_second=evens / elapsed if elapsed > 0 else float("inf"),
        )


# ---------------------------------------------------------------------------
# checkpointing
# ---------------------------------------------------------------------------


def checkpoint_save(path, job: RangeJob, blocks_done: int, agg: _Aggregate, elapsed: float) -> None:
    """Persist sweep progress atomically (write temp file, then rename)."""
    state = {
        "format_version": CHECKPOINT_VERSION,
        "job": job.identity(),
        "blocks_done": blocks_done,
        "elapsed": elapsed,
        "aggregate": agg.to_state(),
    }
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(state, fh)
        fh.write("\n")
    os.replace(tmp, path)


def checkpoint_resume(path, job: RangeJob) -> tuple[int, _Aggregate, float]:
    """Load progress for job; reject checkpoints from any other job."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            state = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointMismatchError(f"{path}: unreadable checkpoint: {exc}") from exc
    version = state.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointMismatchError(
            f"{path}: checkpoint version {version}, expected {CHECKPOINT_VERSION}"
        )
    if state.get("job") != job.identity():
        raise CheckpointMismatchError(
            f"{path}: checkpoint belongs to job {state.get('job')}, "
            f"current job is {job.identity()}"
        )
    return (
        int(state["blocks_done"]),
        _Aggregate.from_state(state["aggregate"]),
        float(state["elapsed"]),
    )


# ---------------------------------------------------------------------------
# drivers
# ---------------------------------------------------------------------------

_SHARED_TABLE: PrimeTable | None = None


def _pool_sweep(bounds: tuple[int, int]) -> _BlockResult:
    return _sweep_block(_SHARED_TABLE, bounds[0], bounds[1])


def _block_bounds(job: RangeJob) -> list[tuple[int, int]]:
    span = 2 * job.checkpoint_interval
    out = []
    lo = job.n_min
    while lo <= job.n_max:
        hi = min(lo + span - 2, job.n_max)
        out.append((lo, hi))
        lo = hi + 2
    return out


def verify_range(
    table: PrimeTable,
    job: RangeJob,
    *,
    checkpoint_path=None,
    fail_fast: bool = False,
    stop_after_blocks: int | None = None,
) -> RangeSummary:
    """Run (or resume) the sweep described by job and return its summary.

    checkpoint_path: progress is saved there after every merged block and
    an existing file resumes the sweep (after validating it matches job).
    fail_fast: raise as soon as a merged block contains a counterexample
    candidate or unit anomaly instead of sweeping to the end.
    stop_after_blocks: merge this many new blocks, checkpoint, then raise
    SweepInterrupted; exists so interruption can be exercised on demand.
    """
    if table.limit < job.table_limit:
        raise CoverageError(
            f"table covers [2, {table.limit}], job needs {job.table_limit}"
        )
    if stop_after_blocks is not None and not checkpoint_path:
        raise ConfigurationError("stop_after_blocks requires a checkpoint path")

    bounds = _block_bounds(job)
    agg = _Aggregate()
    done = 0
    elapsed_prior = 0.0
    if checkpoint_path and os.path.exists(checkpoint_path):
        done, agg, elapsed_prior = checkpoint_resume(checkpoint_path, job)
        if done > len(bounds):
            raise CheckpointMismatchError(
                f"{checkpoint_path}: {done} blocks done, job only has {len(bounds)}"
            )

    t0 = time.perf_counter()
    merged_this_run = 0

    def elapsed_now() -> float:
        return elapsed_prior + (time.perf_counter() - t0)

    def merge(block: _BlockResult) -> None:
        nonlocal done, merged_this_run
        agg.absorb(table, block)
        done += 1
        merged_this_run += 1
        if checkpoint_path:
            checkpoint_save(checkpoint_path, job, done, agg, elapsed_now())
        if fail_fast and (agg.cex or agg.anomalies):
            if agg.cex:
                raise CounterexampleFoundError(sorted(agg.cex))
            raise AnomalyFoundError(sorted(agg.anomalies))
        if (
            stop_after_blocks is not None
            and merged_this_run >= stop_after_blocks
            and done < len(bounds)
        ):
            raise SweepInterrupted(checkpoint_path, done)

    todo = bounds[done:]
    if job.workers == 1 or len(todo) <= 1:
        for lo, hi in todo:
            merge(_sweep_block(table, lo, hi))
    else:
        global _SHARED_TABLE
        _SHARED_TABLE = table
        ctx = multiprocessing.get_context("fork")
        try:
            with ctx.Pool(processes=job.workers) as pool:
                for block in pool.imap(_pool_sweep, todo, chunksize=1):
                    merge(block)
        finally:
            _SHARED_TABLE = None

    summary = agg.finalize(job, elapsed_now())
    if checkpoint_path and os.path.exists(checkpoint_path):
        os.unlink(checkpoint_path)
    return summary


def merge_summaries(a: RangeSummary, b: RangeSummary) -> RangeSummary:
    """Combine summaries of two adjacent ranges ([.., x], [x+2, ..])."""
    if b.n_min != a.n_max + 2:
        raise PreconditionError(
            f"ranges not adjacent: [{a.n_min}, {a.n_max}] then [{b.n_min}, {b.n_max}]"
        )
    hist = dict(a.witness_index_histogram)
    for key, c in b.witness_index_histogram.items():
        hist[key] = hist.get(key, 0) + c
    elapsed = a.elapsed_seconds + b.elapsed_seconds
    evens = (b.n_max - a.n_min) // 2 + 1
    return RangeSummary(
        n_min=a.n_min,
        n_max=b.n_max,
        instances_evaluated=a.instances_evaluated + b.instances_evaluated,
        vacuous_count=a.vacuous_count + b.vacuous_count,
        strict_count=a.strict_count + b.strict_count,
        equal_count=a.equal_count + b.equal_count,
        counterexamples=tuple(sorted(a.counterexamples + b.counterexamples)),
        anomalies=tuple(sorted(a.anomalies + b.anomalies)),
        equality_cases=tuple(
            sorted(a.equality_cases + b.equality_cases, key=lambda r: (r.n, r.k))
        ),
        witness_index_histogram=dict(sorted(hist.items())),
        max_first_witness_index=_better_fwi(
            a.max_first_witness_index, b.max_first_witness_index
        ),
        max_witness_ratio=_better_ratio(a.max_witness_ratio, b.max_witness_ratio),
        elapsed_seconds=elapsed,
        evens_per_second=evens / elapsed if elapsed > 0 else float("inf"),
    )


# ---------------------------------------------------------------------------
# derived sweeps
# ---------------------------------------------------------------------------


def _even_ceiling(n_max: int) -> int:
    return n_max - (n_max % 2)


def enumerate_edge_cases(table: PrimeTable, n_max: int, workers: int = 1):
    """All equality cases with n <= n_max, ascending by (n, k)."""
    hi = _even_ceiling(n_max)
    if hi < 6:
        return ()
    job = RangeJob(n_min=6, n_max=hi, table_limit=hi, workers=workers)
    return verify_range(table, job).equality_cases


def witness_statistics(table: PrimeTable, n_max: int, workers: int = 1) -> WitnessStats:
    """First-witness-index distribution over all instances with n <= n_max."""
    hi = _even_ceiling(n_max)
    if hi < 6:
        return WitnessStats(
            n_max=n_max,
            witnessed_count=0,
            histogram={},
            max_first_witness_index=None,
            max_witness_ratio=None,
        )
    job = RangeJob(n_min=6, n_max=hi, table_limit=hi, workers=workers)
    summary = verify_range(table, job)
    return WitnessStats(
        n_max=n_max,
        witnessed_count=summary.strict_count + summary.equal_count,
        histogram=summary.witness_index_histogram,
        max_first_witness_index=summary.max_first_witness_index,
        max_witness_ratio=summary.max_witness_ratio,
    )


def decompose_range(table: PrimeTable, n_min: int, n_max: int) -> DecompositionSweep:
    """Two-prime decompositions for every even n in [n_min, n_max].

    Vectorized form of goldbach_decompose's scan loop; per n only the
    existence and depth of the first hit are kept.  Any n whose scan
    exhausts the odd primes below it lands in failures.
    """
    if n_min % 2 or n_max % 2:
        raise PreconditionError(
            f"range endpoints must be even, got [{n_min}, {n_max}]"
        )
    if n_min < 6 or n_max < n_min:
        raise PreconditionError(f"need 6 <= n_min <= n_max, got [{n_min}, {n_max}]")
    if n_max > table.limit:
        raise CoverageError(f"n_max={n_max} exceeds table limit {table.limit}")
    primality = table.primality
    odd = table.odd_primes
    act = np.arange(n_min, n_max + 1, 2, dtype=np.int64)
    count = act.size
    failures: list[int] = []
    max_scan: tuple[int, int] | None = None
    i = 0
    while act.size:
        i += 1
        if i > odd.size:
            failures.extend(int(n) for n in act)
            break
        p = int(odd[i - 1])
        if p >= act[0]:
            exhausted = act <= p
            failures.extend(int(n) for n in act[exhausted])
            act = act[~exhausted]
            if act.size == 0:
                break
        hit = primality[act - p]
        if hit.any():
            max_scan = (i, int(act[hit][0]))
            act = act[~hit]
    return DecompositionSweep(
        n_min=n_min,
        n_max=n_max,
        count=count,
        failures=tuple(failures),
        max_scan=max_scan,
    )
