"""Prime and factorization tables over a contiguous range [2, limit].

The engine's hot loops never factor anything at query time.  Instead a
single segmented sieve pass produces, for every x in [2, limit]:

  * spf[x]  -- the smallest prime factor of x (x itself when x is prime),
  * lpf[x]  -- the largest prime factor of x,
  * primality[x] -- spf[x] == x.

The spf array is built by writing each sieving prime over its multiples in
*descending* prime order, so the last write at any composite position is
its smallest prime factor.  The lpf array is then derived by pointer
doubling on the "divide out one smallest factor" map: composites point at
x // spf[x], primes point at themselves, and squaring the map a handful of
times collapses every chain onto its terminal prime.

Tables are uint32, so the supported ceiling is bounded by 2**32 - 1; the
practical ceiling here is memory (about 9 bytes per integer resident).
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field
from math import isqrt

import numpy as np

from .errors import CacheFormatError, ConfigurationError, CoverageError, OutOfRangeError, PreconditionError

MIN_LIMIT = 6
MAX_LIMIT = 2_000_000_000  # uint32-safe with headroom; memory runs out first
DEFAULT_SEGMENT = 1 << 20

_CACHE_MAGIC = b"FWPTBL\r\n"
_CACHE_VERSION = 1

# Longest divide-out chain for x < 2**32 is under 32 steps, and each
# doubling round squares the reach of the pointer map.
_DOUBLING_ROUNDS = 5


def _simple_primes(n: int) -> np.ndarray:
    """Primes <= n by a plain dense sieve; only used for the base primes."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    mask = np.ones(n + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, isqrt(n) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.flatnonzero(mask)


def _build_spf(limit: int, segment: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.uint32)
    base = [int(p) for p in _simple_primes(isqrt(limit))]
    base.reverse()  # descending: smallest prime writes last and wins
    for lo in range(2, limit + 1, segment):
        hi = min(lo + segment, limit + 1)
        seg = spf[lo:hi]
        for p in base:
            start = max(p * p, ((lo + p - 1) // p) * p)
            if start >= hi:
                continue
            seg[start - lo :: p] = p
        # Positions no base prime reached are primes (or base primes
        # themselves, skipped above via the p*p start).
        untouched = np.flatnonzero(seg == 0)
        seg[untouched] = (untouched + lo).astype(np.uint32)
    spf[1] = 1
    return spf


def _build_lpf(spf: np.ndarray, idx: np.ndarray) -> np.ndarray:
    # step[x] = x // spf[x] for composites, x for primes (and 0, 1).
    step = idx.copy()
    comp = spf != idx
    comp[:2] = False
    step[comp] = idx[comp] // spf[comp]
    del comp
    for _ in range(_DOUBLING_ROUNDS):
        step = step[step]
    return step


@dataclass(frozen=True)
class PrimeTable:
    """Immutable primality and factor tables for integers in [2, limit]."""

    limit: int
    spf: np.ndarray
    lpf: np.ndarray
    primality: np.ndarray
    odd_primes: np.ndarray
    _primes: np.ndarray = field(repr=False)

    # -- scalar queries -------------------------------------------------

    def _check(self, x: int) -> None:
        if not isinstance(x, (int, np.integer)):
            raise PreconditionError(f"expected an integer, got {type(x).__name__}")
        if x < 2 or x > self.limit:
            raise OutOfRangeError(f"{x} outside table domain [2, {self.limit}]")

    def is_prime(self, x: int) -> bool:
        self._check(x)
        return bool(self.primality[x])

    def smallest_prime_factor(self, x: int) -> int:
        self._check(x)
        return int(self.spf[x])

    def largest_prime_factor(self, x: int) -> int:
        self._check(x)
        return int(self.lpf[x])

    def factorize(self, x: int) -> tuple[int, ...]:
        """Prime factors of x in nondecreasing order, with multiplicity."""
        self._check(x)
        out = []
        v = int(x)
        while v > 1:
            p = int(self.spf[v])
            out.append(p)
            v //= p
        return tuple(out)

    def next_prime(self, p: int) -> int:
        """Smallest prime strictly greater than the prime p."""
        self._check(p)
        if not self.primality[p]:
            raise PreconditionError(f"next_prime needs a prime argument, got {p}")
        j = int(np.searchsorted(self._primes, p, side="right"))
        if j >= self._primes.size:
            raise CoverageError(f"no prime above {p} within limit {self.limit}")
        return int(self._primes[j])

    # -- odd prime indexing (1-based, p_1 = 3) --------------------------

    def odd_prime(self, k: int) -> int:
        if k < 1:
            raise PreconditionError(f"odd prime index must be >= 1, got {k}")
        if k > self.odd_primes.size:
            raise CoverageError(
                f"odd prime #{k} requested but table holds {self.odd_primes.size}"
            )
        return int(self.odd_primes[k - 1])

    def count_odd_primes_below(self, n: int) -> int:
        """Number of odd primes strictly less than n."""
        return int(np.searchsorted(self.odd_primes, n, side="left"))

    def prime_count(self, x: int | None = None) -> int:
        """pi(x): number of primes <= x (defaults to the full table)."""
        if x is None:
            return int(self._primes.size)
        self._check(x)
        return int(np.searchsorted(self._primes, x, side="right"))

    # -- persistence -----------------------------------------------------

    def save(self, path) -> None:
        """Write the table to a binary cache file (atomic replace)."""
        packed = np.packbits(self.primality)
        spf_bytes = np.ascontiguousarray(self.spf, dtype="<u4").tobytes()
        header = _CACHE_MAGIC + struct.pack(
            "<IQQQ", _CACHE_VERSION, self.limit, packed.nbytes, len(spf_bytes)
        )
        tmp = f"{path}.tmp.{os.getpid()}"
        with open(tmp, "wb") as fh:
            fh.write(header)
            fh.write(packed.tobytes())
            fh.write(spf_bytes)
        os.replace(tmp, path)


def build_table(limit: int, segment: int = DEFAULT_SEGMENT) -> PrimeTable:
    """Sieve [2, limit] and return the full table set."""
    if limit < MIN_LIMIT:
        raise ConfigurationError(f"limit must be >= {MIN_LIMIT}, got {limit}")
    if limit > MAX_LIMIT:
        raise ConfigurationError(f"limit must be <= {MAX_LIMIT}, got {limit}")
    if segment < 1024:
        raise ConfigurationError(f"segment must be >= 1024, got {segment}")
    spf = _build_spf(limit, segment)
    return _finish_table(limit, spf)


def _finish_table(limit: int, spf: np.ndarray) -> PrimeTable:
    idx = np.arange(limit + 1, dtype=np.uint32)
    primality = spf == idx
    primality[:2] = False
    lpf = _build_lpf(spf, idx)
    del idx
    primes = np.flatnonzero(primality)
    return PrimeTable(
        limit=limit,
        spf=spf,
        lpf=lpf,
        primality=primality,
        odd_primes=primes[1:],
        _primes=primes,
    )


def load_table(path, min_limit: int = MIN_LIMIT) -> PrimeTable:
    """Load a cached table, requiring coverage of at least min_limit."""
    try:
        head_len = len(_CACHE_MAGIC) + struct.calcsize("<IQQQ")
        with open(path, "rb") as fh:
            head = fh.read(head_len)
            if len(head) != head_len or head[: len(_CACHE_MAGIC)] != _CACHE_MAGIC:
                raise CacheFormatError(f"{path}: not a prime table cache")
            version, limit, prim_nbytes, spf_nbytes = struct.unpack(
                "<IQQQ", head[len(_CACHE_MAGIC) :]
            )
            if version != _CACHE_VERSION:
                raise CacheFormatError(
                    f"{path}: cache version {version}, expected {_CACHE_VERSION}"
                )
            if spf_nbytes != 4 * (limit + 1):
                raise CacheFormatError(f"{path}: spf payload size mismatch")
            packed = fh.read(prim_nbytes)
            spf_raw = fh.read(spf_nbytes)
            if len(packed) != prim_nbytes or len(spf_raw) != spf_nbytes:
                raise CacheFormatError(f"{path}: truncated cache file")
    except OSError as exc:
        raise CacheFormatError(f"{path}: cannot read cache: {exc}") from exc
    if limit < min_limit:
        raise CoverageError(
            f"cached table covers [2, {limit}], need at least {min_limit}"
        )
    spf = np.frombuffer(spf_raw, dtype="<u4").astype(np.uint32)
    table = _finish_table(int(limit), spf)
    # Cross-check the stored primality bits against the recomputed ones;
    # a mismatch means the payload is corrupt, not merely stale.
    stored = np.unpackbits(np.frombuffer(packed, dtype=np.uint8))[: limit + 1].astype(bool)
    if stored.size != limit + 1 or not np.array_equal(stored, table.primality):
        raise CacheFormatError(f"{path}: primality bits disagree with spf payload")
    return table


def load_or_build(path, limit: int, segment: int = DEFAULT_SEGMENT) -> PrimeTable:
    """Use the cache at path when it covers limit, else rebuild and save."""
    if path and os.path.exists(path):
        try:
            return load_table(path, min_limit=limit)
        except CoverageError:
            pass  # stale cache: rebuild below and overwrite
    table = build_table(limit, segment=segment)
    if path:
        table.save(path)
    return table
