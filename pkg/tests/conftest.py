"""Shared fixtures: real tables at several scales, plus a doctoring tool.

Counterexample, anomaly, and proof-violation paths are unreachable with
honest numbers in the tested ranges, so tests drive them with tables
whose primality bits / factor entries / prime list have been deliberately
falsified.  make_doctored builds such a table without mutating the
original (PrimeTable is frozen; arrays are copied on demand).
"""

from __future__ import annotations

import numpy as np
import pytest

from factorwitness.bruteforce import BruteOracle
from factorwitness.sieve import PrimeTable, build_table


@pytest.fixture(scope="session")
def table1m() -> PrimeTable:
    return build_table(1_000_000)


@pytest.fixture(scope="session")
def table10m() -> PrimeTable:
    return build_table(10_000_000)


@pytest.fixture(scope="session")
def oracle10k() -> BruteOracle:
    return BruteOracle(10_000)


def make_doctored(
    table: PrimeTable,
    *,
    not_prime=(),
    lpf_overrides=None,
    primes=None,
) -> PrimeTable:
    """Copy of table with selected facts falsified.

    not_prime: values whose primality bit is forced off (the scan will
    treat them as composite; their lpf entries are untouched).
    lpf_overrides: {value: fake_largest_factor}.
    primes: full replacement for the sorted prime array (odd_primes is
    derived from it); used to sabotage next_prime.
    """
    primality = table.primality
    if not_prime:
        primality = primality.copy()
        for x in not_prime:
            primality[x] = False
    lpf = table.lpf
    if lpf_overrides:
        lpf = lpf.copy()
        for x, fake in lpf_overrides.items():
            lpf[x] = fake
    if primes is not None:
        all_primes = np.asarray(primes, dtype=np.int64)
    else:
        all_primes = table._primes
    return PrimeTable(
        limit=table.limit,
        spf=table.spf,
        lpf=lpf,
        primality=primality,
        odd_primes=all_primes[1:],
        _primes=all_primes,
    )
