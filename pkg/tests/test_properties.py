"""Property-based cross-checks between the engine and the oracle."""

from hypothesis import given, settings, strategies as st

from factorwitness.conjecture import (
    construct_lemma_prime,
    evaluate_instance,
    first_witness_index,
    goldbach_decompose,
    make_instance,
)
from factorwitness.report import CSV, NDJSON, canonical_bytes, parse_records, render_records
from factorwitness.search import RangeJob, bucket_of, merge_summaries, verify_range

even_n = st.integers(min_value=3, max_value=5_000).map(lambda h: 2 * h)
values = st.integers(min_value=2, max_value=1_000_000)


@given(x=values)
def test_factorization_reconstructs(table1m, x):
    parts = table1m.factorize(x)
    prod = 1
    for p in parts:
        assert table1m.is_prime(p)
        prod *= p
    assert prod == x
    assert parts[0] == table1m.smallest_prime_factor(x)
    assert parts[-1] == table1m.largest_prime_factor(x)


@given(x=values)
def test_spf_lpf_bracket_all_factors(table1m, x):
    spf = table1m.smallest_prime_factor(x)
    lpf = table1m.largest_prime_factor(x)
    assert spf <= lpf
    assert x % spf == 0 and x % lpf == 0


@given(n=even_n, k=st.integers(min_value=1, max_value=40))
def test_engine_matches_oracle_per_instance(table1m, oracle10k, n, k):
    pk = oracle10k.odd_prime(k)
    if pk >= n:
        k = 1  # always valid: p_1 = 3 < 6 <= n
    got = evaluate_instance(table1m, make_instance(table1m, n, k))
    want = oracle10k.evaluate(n, k)
    assert got == want
    assert first_witness_index(
        table1m, make_instance(table1m, n, k)
    ) == oracle10k.first_witness_index(n, k)


@given(n=even_n, k=st.integers(min_value=1, max_value=40))
def test_constructed_prime_lands_in_open_interval(table1m, n, k):
    if table1m.odd_prime(k) >= n:
        k = 1
    inst = make_instance(table1m, n, k)
    out = evaluate_instance(table1m, inst)
    if out.is_witness:
        tr = construct_lemma_prime(table1m, inst, out)
        assert table1m.is_prime(tr.produced_prime)
        assert inst.pk < tr.produced_prime < n


@given(n=even_n)
def test_goldbach_matches_oracle(table1m, oracle10k, n):
    tr = goldbach_decompose(table1m, n, verify=True)
    assert (tr.p, tr.q, tr.i) == oracle10k.goldbach_pair(n)


@settings(max_examples=25, deadline=None)
@given(
    lo_h=st.integers(min_value=3, max_value=1_000),
    span_h=st.integers(min_value=0, max_value=500),
    cut_h=st.integers(min_value=0, max_value=500),
)
def test_split_then_merge_is_identity(table1m, lo_h, span_h, cut_h):
    lo, hi = 2 * lo_h, 2 * (lo_h + span_h)
    whole = verify_range(table1m, RangeJob(n_min=lo, n_max=hi, table_limit=hi))
    if span_h == 0:
        return
    cut = lo + 2 * (cut_h % span_h)  # lo <= cut < hi, even
    left = verify_range(table1m, RangeJob(n_min=lo, n_max=cut, table_limit=cut))
    right = verify_range(table1m, RangeJob(n_min=cut + 2, n_max=hi, table_limit=hi))
    assert canonical_bytes(merge_summaries(left, right)) == canonical_bytes(whole)


@settings(max_examples=25, deadline=None)
@given(
    hi_h=st.integers(min_value=3, max_value=2_000),
    fmt=st.sampled_from([NDJSON, CSV]),
)
def test_emit_parse_round_trip(table1m, hi_h, fmt):
    hi = 2 * hi_h
    summary = verify_range(table1m, RangeJob(n_min=6, n_max=hi, table_limit=hi))
    assert parse_records(render_records(summary, fmt), fmt) == summary


@given(i=st.integers(min_value=1, max_value=10_000_000))
def test_bucket_is_tight_power_of_two(i):
    b = bucket_of(i)
    if i <= 64:
        assert b == i
    else:
        assert b >= i
        assert b & (b - 1) == 0  # power of two
        assert b // 2 < i  # minimal such power


@given(n=even_n, k=st.integers(min_value=1, max_value=40))
def test_outcome_fields_match_kind(table1m, n, k):
    if table1m.odd_prime(k) >= n:
        k = 1
    out = evaluate_instance(table1m, make_instance(table1m, n, k))
    populated = {
        name
        for name in ("i", "prime_hit", "factor", "factors")
        if getattr(out, name) is not None
    }
    expected = {
        "vacuous": {"i", "prime_hit"},
        "witness_strict": {"i", "factor"},
        "witness_equal": {"i"},
        "counterexample_candidate": {"factors"},
        "anomaly_unit": {"i"},
    }[out.kind.value]
    assert populated == expected
