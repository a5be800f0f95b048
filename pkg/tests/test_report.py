"""Record streams: emission, parsing, digests, manifests, trace rendering."""

import io
import json

import pytest

from factorwitness.conjecture import (
    construct_lemma_prime,
    evaluate_instance,
    goldbach_decompose,
    make_instance,
)
from factorwitness.errors import ReportFormatError, ReportWriteError
from factorwitness.report import (
    CSV,
    NDJSON,
    RunManifest,
    canonical_bytes,
    emit_records,
    parse_records,
    render_edge_cases,
    render_proof_trace,
    render_records,
    render_stats,
    summary_digest,
    summary_to_records,
)
from factorwitness.search import RangeJob, verify_range, witness_statistics


@pytest.fixture(scope="module")
def summary(table1m):
    return verify_range(table1m, RangeJob(n_min=6, n_max=2_000, table_limit=2_000))


def test_round_trip_ndjson(summary):
    text = render_records(summary, NDJSON)
    assert parse_records(text, NDJSON) == summary


def test_round_trip_csv(summary):
    text = render_records(summary, CSV)
    assert parse_records(text, CSV) == summary


def test_round_trip_via_file(summary, tmp_path):
    for fmt, name in ((NDJSON, "out.ndjson"), (CSV, "out.csv")):
        path = tmp_path / name
        count = emit_records(summary, fmt, path)
        assert count == len(summary_to_records(summary))
        assert parse_records(path, fmt) == summary


def test_round_trip_via_file_object(summary):
    buf = io.StringIO()
    emit_records(summary, NDJSON, buf)
    assert parse_records(io.StringIO(buf.getvalue()), NDJSON) == summary


def test_summary_record_is_last_and_unique(summary):
    lines = render_records(summary, NDJSON).splitlines()
    kinds = [json.loads(line)["record"] for line in lines]
    assert kinds[-1] == "summary"
    assert kinds.count("summary") == 1


def test_parse_rejects_missing_summary(summary):
    lines = render_records(summary, NDJSON).splitlines()
    with pytest.raises(ReportFormatError):
        parse_records("\n".join(lines[:-1]) + "\n", NDJSON)


def test_parse_rejects_duplicate_summary(summary):
    lines = render_records(summary, NDJSON).splitlines()
    with pytest.raises(ReportFormatError):
        parse_records("\n".join([lines[-1]] + lines) + "\n", NDJSON)


def test_parse_rejects_count_mismatch(summary):
    lines = render_records(summary, NDJSON).splitlines()
    # drop one equality record: the summary's equality_count now lies
    assert json.loads(lines[0])["record"] == "equality_case"
    with pytest.raises(ReportFormatError):
        parse_records("\n".join(lines[1:]) + "\n", NDJSON)


def test_parse_rejects_unknown_record(summary):
    text = '{"record":"mystery"}\n' + render_records(summary, NDJSON)
    with pytest.raises(ReportFormatError):
        parse_records(text, NDJSON)


def test_parse_rejects_partial_marker(summary):
    text = render_records(summary, NDJSON) + '{"record":"partial_output"}\n'
    with pytest.raises(ReportFormatError, match="partial"):
        parse_records(text, NDJSON)


def test_parse_rejects_bad_json():
    with pytest.raises(ReportFormatError):
        parse_records("not json at all\n", NDJSON)
    with pytest.raises(ReportFormatError):
        parse_records("", NDJSON)


def test_unknown_format(summary):
    with pytest.raises(ReportFormatError):
        render_records(summary, "xml")
    with pytest.raises(ReportFormatError):
        parse_records("x\n", "xml")


def test_digest_ignores_timing_and_format(summary):
    # Same range swept again: wall time differs, digest must not.
    again = parse_records(render_records(summary, CSV), CSV)
    assert again.elapsed_seconds == summary.elapsed_seconds
    assert summary_digest(again) == summary_digest(summary)
    stripped = parse_records(
        render_records(summary, NDJSON, include_timing=False), NDJSON
    )
    assert stripped.elapsed_seconds == 0.0
    assert summary_digest(stripped) == summary_digest(summary)
    assert canonical_bytes(stripped) == canonical_bytes(summary)


def test_emit_write_failure_marks_partial(summary):
    class FlakyOnce(io.StringIO):
        def __init__(self):
            super().__init__()
            self.failed = False

        def write(self, text):
            if not self.failed and len(text) > 100:
                self.failed = True
                raise OSError("disk full")
            return super().write(text)

    dest = FlakyOnce()
    with pytest.raises(ReportWriteError):
        emit_records(summary, NDJSON, dest)
    assert '"partial_output"' in dest.getvalue()
    with pytest.raises(ReportFormatError, match="partial"):
        parse_records(dest.getvalue() or "x", NDJSON)


def test_emit_unwritable_path(summary, tmp_path):
    with pytest.raises(ReportWriteError):
        emit_records(summary, NDJSON, tmp_path / "no" / "such" / "dir" / "out")


def test_manifest_round_trip(summary):
    job = RangeJob(n_min=6, n_max=2_000, table_limit=2_000)
    manifest = RunManifest.for_run("0.1.0", job.identity(), summary)
    assert manifest.digest == summary_digest(summary)
    assert manifest.record_count == len(
        summary_to_records(summary, include_timing=False)
    )
    again = RunManifest.from_json(manifest.to_json())
    assert again == manifest


def test_manifest_write(summary, tmp_path):
    job = RangeJob(n_min=6, n_max=2_000, table_limit=2_000)
    manifest = RunManifest.for_run("0.1.0", job.identity(), summary)
    path = tmp_path / "manifest.json"
    manifest.write(path)
    assert RunManifest.from_json(path.read_text()) == manifest


def test_render_lemma_traces(table1m):
    inst = make_instance(table1m, 98, 6)
    tr = construct_lemma_prime(table1m, inst, evaluate_instance(table1m, inst))
    text = render_proof_trace(tr)
    assert "98 - 3 = 95" in text
    assert "take q = 19" in text
    assert "17 < 19 < 98" in text
    assert "Bertrand" not in text

    inst = make_instance(table1m, 30, 2)
    tr = construct_lemma_prime(table1m, inst, evaluate_instance(table1m, inst))
    text = render_proof_trace(tr)
    assert "25 = 5 * 5" in text
    assert "Bertrand" in text
    assert "5 < 7 < 30" in text


def test_render_descent_trace(table1m):
    text = render_proof_trace(goldbach_decompose(table1m, 98))
    assert "98 = 19 + 79" in text
    assert "i = 7" in text


def test_render_rejects_unknown_type():
    with pytest.raises(ReportFormatError):
        render_proof_trace(object())


def test_render_edge_cases_shapes(table1m):
    from factorwitness.search import enumerate_edge_cases

    cases = enumerate_edge_cases(table1m, 100)
    nd = render_edge_cases(cases, NDJSON)
    rows = [json.loads(line) for line in nd.splitlines()]
    assert [(r["n"], r["k"]) for r in rows] == [(12, 1), (30, 1), (30, 2), (84, 1)]
    cs = render_edge_cases(cases, CSV).splitlines()
    assert cs[0] == "record,n,k,factors,family,r"
    assert len(cs) == 5
    assert "30,2,3;5,known_30_2," in cs[3]


def test_render_stats_shapes(table1m):
    stats = witness_statistics(table1m, 100)
    rec = json.loads(render_stats(stats, NDJSON))
    assert rec["record"] == "witness_stats"
    assert rec["histogram"] == {"1": 36, "2": 1}
    assert rec["max_first_witness_index"] == [2, 30, 2]
    lines = render_stats(stats, CSV).splitlines()
    assert len(lines) == 2
    assert lines[1].startswith("witness_stats,100,37,")
