"""Exit codes, argument handling, and end-to-end command flows."""

import json

import pytest

from factorwitness import cli
from factorwitness.errors import (
    AnomalyFoundError,
    ConfigurationError,
    CounterexampleFoundError,
    ProofViolationError,
)
from factorwitness.report import parse_records


def run(*argv):
    return cli.run(list(argv))


# -- argument handling --------------------------------------------------------


def test_no_arguments_is_usage_error(capsys):
    assert run() == cli.EXIT_USAGE
    capsys.readouterr()


def test_unknown_command(capsys):
    assert run("frobnicate") == cli.EXIT_USAGE
    capsys.readouterr()


def test_odd_bound_rejected(capsys):
    assert run("verify", "--max", "101") == cli.EXIT_USAGE
    capsys.readouterr()


def test_version(capsys):
    assert run("--version") == 0
    assert "factorwitness" in capsys.readouterr().out


def test_help_exits_zero(capsys):
    assert run("--help") == 0
    capsys.readouterr()


def test_limit_below_max_rejected(capsys):
    assert run("verify", "--max", "1000", "--limit", "500") == cli.EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_resolve_workers_precedence(monkeypatch):
    monkeypatch.delenv(cli.WORKERS_ENV, raising=False)
    assert cli._resolve_workers(4) == 4
    monkeypatch.setenv(cli.WORKERS_ENV, "2")
    assert cli._resolve_workers(None) == 2
    assert cli._resolve_workers(5) == 5  # flag beats environment
    monkeypatch.setenv(cli.WORKERS_ENV, "banana")
    with pytest.raises(ConfigurationError):
        cli._resolve_workers(None)
    monkeypatch.setenv(cli.WORKERS_ENV, "0")
    with pytest.raises(ConfigurationError):
        cli._resolve_workers(None)


def test_bad_workers_env_is_usage_error(monkeypatch, capsys):
    monkeypatch.setenv(cli.WORKERS_ENV, "many")
    assert run("verify", "--max", "100") == cli.EXIT_USAGE
    capsys.readouterr()


# -- verify -------------------------------------------------------------------


def test_verify_stdout_parses(capsys):
    code = run("verify", "--max", "1000", "--workers", "1")
    captured = capsys.readouterr()
    assert code == cli.EXIT_OK
    s = parse_records(captured.out, "ndjson")
    assert (s.n_min, s.n_max) == (6, 1000)
    assert s.clean
    assert s.elapsed_seconds == 0.0  # stream carries no timing
    assert "verified [6, 1000]" in captured.err


def test_verify_reruns_are_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a.ndjson", tmp_path / "b.ndjson"
    assert run("verify", "--max", "2000", "--workers", "1", "--output", str(out1)) == 0
    assert run("verify", "--max", "2000", "--workers", "2", "--output", str(out2)) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_verify_csv_output(tmp_path):
    out = tmp_path / "out.csv"
    assert run(
        "verify", "--max", "1000", "--workers", "1",
        "--format", "csv", "--output", str(out),
    ) == 0
    s = parse_records(out, "csv")
    assert s.n_max == 1000


def test_verify_manifest(tmp_path):
    out = tmp_path / "out.ndjson"
    man = tmp_path / "manifest.json"
    assert run(
        "verify", "--max", "1000", "--workers", "1",
        "--output", str(out), "--manifest", str(man),
    ) == 0
    from factorwitness.report import RunManifest, summary_digest

    manifest = RunManifest.from_json(man.read_text())
    assert manifest.digest == summary_digest(parse_records(out, "ndjson"))
    assert manifest.job["n_max"] == 1000


def test_verify_unwritable_output(tmp_path, capsys):
    dest = tmp_path / "missing" / "out.ndjson"
    assert run("verify", "--max", "100", "--output", str(dest)) == cli.EXIT_IO
    capsys.readouterr()


def test_verify_checkpoint_stop_and_resume(tmp_path, capsys):
    ck = tmp_path / "ck.json"
    out = tmp_path / "out.ndjson"
    code = run(
        "verify", "--max", "20000", "--workers", "1",
        "--checkpoint", str(ck), "--checkpoint-interval", "1000",
        "--stop-after-blocks", "3", "--output", str(out),
    )
    assert code == cli.EXIT_OK  # a requested stop is not a failure
    assert ck.exists()
    assert not out.exists()
    assert "stopped on request" in capsys.readouterr().err
    code = run(
        "verify", "--max", "20000", "--workers", "1",
        "--checkpoint", str(ck), "--checkpoint-interval", "1000",
        "--output", str(out),
    )
    assert code == cli.EXIT_OK
    assert not ck.exists()
    assert parse_records(out, "ndjson").n_max == 20000
    capsys.readouterr()


def test_verify_checkpoint_mismatch(tmp_path, capsys):
    ck = tmp_path / "ck.json"
    run(
        "verify", "--max", "20000", "--workers", "1",
        "--checkpoint", str(ck), "--checkpoint-interval", "1000",
        "--stop-after-blocks", "1", "--output", str(tmp_path / "o"),
    )
    code = run(
        "verify", "--max", "10000", "--workers", "1",
        "--checkpoint", str(ck), "--checkpoint-interval", "1000",
    )
    assert code == cli.EXIT_USAGE
    capsys.readouterr()


def test_verify_sieve_cache_reuse_and_refresh(tmp_path, capsys):
    cache = tmp_path / "primes.bin"
    assert run("verify", "--max", "1000", "--sieve-cache", str(cache)) == 0
    assert cache.exists()
    stamp = cache.stat().st_mtime_ns
    assert run("verify", "--max", "500", "--sieve-cache", str(cache)) == 0
    assert cache.stat().st_mtime_ns == stamp  # covered: reused as-is
    assert run("verify", "--max", "2000", "--sieve-cache", str(cache)) == 0
    assert cache.stat().st_mtime_ns != stamp  # too small: rebuilt
    capsys.readouterr()


def test_verify_corrupt_cache_is_io_error(tmp_path, capsys):
    cache = tmp_path / "primes.bin"
    cache.write_bytes(b"junk")
    assert run("verify", "--max", "100", "--sieve-cache", str(cache)) == cli.EXIT_IO
    capsys.readouterr()


# -- failure exit codes (engine failures injected; real sweeps stay clean) ----


def test_counterexample_exit_code(monkeypatch, capsys):
    def boom(*a, **k):
        raise CounterexampleFoundError([(20, 3)])

    monkeypatch.setattr(cli, "verify_range", boom)
    assert run("verify", "--max", "100") == cli.EXIT_COUNTEREXAMPLE
    capsys.readouterr()


def test_anomaly_exit_code(monkeypatch, capsys):
    def boom(*a, **k):
        raise AnomalyFoundError([(8, 3)])

    monkeypatch.setattr(cli, "verify_range", boom)
    assert run("verify", "--max", "100") == cli.EXIT_ANOMALY
    capsys.readouterr()


def test_internal_error_exit_code(monkeypatch, capsys):
    def boom(*a, **k):
        raise ProofViolationError("3 < 2")

    monkeypatch.setattr(cli, "verify_range", boom)
    assert run("verify", "--max", "100") == cli.EXIT_FAILURE
    assert "internal error" in capsys.readouterr().err


# -- other subcommands --------------------------------------------------------


def test_edge_cases_output(capsys):
    assert run("edge-cases", "--max", "10000") == 0
    captured = capsys.readouterr()
    rows = [json.loads(line) for line in captured.out.splitlines()]
    assert [(r["n"], r["k"]) for r in rows] == [
        (12, 1), (30, 1), (30, 2), (84, 1),
        (246, 1), (732, 1), (2190, 1), (6564, 1),
    ]
    assert "8 equality case(s)" in captured.err


def test_edge_cases_below_family(capsys):
    assert run("edge-cases", "--max", "11") == 0
    captured = capsys.readouterr()
    assert captured.out == ""


def test_stats_output(capsys):
    assert run("stats", "--max", "100") == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["histogram"] == {"1": 36, "2": 1}
    assert rec["max_first_witness_index"] == [2, 30, 2]
    assert rec["max_witness_ratio"] == [1, 1, 12, 1]


def test_goldbach_output(capsys):
    assert run("goldbach", "--n", "98") == 0
    out = capsys.readouterr().out
    assert "98 = 19 + 79" in out


def test_goldbach_coverage_error(capsys):
    assert run("goldbach", "--n", "98", "--limit", "50") == cli.EXIT_COVERAGE
    capsys.readouterr()


def test_lemma_witness_output(capsys):
    assert run("lemma", "--n", "30", "--k", "2") == 0
    out = capsys.readouterr().out
    assert "Bertrand" in out
    assert "5 < 7 < 30" in out


def test_lemma_vacuous_output(capsys):
    assert run("lemma", "--n", "100", "--k", "2") == 0
    assert "vacuous" in capsys.readouterr().out


def test_lemma_invalid_k(capsys):
    # p_20 = 73 >= 30: no such instance
    assert run("lemma", "--n", "30", "--k", "20", "--limit", "1000") == cli.EXIT_USAGE
    capsys.readouterr()


def test_lemma_k_beyond_table(capsys):
    assert run("lemma", "--n", "30", "--k", "1000000") == cli.EXIT_COVERAGE
    capsys.readouterr()


def test_selftest(capsys):
    assert run("selftest", "--limit", "20000", "--sample", "2000") == 0
    err = capsys.readouterr().err
    assert err.count(": ok") == 4
    assert "FAIL" not in err
