import csv
import json
import subprocess
import sys

import pytest

from todaq.cli import EXIT_FAIL, EXIT_OK, EXIT_QUAD, EXIT_USAGE, RunConfig, main


def records(path):
    return [json.loads(l) for l in path.read_text().splitlines()]


def test_factorization_suite(tmp_path):
    out = tmp_path / "f.ndjson"
    assert main(["verify", "--suite", "factorization", "--rank", "2..5", "--out", str(out)]) == EXIT_OK
    recs = records(out)
    assert [r["rank"] for r in recs] == [2, 3, 4, 5]
    assert all(r["pass"] and r["residuals"] == {} for r in recs)


@pytest.mark.parametrize("suite,mutation", [("mn", "N:corner-sign"), ("mn", "M:corner-sign"),
                                            ("det", "drop-term=1"), ("recursive", "no-counterterm"),
                                            ("factorization", "lax-coupling"),
                                            ("kernels", "imaginary-kernel")])
def test_mutations_fail(tmp_path, suite, mutation):
    out = tmp_path / "m.ndjson"
    args = ["verify", "--suite", suite, "--mutate", mutation, "--out", str(out)]
    if suite in ("det", "kernels", "factorization"):
        args += ["--rank", "2"]
    if suite == "recursive":
        args += ["--k", "1"]
    assert main(args) == EXIT_FAIL
    assert not all(r["pass"] for r in records(out))


@pytest.mark.parametrize("suite", ["mn", "recursive", "limits", "kernels"])
def test_exact_suites_pass(tmp_path, suite):
    out = tmp_path / "s.ndjson"
    assert main(["verify", "--suite", suite, "--out", str(out)]) == EXIT_OK


def test_kernel_catalogue_jobs():
    jobs = RunConfig(["kernels"]).jobs()
    assert {j[0] for j in jobs} == {"kernels:twisted-a", "kernels:d-to-c",
                                   "kernels:d-to-cminus", "kernels:gamma-beta"}
    assert len(jobs) == 12


def test_golden_reports_two_printed_entries(tmp_path):
    out = tmp_path / "g.ndjson"
    assert main(["verify", "--suite", "golden", "--out", str(out)]) == EXIT_FAIL
    (rec,) = records(out)
    assert sorted(rec["residuals"]) == ["L[4,5]", "L[5,6]"]


@pytest.mark.parametrize("argv", [
    ["verify", "--suite", "nope"],
    ["verify", "--suite", "factorization", "--rank", "1..3"],
    ["verify", "--suite", "recursive", "--k", "0..1"],
    ["verify", "--suite", "mn", "--mutate", "drop-term"],
    ["verify", "--suite", "mn,det", "--mutate", "N:corner-sign"],
    ["hamiltonians", "--family", "D", "--rank", "1"],
    ["hamiltonians", "--family", "E", "--rank", "3"],
    ["eval", "d2", "--lambda", "0.3"],
    ["eval", "dn", "--n", "4", "--lambda", "0,0,0,0", "--x", "0,0,0,0"],
    ["frobnicate"],
])
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_workers_env_must_be_integer(monkeypatch):
    monkeypatch.setenv("TODAQ_WORKERS", "many")
    assert main(["verify", "--suite", "mn"]) == EXIT_USAGE


def test_workers_env_parallel_run(tmp_path, monkeypatch):
    monkeypatch.setenv("TODAQ_WORKERS", "2")
    out = tmp_path / "p.ndjson"
    assert main(["verify", "--suite", "factorization", "--rank", "2..3", "--out", str(out)]) == EXIT_OK
    assert len(records(out)) == 2


def test_eval_d2_grid_records(tmp_path):
    out = tmp_path / "d2.ndjson"
    assert main(["eval", "d2", "--lambda", "0.3,0.7", "--grid", "-1:1:3", "--out", str(out)]) == EXIT_OK
    recs = records(out)
    assert len(recs) == 9
    assert {tuple(r["x"]) for r in recs} == {(a, b) for a in (-1.0, 0.0, 1.0) for b in (-1.0, 0.0, 1.0)}


def test_eval_a1_csv(tmp_path):
    out = tmp_path / "a1.csv"
    assert main(["eval", "a1", "--nu", "0.25,0.5", "--y", "-1,0", "--format", "csv",
                 "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4
    assert all(abs(float(r["ratio_re"]) + 1) < 1e-8 for r in rows)


def test_eval_quadrature_failure_exit_code(tmp_path):
    out = tmp_path / "q.ndjson"
    code = main(["eval", "dn", "--n", "2", "--lambda", "0.3,0.7", "--x", "0.1,0.1",
                 "--tol", "1e-30", "--out", str(out)])
    assert code == EXIT_QUAD
    assert records(out)[0]["error"] == "quadrature"


def test_hamiltonians_records(tmp_path):
    out = tmp_path / "h.ndjson"
    assert main(["hamiltonians", "--family", "twistedA", "--rank", "2", "--out", str(out)]) == EXIT_OK
    recs = records(out)
    assert [r["k"] for r in recs if "k" in r] == [0, 1, 2]
    assert {r["u_power"] for r in recs if "u_power" in r} == {-1, 1}


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "todaq.cli", "verify", "--suite", "mn", "--rank", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout.splitlines()[0])["pass"] is True
