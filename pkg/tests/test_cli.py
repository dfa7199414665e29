import json
import os

import pytest

from coprime_approx.cli import EXIT_INVALID, EXIT_OK, EXIT_PRECISION, main
from coprime_approx.io import canonical_bytes


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def body(out):
    return [line for line in out.splitlines() if not line.startswith("#")]


def test_cf_rows(capsys):
    code, out, _ = run(capsys, "cf", "--xi", "golden", "--depth", "5")
    assert code == EXIT_OK
    lines = body(out)
    assert lines[0] == "k,a_k,p_k,q_k,err,err_radius"
    assert len(lines) == 7
    assert lines[-1].startswith("5,1,13,8,0.0557280900008")


def test_construct_shows_non_coprime_candidates(capsys):
    code, out, _ = run(capsys, "construct", "--xi", "sqrt(2)", "--y", "0.5", "--kmax", "3", "--emit", "json")
    assert code == EXIT_OK
    rows = json.loads(out)["rows"]
    found = {(r["p"], r["q"]): r for r in rows}
    assert not found[(-8, 6)]["coprime"] and not found[(9, -6)]["coprime"]
    code, out, _ = run(capsys, "construct", "--xi", "sqrt(2)", "--y", "0.5", "--kmax", "3", "--require-coprime",
                       "--emit", "json")
    assert all(r["coprime"] for r in json.loads(out)["rows"])


def test_invalid_psi_exit_code(capsys):
    code, _, err = run(capsys, "measure", "--q", "3", "--psi", "1,0,-1", "--samples", "10000")
    assert code == EXIT_INVALID and "increasing" in err


def test_parse_error_exit_code(capsys):
    code, _, err = run(capsys, "cf", "--xi", "sqrt(", "--depth", "3")
    assert code == EXIT_INVALID and "error" in err


def test_precision_exhaustion_exit_code(capsys):
    code, _, err = run(capsys, "cf", "--xi", "e", "--depth", "200", "--bits", "32", "--max-bits", "64")
    assert code == EXIT_PRECISION and "precision" in err


def test_search_and_prime_floor(capsys):
    code, out, _ = run(capsys, "search", "--xi", "golden", "--y", "0", "--Q", "8")
    assert code == EXIT_OK
    assert body(out)[-1].startswith("8,-13,")
    code, out, _ = run(capsys, "search", "--xi", "sqrt(2)", "--y", "0.7", "--Q", "50", "--coprime", "--psi", "2,1")
    assert code == EXIT_OK and len(body(out)) > 1
    code, out, _ = run(capsys, "theorem3", "--xi", "sqrt(2)", "--y", "0.7", "--kmax", "6")
    assert code == EXIT_OK and len(body(out)) == 8


def test_orbit_count_exponent(capsys, tmp_path):
    code, out, _ = run(capsys, "orbit", "--x", "sqrt(2),1", "--y", "0.7,0.7", "--T", "200", "--mu", "1/2")
    assert code == EXIT_OK and body(out)[0].startswith("a,b,c,d,norm")
    code, out, _ = run(capsys, "count", "--x", "sqrt(2),1", "--annulus", "1,2", "--T-list", "1,30")
    assert code == EXIT_OK and body(out)[1] == "1,12,12.0,0"
    dest = tmp_path / "exp.json"
    code, out, _ = run(capsys, "exponent", "--x", "sqrt(2),1", "--y", "0.3,1.4", "--T", "100", "--emit", "json",
                       "--out", str(dest))
    assert code == EXIT_OK and out == ""
    assert "mu_hat" in json.loads(dest.read_text())["metadata"]


def test_measure_and_dichotomy_are_reproducible(capsys, tmp_path):
    outs = []
    for name in ("a", "b"):
        dest = tmp_path / f"{name}.csv"
        code, _, _ = run(capsys, "measure", "--q", "1,6", "--psi", "1/4,1", "--samples", "20000", "--seed", "5",
                         "--out", str(dest))
        assert code == EXIT_OK
        outs.append(canonical_bytes(dest.read_text()))
    assert outs[0] == outs[1]
    code, out, _ = run(capsys, "dichotomy", "--psi", "1,1", "--points", "200", "--windows", "4..5", "--emit", "jsonl")
    assert code == EXIT_OK and len(out.splitlines()) == 3


def test_max_bits_flag_and_environment(capsys, monkeypatch):
    monkeypatch.setenv("COPRIME_APPROX_MAX_BITS", "2048")
    code, out, _ = run(capsys, "cf", "--xi", "golden", "--depth", "2", "--emit", "json")
    assert json.loads(out)["metadata"]["precision"]["max_bits"] == 2048
    code, out, _ = run(capsys, "cf", "--xi", "golden", "--depth", "2", "--max-bits", "1024", "--emit", "json")
    assert json.loads(out)["metadata"]["precision"]["max_bits"] == 1024
    assert os.environ["COPRIME_APPROX_MAX_BITS"] == "2048"


def test_reproduce_single_criterion(capsys, tmp_path):
    dest = tmp_path / "results.json"
    code, out, _ = run(capsys, "reproduce", "--quick", "--criterion", "13", "--out", str(dest))
    assert code == EXIT_OK
    assert "[PASS] criterion 13" in out
    doc = json.loads(dest.read_text())
    assert [c["number"] for c in doc["criteria"]] == [13]


def test_bad_arguments(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["cf", "--xi", "golden"])
    assert exc.value.code == 2
