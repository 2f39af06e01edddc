from __future__ import annotations

import json

from orbitcert.cli import main

COE_M = "5*2^inf,3^inf"
COE_N = "2^inf,5*3^inf"
SWAP_M = "2*5^inf,3*5^inf"
SWAP_N = "3*5^inf,2*5^inf"


def test_coe_example_exits_zero(capsys):
    assert main(["coe", COE_M, COE_N]) == 0
    out = capsys.readouterr().out
    assert "orbit equivalent" in out
    assert '"kind": "coe"' in out


def test_coe_trivial_pair(capsys):
    assert main(["coe", "2^inf", "2^inf"]) == 0
    assert "1*M0 = 1*N0" in capsys.readouterr().out


def test_coe_negative_exits_one(capsys):
    assert main(["coe", "2^inf", "3^inf"]) == 1
    assert "not orbit equivalent" in capsys.readouterr().out


def test_coe_parse_error_exits_two(capsys):
    assert main(["coe", "2^inf", "bogus"]) == 2
    err = capsys.readouterr().err
    assert "error:" in err


def test_conj_example_exits_one(capsys):
    assert main(["conj", COE_M, COE_N]) == 1
    assert "not conjugate" in capsys.readouterr().out


def test_conj_swap_exits_zero(capsys):
    assert main(["conj", SWAP_M, SWAP_N]) == 0
    assert "L=5^inf" in capsys.readouterr().out


def test_conj_identical_exits_zero(capsys):
    assert main(["conj", "6*2^inf*3^inf", "6*2^inf*3^inf"]) == 0
    capsys.readouterr()


def test_kinv_listing(capsys):
    assert main(["kinv", "2^inf"]) == 0
    out = capsys.readouterr().out
    assert "rank: 1" in out
    assert out.count("class {") == 2
    payload = json.loads(out.strip().splitlines()[-1])
    assert payload["total"] == "2^inf"


def test_eig_output(capsys):
    assert main(["eig", "3*2^inf", "3"]) == 0
    out = capsys.readouterr().out
    assert "T(2^inf)" in out


def test_counterexample_exits_zero(capsys):
    assert main(["counterexample", "2", "3", "5"]) == 0
    out = capsys.readouterr().out
    assert out.count("[pass] certified") == 4
    assert "[cited, not machine-checked]" in out


def test_counterexample_bad_inputs_exit_two(capsys):
    assert main(["counterexample", "2", "2", "5"]) == 2
    assert "error:" in capsys.readouterr().err


def test_witness_roundtrips_through_verify(tmp_path, capsys):
    path = tmp_path / "w.json"
    assert main(["witness", "coe", COE_M, COE_N,
                 "--level", "3", "--radius", "4", "--out", str(path)]) == 0
    capsys.readouterr()
    # passes at the embedded budget and below it
    assert main(["verify", str(path)]) == 0
    assert "verification passed" in capsys.readouterr().out
    assert main(["verify", str(path), "--level", "2", "--radius", "3"]) == 0
    capsys.readouterr()
    # refuses above the embedded level
    assert main(["verify", str(path), "--level", "5"]) == 2
    assert "materialized" in capsys.readouterr().err


def test_conj_witness_roundtrips_through_verify(tmp_path, capsys):
    path = tmp_path / "cw.json"
    assert main(["witness", "conj", SWAP_M, SWAP_N,
                 "--level", "3", "--radius", "4", "--out", str(path)]) == 0
    capsys.readouterr()
    assert main(["verify", str(path)]) == 0
    capsys.readouterr()


def test_witness_on_negative_pair_exits_one(capsys):
    assert main(["witness", "conj", COE_M, COE_N]) == 1
    assert "not conjugate" in capsys.readouterr().out


def test_verify_tampered_exits_one(tmp_path, capsys):
    path = tmp_path / "w.json"
    assert main(["witness", "coe", "2^inf", "2^inf",
                 "--level", "3", "--radius", "4", "--out", str(path)]) == 0
    cert = json.loads(path.read_text())
    cert["payload"]["equivalent"] = False
    path.write_text(json.dumps(cert, sort_keys=True, indent=2))
    capsys.readouterr()
    assert main(["verify", str(path)]) == 1
    assert "FAILED" in capsys.readouterr().out


def test_verify_missing_file_exits_two(capsys):
    assert main(["verify", "/nonexistent/cert.json"]) == 2
    assert "error:" in capsys.readouterr().err


def test_verify_garbage_file_exits_two(tmp_path, capsys):
    path = tmp_path / "junk.json"
    path.write_text("not json at all")
    assert main(["verify", str(path)]) == 2
    assert "error:" in capsys.readouterr().err


def test_selftest_smoke(capsys):
    assert main(["selftest", "--seed", "3", "--count", "8"]) == 0
    out = capsys.readouterr().out
    assert "selftest passed" in out
    assert "cohomology-roundtrip: pass" in out
