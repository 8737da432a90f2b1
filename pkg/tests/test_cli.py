import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import DATA, EX2_S7, mismatches_exact, EX2_S4, printed
from unirigid import (extended_position_matrix, read_framework_file, read_sdpa,
                      validate_lateration_order, write_matrix_text)
from unirigid.cli import main, matrix_from_json, matrix_to_json

EX1, EX2 = str(DATA / "ex1.json"), str(DATA / "ex2.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_certify_second_example(tmp_path, capsys):
    out_path = tmp_path / "S4.json"
    code, out, _ = run(capsys, "certify", EX2, "-o", str(out_path), "--trace", str(tmp_path / "t.json"))
    assert code == 0
    report = json.loads(out)
    assert report["report"]["passed"]
    assert [(t["action"], t["position"]) for t in report["trace"]] == [("skip", 7), ("modify", 6), ("modify", 5)]
    S = matrix_from_json(json.loads(out_path.read_text()))
    assert mismatches_exact(S, EX2_S4) == []
    assert json.loads((tmp_path / "t.json").read_text()) == report["trace"]


def test_certify_then_verify(tmp_path, capsys):
    out_path = str(tmp_path / "S.json")
    assert run(capsys, "certify", EX1, "-o", out_path)[0] == 0
    code, out, _ = run(capsys, "verify", EX1, out_path)
    assert code == 0 and json.loads(out)["passed"]


def test_certify_path_graph(tmp_path, capsys):
    f = write(tmp_path, "path.json", json.dumps(
        {"dim": 2, "positions": [[0, 0], [1, 0], [2, 1], [3, 3]], "edges": [[1, 2], [2, 3], [3, 4]]}))
    assert run(capsys, "certify", f)[0] == 3


def test_certify_collinear_support(tmp_path, capsys, caplog):
    f = write(tmp_path, "col.json", json.dumps(
        {"dim": 2, "positions": [[0, 0], [4, 0], [0, 4], [2, 2], [5, 5]],
         "edges": [[1, 2], [1, 3], [2, 3], [1, 4], [2, 4], [3, 4], [2, 5], [3, 5], [4, 5]],
         "order": [1, 2, 3, 4, 5]}))
    code, out, _ = run(capsys, "certify", f)
    assert code == 4
    assert json.loads(out)["subset"] == [2, 3, 4]
    assert "[2, 3, 4]" in caplog.text


def test_full_scan_flag(tmp_path, capsys):
    f = write(tmp_path, "col.json", json.dumps(
        {"dim": 2, "positions": [[0, 0], [4, 0], [0, 4], [2, 2], [9, 1]],
         "edges": [[1, 2], [1, 3], [2, 3], [1, 4], [2, 4], [3, 4], [1, 5], [2, 5], [3, 5]]}))
    # the pipeline never touches {2,3,4}, the full scan does
    assert run(capsys, "certify", f)[0] == 0
    assert run(capsys, "certify", f, "--full-gp-scan")[0] == 4


def test_verify_prestress_fails(tmp_path, capsys):
    S7 = write(tmp_path, "S7.txt", write_matrix_text(printed(EX2_S7)))
    code, out, _ = run(capsys, "verify", EX2, S7)
    assert code == 5 and not json.loads(out)["offedge_ok"]


def test_verify_zero_matrix(tmp_path, capsys):
    Z = write(tmp_path, "Z.json", json.dumps(matrix_to_json(np.zeros((7, 7), dtype=int))))
    code, out, _ = run(capsys, "verify", EX2, Z)
    rep = json.loads(out)
    assert code == 5 and rep["null_ok"] and rep["offedge_ok"] and not rep["rank_ok"]


def test_verify_dimension_mismatch(tmp_path, capsys):
    Z = write(tmp_path, "Z.txt", "3 3\n" + "0 0 0\n" * 3)
    assert run(capsys, "verify", EX2, Z)[0] == 6


def test_parse_errors(tmp_path, capsys):
    bad = write(tmp_path, "bad.json", "{not json")
    assert run(capsys, "certify", bad)[0] == 2
    assert run(capsys, "certify", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "certify", EX2, "--order", "1,x")[0] == 2


def test_rational_backend_rejects_decimals(tmp_path, capsys):
    f = write(tmp_path, "dec.json", json.dumps(
        {"dim": 1, "positions": [[0.5], [1.5], [3.0]], "edges": [[1, 2], [1, 3], [2, 3]]}))
    assert run(capsys, "certify", f, "--backend", "rational")[0] == 2
    assert run(capsys, "certify", f)[0] == 0


def test_float_backend(capsys):
    code, out, _ = run(capsys, "certify", EX2, "--backend", "float")
    assert code == 0
    S = matrix_from_json(json.loads(out)["stress"])
    assert S.dtype == np.float64


def test_order_override_and_no_skip(capsys):
    code, out, _ = run(capsys, "certify", EX2, "--order", "1,2,3,4,5,6,7", "--no-skip")
    assert code == 0
    assert [t["action"] for t in json.loads(out)["trace"]] == ["modify"] * 3
    assert run(capsys, "certify", EX2, "--order", "7,6,5,4,3,2,1")[0] == 3


def test_gen(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert run(capsys, "gen", "--dim", "2", "-n", "7", "--seed", "1", "-o", str(out))[0] == 0
    F = read_framework_file(out)
    assert validate_lateration_order(F.edges, F.order, 2, 7).valid
    assert run(capsys, "gen", "--dim", "2", "-n", "2")[0] == 2


def test_gen_is_deterministic_and_env_seed(capsys, monkeypatch):
    a = run(capsys, "gen", "-d", "2", "-n", "9", "--seed", "4")[1]
    b = run(capsys, "gen", "-d", "2", "-n", "9", "--seed", "4")[1]
    assert a == b
    monkeypatch.setenv("STRESS_SEED", "4")
    assert run(capsys, "gen", "-d", "2", "-n", "9", "--seed", "99")[1] == a


def test_gen_anchored_then_certify(tmp_path, capsys):
    out = tmp_path / "net.json"
    assert run(capsys, "gen", "-d", "2", "-n", "5", "-m", "3", "--seed", "2", "-o", str(out))[0] == 0
    code, text, _ = run(capsys, "certify", str(out), "-o", str(tmp_path / "S.json"))
    assert code == 0 and json.loads(text)["kind"] == "anchored"
    assert run(capsys, "verify", str(out), str(tmp_path / "S.json"))[0] == 0


def test_export_sdp(tmp_path, capsys):
    out = tmp_path / "ex1.dat-s"
    code, text, _ = run(capsys, "export-sdp", EX1, "-o", str(out))
    assert code == 0 and json.loads(text)["constraints"] == 15
    assert read_sdpa(out.read_text()).m == 15


def test_export_anchored_pins_identity(tmp_path, capsys):
    net = tmp_path / "net.json"
    run(capsys, "gen", "-d", "2", "-n", "3", "-m", "3", "-o", str(net))
    code, text, _ = run(capsys, "export-sdp", str(net))
    p = read_sdpa(text)
    assert [c for c in p.constraints[:3]] == [[(1, 1, 1, 1)], [(1, 1, 2, 0.5)], [(1, 2, 2, 1)]]


def test_check_cert(tmp_path, capsys):
    from unirigid import gale_matrix, pre_stress
    F = read_framework_file(EX1)
    A = extended_position_matrix(F)
    Y = write(tmp_path, "Y.txt", write_matrix_text(A.T @ A))
    S = write(tmp_path, "S.txt", write_matrix_text(pre_stress(gale_matrix(F)).S))
    prob = tmp_path / "p.dat-s"
    run(capsys, "export-sdp", EX1, "-o", str(prob))
    for problem in (str(prob), EX1):
        code, out, _ = run(capsys, "check-cert", problem, Y, S)
        rep = json.loads(out)
        assert code == 0 and (rep["rank_primal"], rep["rank_dual"]) == (3, 4)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "unirigid", "certify", EX1], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["report"]["passed"]
