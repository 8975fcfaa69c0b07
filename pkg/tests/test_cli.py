import json
import math
import subprocess
import sys

import pytest

from bergman.cli import _config, build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_lattice(capsys):
    code, out, _ = run(capsys, "eval", "--k", "100", "--t", "50", "--method", "lattice")
    assert code == 0
    rec = json.loads(out)
    assert rec["method"] == "Lattice(b=2)"
    assert rec["k"] == 100 and rec["t"] == 50.0


def test_eval_not_a_lattice_point(capsys):
    code, _, err = run(capsys, "eval", "--k", "100", "--t", "51", "--method", "lattice")
    assert code == 2
    assert "RegimeOutOfRange" in err


def test_eval_outside_value(capsys):
    code, out, _ = run(capsys, "eval", "--k", "20", "--t", "1", "--method", "outside", "--json")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(20 / (2 * math.pi), rel=1e-12)


def test_eval_csv(capsys):
    code, out, _ = run(capsys, "eval", "--k", "30", "--t", "2", "--csv")
    assert code == 0
    header, row = out.splitlines()
    assert header.split(",")[:3] == ["k", "t", "method"]
    assert row.startswith("30,2,")


def test_eval_budget_exit(capsys):
    code, _, _ = run(capsys, "eval", "--k", "5000", "--t", "1e-9", "--method", "oracle")
    assert code == 3


@pytest.mark.parametrize("argv", [
    ["eval", "--k", "2", "--t", "1"],
    ["eval", "--k", "10", "--t", "-1"],
    ["eval", "--k", "10"],
    ["eval", "--k", "x", "--t", "1"],
    ["frobnicate"],
    ["sweep", "--k", "10", "--t-min", "5", "--t-max", "1", "--points", "3"],
    ["figure", "--profile", "neck"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 64


def test_sweep_byte_identical(tmp_path, capsys):
    args = ["sweep", "--k", "100", "--t-min", "0.5", "--t-max", "150", "--points", "25", "--log-spacing"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert len(lines) == 26 and lines[0].endswith(",reason")
    assert b"\r" not in a.read_bytes()


def test_sweep_records_errors_in_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--k", "100", "--t-min", "49", "--t-max", "51", "--points", "3",
                       "--method", "lattice")
    assert code == 0
    rows = out.splitlines()[1:]
    assert rows[1].split(",")[2] == "Lattice(b=2)"
    assert "RegimeOutOfRange" in rows[0] and "RegimeOutOfRange" in rows[2]


def test_rel_tol_precedence(capsys, monkeypatch):
    parser = build_parser()
    base = ["eval", "--k", "50", "--t", "0.5"]
    monkeypatch.delenv("BERGMAN_REL_TOL", raising=False)
    assert _config(parser.parse_args(base)).rel_tol == 1e-13
    monkeypatch.setenv("BERGMAN_REL_TOL", "1e-6")
    assert _config(parser.parse_args(base)).rel_tol == 1e-6
    assert _config(parser.parse_args(base + ["--rel-tol", "1e-9"])).rel_tol == 1e-9
    monkeypatch.setenv("BERGMAN_REL_TOL", "banana")
    code, _, err = run(capsys, *base)
    assert code == 64 and "BERGMAN_REL_TOL" in err
    monkeypatch.setenv("BERGMAN_REL_TOL", "2")
    assert run(capsys, *base)[0] == 64


def test_verify_json_and_exit(capsys):
    code, out, err = run(capsys, "verify", "--theorem", "T1_1b", "--k-list", "200", "--seed", "7")
    assert code == 0
    data = json.loads(out)
    assert {d["status"] for d in data} <= {"pass", "skip"}
    assert "T1_1b:" in err


def test_verify_failure_exit(capsys):
    code, _, err = run(capsys, "verify", "--theorem", "T1_4_lattice", "--k-list", "100")
    assert code == 1
    assert "FAIL T1_4_lattice" in err


def test_verify_skips(capsys):
    code, out, _ = run(capsys, "verify", "--theorem", "Cor_Stirling", "--k-list", "10")
    assert code == 0
    assert all(d["status"] == "skip" for d in json.loads(out))


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--theorem", "L_f1", "--k-list", "55,100", "--csv")
    assert code == 0
    assert out.splitlines()[0].startswith("theorem_id,k,t,part")


def test_figure_reference_periodic(capsys):
    code, out, _ = run(capsys, "figure", "--profile", "neck-reference", "--samples", "128")
    assert code == 0
    rows = [tuple(map(float, r.split(","))) for r in out.splitlines()[1:]]
    h = [r[1] for r in rows]
    assert max(abs(h[i] - h[i + 32]) for i in range(len(h) - 32)) <= 1e-12
    assert h.index(max(h)) % 32 == 0


def test_figure_neck(capsys):
    code, out, _ = run(capsys, "figure", "--profile", "neck", "--k", "10000", "--b", "100", "--samples", "4")
    assert code == 0
    assert len(out.splitlines()) == 6
    code, _, _ = run(capsys, "figure", "--profile", "neck", "--k", "10000", "--b", "2")
    assert code == 2


def test_surface_assumption3(capsys):
    code, out, _ = run(capsys, "surface", "--k", "23189", "--epsilon", "1", "--lambda", "0",
                       "--R", "0.5", "--d", "1")
    assert code == 1
    assert json.loads(out)["assumptions"]["a3"] is False


def test_surface_ok_and_wk_marker(capsys):
    code, out, _ = run(capsys, "surface", "--k", "100000", "--epsilon", "1", "--lambda", "0",
                       "--R", "0.5", "--d", "1", "--t", "1")
    assert code == 0
    data = json.loads(out)
    assert data["envelope_T16"] == "outside_W_k"
    assert data["envelope_T15"]["applicable"] is True
    assert data["dominance"]["I_gt_II"] and data["dominance"]["II_gt_III"]
    code, out, _ = run(capsys, "surface", "--k", "100000", "--epsilon", "1", "--lambda", "0",
                       "--R", "0.5", "--d", "1", "--t", "200")
    assert json.loads(out)["envelope_T16"]["applicable"] is True


def test_surface_bad_radius(capsys):
    code, _, _ = run(capsys, "surface", "--k", "100000", "--epsilon", "1", "--lambda", "0",
                     "--R", "0.7", "--d", "1")
    assert code == 64


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bergman", "eval", "--k", "200", "--t", "100"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["method"] == "Lattice(b=2)"
