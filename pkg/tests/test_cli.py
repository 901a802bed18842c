import csv
import io
import json
import math
import subprocess
import sys

import pytest

from sincmap.cli import main


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def test_integrate_catalog_json():
    code, text = run("integrate", "ex1", "--n", "64")
    assert code == 0
    d = json.loads(text)
    assert d["transform"] == "opt" and d["evaluations"] == 129
    assert abs(d["value"] + 2.04645) < 1e-5


def test_integrate_auto_n_csv():
    code, text = run("integrate", "ex5", "--transform", "de", "--out", "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and rows[0]["n"] == "4"
    assert float(rows[-1]["rel_error"]) < 1e-12


def test_integrate_adaptive(tmp_path):
    path = tmp_path / "gauss.json"
    path.write_text(json.dumps({"integrand": "exp(-x^2)", "domain": {"kind": "infinite"},
                                "reference": math.sqrt(math.pi)}))
    code, text = run("integrate", str(path), "--adaptive")
    d = json.loads(text)
    assert code == 0 and d["rel_error"] < 1e-14
    assert {"n", "error_estimate", "map", "poles"} <= set(d["iterations"][0])


def test_optimize_map_poles():
    code, text = run("optimize-map", "--pole", "0.5+0.5i", "--domain", "finite:0:1")
    d = json.loads(text)
    assert code == 0 and set(d) == {"u0", "u", "x", "residual"}
    assert abs(d["u0"] - math.pi / 4) < 1e-12


def test_optimize_map_catalog():
    code, text = run("optimize-map", "ex3")
    d = json.loads(text)
    assert code == 0 and abs(d["u0"] - 0.26725) < 1e-3 and len(d["u"]) == 3


def test_convergence_csv():
    code, text = run("convergence", "ex4", "--ns", "8", "16")
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "transform,n,evaluations,value,rel_error"
    assert [l.split(",")[0] for l in lines[1:]] == ["se", "se", "de", "de", "opt", "opt"]


def test_pade_poles():
    code, text = run("pade-poles", "ex4", "--transform", "opt", "--n", "64")
    d = json.loads(text)
    assert code == 0 and (d["r"], d["s"]) == (4, 8)
    assert any(abs(complex(*z) - (3 + 1j / 3)) < 1e-3 for z in d["poles"])


def test_bo_solve(tmp_path):
    summary = tmp_path / "s.json"
    code, text = run("bo-solve", "--n", "32", "--summary", str(summary))
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and len(rows) == 101 and list(rows[0]) == ["x", "y_exact", "y_computed"]
    s = json.loads(summary.read_text())
    assert set(s) == {"n", "transform", "sup_rel_error", "newton_iterations"}
    assert s["transform"] == "opt" and s["sup_rel_error"] < 1


def test_box_both():
    code, text = run("box", "--m", "2", "--method", "both", "--n", "24")
    d = json.loads(text)
    assert code == 0 and d["discrepancy"] < 1e-10


@pytest.mark.parametrize("argv", [
    ("integrate",),
    ("integrate", "ex1", "--bogus"),
    ("integrate", "nope"),
    ("box", "--m", "9", "--method", "tensor"),
    ("pade-poles", "ex4", "--n", "48"),
    ("optimize-map",),
    ("integrate", "missing.json"),
    ("convergence", "ex1", "--transform", "adaptive"),
])
def test_usage_errors_exit_one(argv):
    assert run(*argv)[0] == 1


def test_parse_error_exit_one(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"integrand": "2+*3", "domain": {"kind": "infinite"}}))
    assert run("integrate", str(path))[0] == 1


def test_numerical_failure_exit_two(tmp_path):
    path = tmp_path / "nan.json"
    path.write_text(json.dumps({"integrand": "log(x)", "domain": {"kind": "infinite"}}))
    assert run("integrate", str(path), "--transform", "de", "--n", "8")[0] == 2


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "sincmap.cli", "box", "--m", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert abs(json.loads(r.stdout)["reduced"] - 0.48499938727299484) < 1e-15
