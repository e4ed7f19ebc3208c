import json
import math
import shutil
import subprocess
import sys

import pytest

from hardcore.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def c4(tmp_path):
    p = tmp_path / "c4.txt"
    p.write_text("4 4\n0 1\n1 2\n2 3\n0 3\n")
    return str(p)


def test_threshold(capsys):
    code, out, _ = run(capsys, "threshold", "--arity", "5", "--delta", "4.251419")
    rec = json.loads(out)
    assert code == 0
    assert rec["lambda_star"] == pytest.approx(0.937, abs=1e-3)
    assert rec["alpha"] == pytest.approx(4.325, abs=1e-3)


def test_oracle(capsys, c4, tmp_path):
    code, out, _ = run(capsys, "oracle", "--graph", c4, "--lambda", "1")
    assert code == 0 and json.loads(out)["log_Z"] == pytest.approx(math.log(7), rel=1e-12)
    b = tmp_path / "b.json"
    b.write_text(json.dumps({"occupied": [0], "unoccupied": []}))
    code, out, _ = run(capsys, "oracle", "--graph", c4, "--lambda", "1", "--boundary", str(b), "--vertex", "2")
    rec = json.loads(out)
    assert rec["log_Z"] == pytest.approx(math.log(2)) and rec["R_v"] == pytest.approx(1.0)


def test_branching(capsys, tmp_path):
    exp = tmp_path / "m.txt"
    code, out, _ = run(capsys, "branching", "--lattice", "z2", "--memory", "2", "--mode", "plain",
                       "--export", str(exp))
    assert code == 0 and json.loads(out)["gamma"] == pytest.approx(3.0, abs=1e-9)
    assert exp.read_text().splitlines()[0] == "5 5 16"
    code, out, _ = run(capsys, "branching", "--memory", "6", "--mode", "weitz-pruned", "--ordering", "all",
                       "--format", "csv")
    assert code == 0 and len(out.splitlines()) == 25


def test_table1_csv(capsys):
    code, out, _ = run(capsys, "table1", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "lattice,connective_constant,max_degree,alpha,lambda_star"
    assert len(lines) == 8 and lines[3].startswith("Z2,2.679193,4,2.730")


def test_text_and_json_precision(capsys):
    _, out, _ = run(capsys, "threshold", "--arity", "3", "--delta", "2.679193", "--format", "text")
    assert "lambda_star: 2.00705\n" in out
    _, out, _ = run(capsys, "threshold", "--arity", "3", "--delta", "2.679193")
    assert len(repr(json.loads(out)["lambda_star"])) > 12


def test_count_schema(capsys, c4):
    jsonschema = pytest.importorskip("jsonschema")
    code, out, _ = run(capsys, "count", "--graph", c4, "--lambda", "1", "--mu", "0.01")
    rec = json.loads(out)
    jsonschema.validate(rec, {"type": "object", "required": ["log_Z", "relative_error_bound", "nodes_expanded", "per_vertex"],
                              "properties": {"log_Z": {"type": "number"}, "relative_error_bound": {"type": "number"},
                                             "nodes_expanded": {"type": "integer"}, "per_vertex": {"type": "array"}}})
    assert math.exp(rec["log_Z"]) == pytest.approx(7, rel=0.01)


def test_other_subcommands(capsys, c4):
    code, out, _ = run(capsys, "marginal", "--graph", c4, "--vertex", "0", "--depth", "1")
    assert code == 0 and json.loads(out)["R_plus"] == 1.0
    code, out, _ = run(capsys, "marginal", "--graph", c4, "--vertex", "0", "--delta", "1e-6")
    assert json.loads(out)["R_hat"] == pytest.approx(0.4)
    code, out, _ = run(capsys, "saw", "--lattice", "z2", "--length", "4")
    assert json.loads(out)["counts"] == [4, 12, 36, 100]
    code, out, _ = run(capsys, "saw", "--graph", c4, "--vertex", "1", "--length", "3", "--format", "csv")
    assert out.splitlines()[1:] == ["1,2,2.0", "2,2,2.0", "3,2,1.8171205928321397"]
    code, out, _ = run(capsys, "connective", "--n", "300", "--d", "2", "--seed", "3", "--samples", "4")
    assert code == 0 and json.loads(out)["length"] == math.ceil(3 * math.log(300))
    code, out, _ = run(capsys, "decay", "--tree-arity", "2", "--lambda", "5", "--min-depth", "20",
                       "--max-depth", "25", "--format", "csv")
    assert out.splitlines()[0] == "depth,R_minus,R_plus,width" and len(out.splitlines()) == 7
    code, out, _ = run(capsys, "symmetric", "--arities", "2,8", "--repeat", "--depth", "4", "--lambda", "1")
    assert json.loads(out)["Delta"][0] == pytest.approx(4)
    code, out, _ = run(capsys, "certify", "--delta", "2", "--lambda", "1", "--arity", "3")
    rec = json.loads(out)
    assert rec["degree_free_holds"] and rec["bounded_degree_holds"]


def test_gnp_reproducible(capsys, tmp_path):
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "gnp", "--n", "200", "--d", "2", "--seed", "17")
        outs.append(out)
    assert code == 0 and outs[0] == outs[1]
    _, other, _ = run(capsys, "gnp", "--n", "200", "--d", "2", "--seed", "18")
    assert other != outs[0]
    path = tmp_path / "g.json"
    run(capsys, "gnp", "--n", "50", "--d", "2", "--seed", "1", "--format", "json", "--output", str(path))
    assert json.loads(path.read_text())["n"] == 50


def test_exit_codes(capsys, c4):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "threshold", "--arity", "3")[0] == 2
    assert run(capsys, "threshold", "--arity", "3", "--delta", "2", "--lambda", "-1")[0] == 2
    code, _, err = run(capsys, "threshold", "--arity", "1", "--delta", "0.5")
    assert code == 1 and "error" in err
    assert run(capsys, "oracle", "--graph", "/nonexistent/g.txt")[0] == 1
    assert run(capsys, "marginal", "--graph", c4, "--vertex", "9", "--depth", "2")[0] == 1
    assert run(capsys, "branching", "--memory", "12", "--state-cap", "10")[0] == 1
    assert run(capsys, "branching", "--memory", "4", "--lattice", "z3")[0] == 1


def test_console_script():
    exe = shutil.which("hardcore")
    cmd = [exe] if exe else [sys.executable, "-m", "hardcore"]
    res = subprocess.run(cmd + ["branching", "--memory", "2", "--format", "text"], capture_output=True, text=True)
    assert res.returncode == 0 and "gamma: 3\n" in res.stdout
