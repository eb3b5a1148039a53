import csv
import io
import json
import shutil
import subprocess

import pytest

from sphrect.cli import dumps, main
from sphrect.netgraph import NetGraph, validate


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_classify_special(capsys):
    code, doc = run_json(capsys, "classify", "2,3,2,3")
    r = doc["result"]
    assert code == 0
    assert r["exists"] and r["is_special"] and r["first_type_count"] == 3 and len(r["nets"]) == 3
    assert doc["config"]["subcommand"] == "classify" and doc["config"]["angles"] == [2, 3, 2, 3]


def test_classify_absent_and_relabeled(capsys):
    _, doc = run_json(capsys, "classify", "0,0,0,0")
    assert doc["result"]["exists"] is False and doc["result"]["nets"] == []
    _, doc = run_json(capsys, "classify", "1,0,1,0")
    assert doc["result"]["exists"] is True
    assert doc["result"]["relabeled_as"] == [0, 1, 0, 1]


def test_net_dot(capsys):
    code, out = run(capsys, "net", "0,1,0,1", "--index", "0", "--format", "dot")
    assert code == 0
    assert out.startswith("// subcommand=")
    body = [l for l in out.splitlines() if not l.startswith("//")]
    verts = [l for l in body if "[label=" in l and "--" not in l]
    edges = [l for l in body if " -- " in l]
    # planar Euler: bounded faces = E - V + 1
    assert len(edges) - len(verts) + 1 == 4


def test_net_json_validates(capsys):
    code, doc = run_json(capsys, "net", "1,2,1,2", "--index", "1")
    assert code == 0 and doc["result"]["problems"] == []
    assert validate(NetGraph.from_json(doc["result"])) == []


def test_net_index_out_of_range(capsys):
    code, doc = run_json(capsys, "net", "1,2,1,2", "--index", "5")
    assert code == 2
    assert doc["error"]["type"] == "UsageError"


def test_bad_angles(capsys):
    with pytest.raises(SystemExit) as e:
        main(["classify", "1,2,x,4"])
    assert e.value.code == 2
    with pytest.raises(SystemExit):
        main(["classify", "1,2,3"])


def test_darboux(capsys):
    code, doc = run_json(capsys, "darboux", "--angles", "0,1,0,1", "--a", "1.1", "--lambda", "-0.3")
    assert code == 0 and doc["result"]["degree"] == 2 and doc["result"]["type"] == "first"


def test_darboux_error_record(capsys):
    code, doc = run_json(capsys, "darboux", "--angles", "0,1,0,1", "--a", "0.5", "--lambda", "0")
    assert code == 2 and "a must exceed 1" in doc["error"]["message"]


def test_solve_inside_family(capsys):
    code, doc = run_json(capsys, "solve", "--angles", "0,1,0,1", "--a", "1.1", "--grid", "400")
    roots = doc["result"]["roots"]
    assert code == 0 and len(roots) == 1
    assert roots[0]["residual"] < 1e-10 and "periods" in roots[0]


def test_solve_at_two(capsys):
    code, doc = run_json(capsys, "solve", "--angles", "0,1,0,1", "--a", "2")
    assert code == 0
    assert len(doc["result"]["roots"]) == 1


def test_trace_csv(capsys):
    code, out = run(capsys, "trace", "--angles", "0,1,0,1", "--branch", "0")
    assert code == 0
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(lines))))
    assert rows[0] == ["a", "lambda", "K", "theta", "residual"]
    K = [float(r[2]) for r in rows[1:]]
    assert len(K) > 10 and K == sorted(K)


def test_limits_three_five(capsys):
    code, doc = run_json(capsys, "limits", "--angles", "1,2,1,2")
    assert code == 0
    for method in ("Extrapolation", "DegenerateSC"):
        ks = sorted(r["K_crit"] for r in doc["result"]["limits"] if r["method"] == method)
        assert ks == pytest.approx([0.5433144, 1.193606], rel=1e-3)


def test_limits_one_three(capsys):
    code, doc = run_json(capsys, "limits", "--angles", "0,1,0,1", "--method", "sc")
    ks = [r["K_crit"] for r in doc["result"]["limits"]]
    assert ks == pytest.approx([0.630963], rel=1e-3)


def test_dumps_uses_seventeen_digits():
    text = dumps({"x": 0.1, "y": float("nan"), "z": [1.0, 2]})
    doc = json.loads(text)
    assert '"x": 0.10000000000000001' in text
    assert doc["y"] is None and doc["z"] == [1.0, 2]


def test_output_file(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert main(["classify", "0,1,0,1", "-o", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["result"]["first_type_count"] == 1


@pytest.mark.skipif(shutil.which("sphrect") is None, reason="console script not installed")
def test_console_script():
    p = subprocess.run(["sphrect", "classify", "0,1,0,1"], capture_output=True, text=True)
    assert p.returncode == 0 and json.loads(p.stdout)["result"]["exists"]
