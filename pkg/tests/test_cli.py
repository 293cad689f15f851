import json
import subprocess
import sys

import pytest

from branchsys.cli import main
from branchsys.corpus import example_kk, final_example, loop_rep, path3, path_rep, rose, rose_rep, single_edge, single_loop
from branchsys.graph import dump_graph
from branchsys.permutative import rep_to_json
from branchsys.scalars import Scalar


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, g in {
        "loop": single_loop(),
        "edge": single_edge(),
        "path": path3(),
        "kk": example_kk(),
        "final": final_example(),
        "rose2": rose(2),
    }.items():
        p = tmp_path / f"{name}.json"
        p.write_text(dump_graph(g))
        out[name] = str(p)
    import random

    for name, r in {
        "rose3rep": rose_rep(3, 12),
        "looprep": loop_rep(Scalar.root_of_unity(1, 4)),
        "edgerep": path_rep(single_edge(), random.Random(0)),
    }.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(rep_to_json(r)))
        out[name] = str(p)
    empty = tmp_path / "empty.json"
    empty.write_text('{"vertices": [], "edges": []}')
    out["empty"] = str(empty)
    out["dir"] = tmp_path
    return out


def run(capsys, *argv):
    code = main(list(argv))
    text = capsys.readouterr().out
    return code, (json.loads(text) if "--format" not in argv else text)


def test_analyze_loop(capsys, files):
    code, doc = run(capsys, "analyze", files["loop"])
    assert code == 0
    assert doc["result"]["condition_L"] == {"holds": False, "witness": ["e"]}


def test_analyze_empty(capsys, files):
    code, doc = run(capsys, "analyze", files["empty"])
    assert code == 0 and doc["verdicts"] == [] and doc["result"]["components"] == []


def test_analyze_final(capsys, files):
    _, doc = run(capsys, "analyze", files["final"])
    assert len(doc["result"]["components"]) == 3 and doc["result"]["P_simple"]["holds"]


@pytest.mark.parametrize(
    "key, case", [("edge", "all_levels"), ("path", "all_levels_plus_one"), ("kk", "not_applicable")]
)
def test_classify(capsys, files, key, case):
    code, doc = run(capsys, "classify", files[key])
    assert code == 0 and doc["result"]["classification"]["case"] == case


def test_levels_includes_decomposition(capsys, files):
    _, doc = run(capsys, "levels", files["path"])
    assert doc["result"]["decomposition"]["residual"] == ["v"]
    assert doc["result"]["classification"]["vbar"] == "v"


def test_branching_and_ck(capsys, files):
    out = str(files["dir"] / "sys.json")
    code, doc = run(capsys, "branching", files["rose2"], "--out", out)
    assert code == 0 and doc["verdicts"][0]["status"] == "pass"
    code, doc = run(capsys, "verify-ck", out, "--nonzero")
    assert code == 0 and [r["subject"] for r in doc["verdicts"]] == ["ck[standard]", "nonzero[standard]"]
    code, doc = run(capsys, "verify-ck", out, "--discretize", "50")
    assert code == 0 and doc["result"]["discrete_points"] == 50


def test_cycle_separate_loop(capsys, files):
    code, doc = run(capsys, "branching", files["loop"], "--mode", "cycle-separate")
    assert code == 0
    assert doc["result"]["composite"] == [{"type": "power", "source": "e", "target": "e", "exponent": [2, 1]}]


def test_cycle_mode_on_acyclic_graph(capsys, files):
    code = main(["branching", files["path"], "--mode", "cycle-collapse"])
    assert code == 2
    assert "no exitless cycle" in capsys.readouterr().err


def test_permutative_check(capsys, files):
    code, doc = run(capsys, "permutative", files["rose3rep"])
    assert code == 0 and doc["result"]["certificate"]["verdict"] == "permutative"
    code, doc = run(capsys, "permutative", files["looprep"])
    assert code == 1 and doc["result"]["certificate"]["product"] == [1, 4]


def test_permutative_run_has_transcript(capsys, files):
    code, doc = run(capsys, "permutative", files["edgerep"], "--action", "run")
    assert code == 0
    assert doc["result"]["certificate"]["transcript"][0].endswith("ChooseFree(v)")


def test_permutative_extract(capsys, files):
    code, doc = run(capsys, "permutative", files["rose3rep"], "--action", "extract")
    assert code == 0
    assert [r["subject"] for r in doc["verdicts"]] == ["axioms[extracted]", "intertwine"]
    assert len(doc["result"]["unitary"]) == 12


def test_plan_failure_is_verdict(capsys, files):
    p = files["dir"] / "kkrep.json"
    import random

    p.write_text(json.dumps(rep_to_json(path_rep(example_kk(), random.Random(1), max_len=2))))
    code, doc = run(capsys, "permutative", str(p), "--action", "plan", "--strategy", "levels")
    assert code == 1 and doc["negative"]


def test_text_format(capsys, files):
    code, text = run(capsys, "branching", files["rose2"], "--format", "text")
    assert code == 0 and text.startswith("branching: pass") and "[pass] 6:radon-nikodym" in text


def test_usage_errors(capsys, files, tmp_path):
    assert main(["analyze", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["analyze", str(bad)]) == 2
    assert main(["verify-ck", str(bad)]) == 2
    assert main(["nonsense"]) == 2
    assert main(["analyze", files["edge"], "--truncate", "0"]) == 2
    assert main(["branching", files["edge"], "--cycle", "e"]) == 2


def test_truncate_override(capsys, tmp_path):
    p = tmp_path / "fam.json"
    p.write_text(json.dumps({"vertices": ["v", "w"], "edges": [],
                             "infinite_families": [{"vertex": "v", "dst": "w", "truncate_at": 2}]}))
    _, doc = run(capsys, "analyze", str(p), "--truncate", "5")
    assert doc["result"]["edges"] == 5 and doc["result"]["infinite_emitters"] == ["v"]


def test_reports_are_byte_identical(files):
    cmd = [sys.executable, "-m", "branchsys", "permutative", files["edgerep"], "--action", "run", "--seed", "7"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and b"timing" not in a
    t = subprocess.run(cmd + ["--timing"], capture_output=True, check=True).stdout
    assert b"timing" in t
