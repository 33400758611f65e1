import json

import pytest

from trisys.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_kp_against_golden(capsys):
    code, out, _ = run(capsys, "kp", "--arity", "3", "--input", "catalog/ats1.ids", "--golden", "catalog/att1.ids")
    assert code == 0 and "golden catalog/att1.ids: pass" in out


def test_kp_golden_mismatch(capsys):
    code, out, _ = run(capsys, "kp", "--input", "ats1.ids", "--golden", "att2.ids")
    assert code == 1


def test_kp_json(capsys):
    code, out, _ = run(capsys, "kp", "--input", "assoc.ids", "--format", "json")
    assert code == 0 and len(json.loads(out)["deduped"]) == 5


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "variety", "--set", "ATT1", "--model", "matrix"],
        ["check", "variety", "--set", "ATT2", "--model", "free", "--gens", "5", "--deg", "5", "--mode", "generators"],
        ["check", "theorem", "--name", "asstojordan2"],
        ["check", "dialgebra", "--model", "differential"],
        ["check", "leibniz", "--model", "matrix", "--m", "3", "--m1", "2"],
        ["check", "variety", "--set", "ATT1", "--model", "matrix", "--mode", "sampled", "--seed", "3"],
    ],
)
def test_passing_checks(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, out + err


def test_json_report_without_timing(capsys):
    code, out, _ = run(capsys, "check", "variety", "--set", "JTD", "--format", "json", "--no-timing")
    data = json.loads(out)
    assert code == 0 and "elapsed" not in data and data["set"] == "JTD"


def test_usage_errors(capsys):
    assert run(capsys, "check", "variety", "--set", "ATT1", "--mode", "sampled")[0] == 2
    assert run(capsys, "check", "variety", "--set", "ATT1", "--p", "9")[0] == 2
    assert run(capsys, "check", "variety", "--set", "NOPE")[0] == 2
    assert run(capsys, "kp", "--input", "missing.ids")[0] == 2
    assert run(capsys, "check", "variety", "--set", "ATT1", "--model", "matrix", "--m", "3", "--cap", "10")[0] == 2
    assert run(capsys, "bogus")[0] == 2


def test_file_workflow(capsys, tmp_path):
    t = tmp_path / "t.json"
    assert run(capsys, "instance", "--kind", "att2", "--out", str(t))[0] == 0
    assert run(capsys, "check", "variety", "--set", "ATT2", "--from", str(t))[0] == 0
    lb = tmp_path / "lb.json"
    assert run(capsys, "derive", "leibts", "--from", str(t), "--out", str(lb))[0] == 0
    assert run(capsys, "check", "variety", "--set", "LEIBTS", "--from", str(lb))[0] == 0


def test_embed(capsys, tmp_path):
    out = tmp_path / "u.json"
    code, text, _ = run(capsys, "embed", "--kind", "first", "--model", "matrix", "--out", str(out))
    assert code == 0 and json.loads(out.read_text())["status"] == "pass"
    code, _, err = run(capsys, "embed", "--kind", "second", "--model", "matrix", "--out", str(tmp_path / "u2.json"))
    assert code == 1 and "well-defined" in err
    code, _, _ = run(capsys, "embed", "--kind", "second", "--star", "graph", "--model", "matrix", "--out", str(tmp_path / "g.json"))
    assert code == 0


def test_ann(capsys):
    code, out, _ = run(capsys, "ann", "--model", "matrix", "--via", "att2", "--ats", "ATS2")
    assert code == 0 and "dim 2" in out
    code, out, _ = run(capsys, "ann", "--model", "matrix", "--complement", "E11,E21,E22")
    assert code == 1


def test_leibniz_subspace(capsys):
    code, out, _ = run(capsys, "leibniz", "--subspace", "B1,B2,B3")
    assert code == 0
    assert "[B1,B3] = 1*B1" in out and "[B2,B3] = 4*B2" in out and "[B3,B3] = 1*B1" in out
