import json

from conftest import FIXTURES
from src.cli import main
from src.ita.model import parse_ita


def _path(name):
    return str(FIXTURES / name)


def test_validate(capsys):
    assert main(["validate", _path("a1.ita")]) == 0
    assert capsys.readouterr().out.strip() == "ok"


def test_require_ita_minus_fails(capsys):
    assert main(["validate", _path("a2.ita"), "--require-ita-minus"]) == 1
    assert "frozen clock" in capsys.readouterr().out


def test_simulate(capsys):
    assert main(["simulate", _path("a1.ita"), _path("a1_run.txt")]) == 0
    assert "(a,7/10)(b,27/20)" in capsys.readouterr().out


def test_reach_json(capsys):
    assert main(["--json", "reach", _path("a1.ita"), "--target", "q2"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["command"] == "reach"
    assert payload["reachable"] is True


def test_reach_incomplete(capsys):
    assert main(["reach", _path("a1.ita"), "--target", "q2", "--method", "bounded", "--depth", "1"]) == 2


def test_check(capsys):
    assert main(["check", _path("a1.ita"), "--formula", "E true U{>=2} q2"]) == 1
    assert capsys.readouterr().out.startswith("false")


def test_to_ita_minus_writes_output(tmp_path, capsys):
    out = tmp_path / "a2_minus.ita"
    assert main(["to-ita-minus", _path("a2.ita"), "-o", str(out)]) == 0
    assert len(parse_ita(out.read_text(encoding="utf-8")).states) == 6


def test_untimed_dot(capsys):
    assert main(["untimed", _path("a1.ita"), "--dot"]) == 0
    assert "digraph" in capsys.readouterr().out


def test_missing_file(capsys):
    assert main(["validate", _path("missing.ita")]) == 3
    assert capsys.readouterr().out.startswith("error:")


def test_validate_complete_resets(tmp_path, capsys):
    model = tmp_path / "drop.ita"
    model.write_text(
        "ita drop { clocks 3; state a level 3 policy lazy initial; state b level 1 policy lazy final;"
        " trans a -> b on go; }",
        encoding="utf-8",
    )
    assert main(["validate", str(model)]) == 1
    assert "clock 2 above level must be reset" in capsys.readouterr().out
    assert main(["validate", str(model), "--complete-resets"]) == 0
    assert "do x2 := 0, x3 := 0;" in capsys.readouterr().out


def test_classgraph_dump_expressions(capsys):
    assert main(["classgraph", _path("a1.ita"), "--dump-expressions"]) == 0
    out = capsys.readouterr().out
    assert "E1[0] x1  # initial" in out
    assert "E2[2] -1/2*x1 + 1  # guard" in out
    assert "# level-difference" in out


def test_classgraph_dump_expressions_with_formula(capsys):
    assert main(["classgraph", _path("a1.ita"), "--formula", "EF x2 > x1", "--dump-expressions"]) == 0
    out = capsys.readouterr().out
    assert "E2[3] x1  # formula" in out
    assert "2/3" in out


def test_to_ita_minus_expression_cap(capsys):
    assert main(["--json", "to-ita-minus", _path("a2.ita"), "--max-exprs", "1"]) == 4
    payload = json.loads(capsys.readouterr().out)
    assert payload["error"]["kind"] == "ExpressionCapExceeded"
    assert payload["error"]["limit"] == 1


def test_parallel_runs_match_sequential(capsys):
    for argv in (["reach", _path("a2.ita"), "--target", "q5", "--method", "bounded", "--depth", "8"],
                 ["classgraph", _path("a1.ita")],
                 ["check", _path("a1.ita"), "--formula", "E true U{<=2} q2"]):
        code = main(["--json"] + argv)
        sequential = json.loads(capsys.readouterr().out)
        assert main(["--json", "--jobs", "3"] + argv) == code
        assert json.loads(capsys.readouterr().out) == sequential
