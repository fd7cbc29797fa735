import json

from conftest import fixture_text
from src import commands
from src.ita.model import is_ita_minus, parse_ita

A1 = fixture_text("a1.ita")
A2 = fixture_text("a2.ita")


def test_validate_ok():
    result = commands.cmd_validate(A1)
    assert result.exit_code == commands.EXIT_OK
    assert result.payload["valid"]
    assert result.payload["ita_minus"]
    assert result.text == "ok"


def test_validate_requiring_ita_minus():
    result = commands.cmd_validate(A2, require_ita_minus=True)
    assert result.exit_code == commands.EXIT_FALSE
    assert any("changes a frozen clock" in v for v in result.payload["violations"])
    assert not result.is_error


DROP_TWO_LEVELS = """
ita drop {
  clocks 3;
  state a level 3 policy lazy initial;
  state b level 1 policy lazy final;
  trans a -> b on go;
}
"""


def test_validate_reports_omitted_reset():
    result = commands.cmd_validate(DROP_TWO_LEVELS)
    assert result.exit_code == commands.EXIT_FALSE
    assert not result.is_error
    assert any("clock 2" in v for v in result.payload["violations"])


def test_validate_can_complete_resets():
    result = commands.cmd_validate(DROP_TWO_LEVELS, complete=True)
    assert result.exit_code == commands.EXIT_OK
    assert "trans a -> b on go do x2 := 0, x3 := 0;" in result.payload["ita"]
    assert commands.cmd_validate(result.payload["ita"]).exit_code == commands.EXIT_OK


def test_syntax_error_is_input_error():
    result = commands.cmd_validate("ita broken {\n  clocks one;\n}\n")
    assert result.exit_code == commands.EXIT_INPUT
    assert result.is_error
    assert result.payload["error"]["kind"] == "ItaSyntaxError"
    assert result.payload["error"]["line"] == 2


def test_simulate():
    result = commands.cmd_simulate(A1, fixture_text("a1_run.txt"))
    assert result.exit_code == commands.EXIT_OK
    assert result.payload["accepted"]
    assert result.payload["word"] == "(a,7/10)(b,27/20)"
    assert result.payload["duration"] == "27/20"


def test_simulate_failing_step_reports_index():
    result = commands.cmd_simulate(A1, "time 1\nfire a\n")
    assert result.exit_code == commands.EXIT_INPUT
    assert result.payload["error"]["step_index"] == 1


def test_reach_both_methods_agree():
    result = commands.cmd_reach(A1, "q2")
    assert result.exit_code == commands.EXIT_OK
    assert result.payload["reachable"]
    assert result.payload["classgraph"]["reachable"]
    assert result.payload["bounded"]["reachable"]
    assert result.payload["bounded"]["witness"]["final"]
    assert result.diagnostics == []


def test_reach_unreachable():
    result = commands.cmd_reach(fixture_text("a1_strengthened.ita"), "q2")
    assert result.exit_code == commands.EXIT_FALSE
    assert result.payload["reachable"] is False
    assert result.text == "q2 unreachable"


def test_reach_incomplete_bounded_search():
    result = commands.cmd_reach(A1, "q2", method="bounded", depth=1)
    assert result.exit_code == commands.EXIT_INCOMPLETE
    assert "incomplete" in result.text


def test_reach_through_translation_reports_general_bound():
    result = commands.cmd_reach(A2, "q5", method="bounded", depth=8)
    assert result.exit_code == commands.EXIT_OK
    assert result.payload["bounded"]["transformed"]
    assert "^" in result.payload["bounded"]["general_bound"]


def test_reach_unknown_target():
    result = commands.cmd_reach(A1, "nowhere")
    assert result.exit_code == commands.EXIT_INPUT
    assert result.payload["error"]["kind"] == "ModelError"


def test_to_ita_minus():
    result = commands.cmd_to_ita_minus(A2)
    assert result.exit_code == commands.EXIT_OK
    assert result.payload["states"] == 6
    assert result.payload["transitions"] == 5
    assert result.payload["origins"] == [0, 2, 3, 4, None]
    assert is_ita_minus(parse_ita(result.payload["ita"]))[0]


def test_state_cap_is_exit_code_4():
    result = commands.cmd_to_ita_minus(A2, max_states=3)
    assert result.exit_code == commands.EXIT_CAP
    assert result.payload["error"]["limit"] == 3


def test_class_cap_is_exit_code_4():
    result = commands.cmd_classgraph(A1, max_classes=2)
    assert result.exit_code == commands.EXIT_CAP
    assert result.payload["error"]["kind"] == "ClassCapExceeded"


def test_classgraph_with_formula_labels():
    result = commands.cmd_classgraph(A1, fmt="dot", formula="EF x2 > x1")
    assert result.text.startswith("digraph")
    assert len(result.payload["labels"]) == 1
    assert result.payload["classes"] > 0


def test_untimed_words():
    result = commands.cmd_untimed(A1, eliminate_epsilon=True, words=3)
    assert result.payload["words"] == ["a b"]


def test_check_clock_formula():
    result = commands.cmd_check(A1, "EF (q1 && x2 > x1)")
    assert result.exit_code == commands.EXIT_OK
    assert result.payload["logic"] == "tctl-c-int"
    assert result.payload["procedure"] == "class-graph"
    assert result.payload["classes"] > 0


def test_check_bounded_until_with_evidence():
    result = commands.cmd_check(A1, "E true U{<=2} q2")
    assert result.exit_code == commands.EXIT_OK
    assert result.payload["logic"] == "tctl-p"
    assert "evidence" in result.payload


def test_check_false_verdict():
    result = commands.cmd_check(A1, "E true U{>=2} q2")
    assert result.exit_code == commands.EXIT_FALSE
    assert result.text == "false (exhausted)"


def test_check_unfinished_search_never_reports_true():
    # q2 is reachable at time 1 + x2/2 <= 3/2, so the negation is false
    shallow = commands.cmd_check(A1, "!(E true U{<=2} q2)", depth=1)
    assert shallow.payload["complete"] is False
    assert shallow.exit_code == commands.EXIT_INCOMPLETE
    assert shallow.text.endswith("[bounded search incomplete]")

    full = commands.cmd_check(A1, "!(E true U{<=2} q2)")
    assert full.payload["complete"] is True
    assert full.exit_code == commands.EXIT_FALSE


def test_check_rejects_equality_bound():
    result = commands.cmd_check(A1, "E true U{=2} q2")
    assert result.exit_code == commands.EXIT_INPUT
    assert result.payload["error"]["kind"] == "FormulaError"


def test_payload_json_is_versioned():
    exported = json.loads(commands.cmd_validate(A1).to_json())
    assert exported["schema"] == commands.SCHEMA
    assert exported["command"] == "validate"
