"""
Tests for the command line and the reasoning service behind it
"""

import json

import pytest

from config import Config
from main import cli
from parsing.theory_parser import parse_theory

SWITCHED_TWICE = "switch(I)@1; switch(I)@2"


def invoke(runner, *args):
    return runner.invoke(cli, [str(arg) for arg in args], obj={})


def records(result):
    return [json.loads(line) for line in result.output.splitlines() if line.startswith("{")]


# ==== CHECK AND COMPILE ====

@pytest.mark.parametrize("name", ["traffic.tbat", "falling_ball.tbat"])
def test_check_samples(runner, samples, name):
    result = invoke(runner, "check", samples / name)
    assert result.exit_code == Config.EXIT_OK, result.output
    assert "0 errors" in result.output


def test_check_reports_contradiction(runner, tmp_path, traffic_text):
    broken = tmp_path / "broken.tbat"
    broken.write_text(traffic_text.replace("Red(I, in1, S0);\n", "Red(I, in1, S0);\n    !Red(I, in1, S0);\n"),
                      encoding="utf-8")
    result = invoke(runner, "check", broken)
    assert result.exit_code == Config.EXIT_FAILURE
    assert "error contradictory-facts" in result.output
    assert "Red(I, in1) / !Red(I, in1)" in result.output


def test_parse_error_exit_code(runner, tmp_path):
    broken = tmp_path / "broken.tbat"
    broken.write_text("theory broken;\nsorts { Obj = {o1}; }\n}\n", encoding="utf-8")
    result = invoke(runner, "check", broken)
    assert result.exit_code == Config.EXIT_FAILURE
    assert "error syntax" in result.output


def test_missing_file(runner, tmp_path):
    result = invoke(runner, "check", tmp_path / "absent.tbat")
    assert result.exit_code == Config.EXIT_USAGE
    assert "error io" in result.output


def test_compile_with_appendix(runner, samples):
    result = invoke(runner, "--format", "structured", "compile", samples / "traffic.tbat", "--appendix")
    assert result.exit_code == Config.EXIT_OK, result.output
    found = records(result)
    [sea] = [r for r in found if r["kind"] == "sea"]
    assert (sea["fluent"], sea["branches"]) == ("que", 4)
    assert [r["name"] for r in found if r["kind"] == "appendix"] == ["PNFCA", "Cons", "ECA", "NNFCA", "SEA1", "SEA2"]
    assert any(r["kind"] == "init-ssa" and r["fluent"] == "que_init" for r in found)


# ==== QUERIES ====

def test_query_true(runner, samples):
    result = invoke(runner, "query", samples / "traffic.tbat", "que(I, in1, 3) = 70", "-n", SWITCHED_TWICE)
    assert result.exit_code == Config.EXIT_OK, result.output
    assert "true" in result.output.splitlines()


def test_query_false(runner, samples):
    result = invoke(runner, "query", samples / "traffic.tbat", "que(I, in1, 3) = 71", "-n", SWITCHED_TWICE)
    assert result.exit_code == Config.EXIT_FAILURE
    assert "false" in result.output.splitlines()


def test_query_structured_with_trace(runner, samples):
    result = invoke(runner, "--format", "structured", "query", samples / "traffic.tbat",
                    "que(I, in1, 3) < 95", "-n", SWITCHED_TWICE, "--trace")
    assert result.exit_code == Config.EXIT_OK, result.output
    found = records(result)
    steps = [r for r in found if r["kind"] == "trace-step"]
    assert steps and steps[0]["step"] == 1
    assert found[-1]["value"] is True


def test_query_without_text(runner, samples):
    result = invoke(runner, "query", samples / "traffic.tbat")
    assert result.exit_code == Config.EXIT_USAGE


def test_query_stop_at_outside_the_narrative(runner, samples):
    result = invoke(runner, "query", samples / "traffic.tbat", "Green(I, in1)", "-n", SWITCHED_TWICE,
                    "--stop-at", 5)
    assert result.exit_code == Config.EXIT_FAILURE
    assert "not a prefix" in result.output


@pytest.mark.parametrize("jobs", [1, 4])
def test_batch(runner, samples, jobs):
    result = invoke(runner, "--format", "structured", "query", samples / "traffic.tbat",
                    "--batch", samples / "traffic_queries.txt", "--jobs", jobs)
    assert result.exit_code == Config.EXIT_OK, result.output
    found = records(result)
    assert [r["line"] for r in found] == list(range(2, 10))
    assert all(r["kind"] == "verdict" and r["value"] for r in found)


def test_batch_reports_executability_warnings(runner, samples, tmp_path):
    queries = tmp_path / "queries.txt"
    queries.write_text("switch(I)@1; switch(I)@2; switch(I)@8 | Green(I, in1)\n", encoding="utf-8")
    structured = invoke(runner, "--format", "structured", "query", samples / "traffic.tbat", "--batch", queries)
    [record] = records(structured)
    assert (record["kind"], record["value"]) == ("verdict", False)
    assert [found["code"] for found in record["diagnostics"]] == ["natural-action"]
    human = invoke(runner, "query", samples / "traffic.tbat", "--batch", queries)
    assert "  warning natural-action:" in human.output


def test_batch_line_error(runner, samples, tmp_path):
    queries = tmp_path / "queries.txt"
    queries.write_text("switch(I)@1 | LArr(I, in1)\nswitch(I)@1 | Amber(I, in1)\n", encoding="utf-8")
    result = invoke(runner, "query", samples / "traffic.tbat", "--batch", queries)
    assert result.exit_code == Config.EXIT_FAILURE
    assert any(line.startswith("1: true") for line in result.output.splitlines())
    assert "2: error unknown-symbol" in result.output


def test_diagnose(runner, samples):
    result = invoke(runner, "diagnose", samples / "traffic.tbat", "que(I, in1, t) < 95", "-n", SWITCHED_TWICE)
    assert result.exit_code == Config.EXIT_OK, result.output
    assert "responsible: switch(I)@1; elapsed: 1/2 (infimum, not attained)" in result.output
    assert "prefix 1 [1, 2]: holds on (3/2, 2]" in result.output


# ==== HYBRID AUTOMATA ====

def test_ha_translate_to_file(runner, samples, tmp_path):
    target = tmp_path / "bounce.tbat"
    result = invoke(runner, "ha", "translate", samples / "bounce.ha", "-o", target)
    assert result.exit_code == Config.EXIT_OK, result.output
    assert parse_theory(target.read_text(encoding="utf-8")).name == "bounce"


def test_ha_trace(runner, samples):
    result = invoke(runner, "ha", "trace", samples / "bounce.ha", "-n", "trans(fall, fall, 0, 5)@1", "--tau", "3/2")
    assert result.exit_code == Config.EXIT_OK, result.output
    lines = [line for line in result.output.splitlines() if not line.startswith(("WARNING", "ERROR"))]
    assert lines[0] == "0: fall for 1 from (h=5, v=0)"
    assert lines[1] == "1: fall for 1/2 from (h=0, v=5)"
    assert lines[-1] == "ok"


def test_ha_invariance(runner, samples):
    narrative = "trans(fall, fall, 0, 5)@1"
    assert invoke(runner, "ha", "invariance", samples / "bounce.ha", "-n", narrative, "--tau", 2).exit_code == 0
    late = invoke(runner, "--format", "structured", "ha", "invariance", samples / "bounce.ha",
                  "-n", narrative, "--tau", 3)
    assert late.exit_code == Config.EXIT_FAILURE
    [record] = records(late)
    assert (record["ok"], record["condition"]) == (False, "c")


def test_ha_rejects_other_actions(runner, samples):
    result = invoke(runner, "ha", "trace", samples / "bounce.ha", "-n", "trans(fall, fall, 0, 5)@3/2", "--tau", 2)
    assert result.exit_code == Config.EXIT_FAILURE


def test_bad_rational(runner, samples):
    result = invoke(runner, "ha", "trace", samples / "bounce.ha", "--tau", "soon")
    assert result.exit_code == Config.EXIT_USAGE


# ==== SERVICE ====

def test_theories_are_cached_by_content(service, tmp_path, traffic_text):
    path = tmp_path / "traffic.tbat"
    path.write_text(traffic_text, encoding="utf-8")
    first = service.load_theory(path)
    assert service.load_theory(path) is first
    path.write_text(traffic_text + "\n// edited\n", encoding="utf-8")
    assert service.load_theory(path) is not first


def test_query_reports_narrative_warnings(service, traffic_compiled):
    outcome = service.query(traffic_compiled, "switch(I)@1; switch(I)@2; switch(I)@8", "Green(I, in1)")
    assert outcome.verdict.value is False
    assert [d.code for d in outcome.diagnostics] == ["natural-action"]


def test_translation_is_memoized(service, bounce):
    assert service.translated_theory(bounce) is service.translated_theory(bounce)


def test_regression_memo_is_shared_across_queries(service, traffic_compiled):
    """Test that a second query over the same theory reuses the regressed queue term"""
    first = service.query(traffic_compiled, SWITCHED_TWICE, "que(I, in1, 3) < 95")
    second = service.query(traffic_compiled, SWITCHED_TWICE, "que(I, in1, 3) = 70")
    assert "definition" in first.result.trace.rules()
    rules = second.result.trace.rules()
    assert rules[0] == "memo"
    assert "temporal-sea" not in rules
    assert (first.verdict.value, second.verdict.value) == (True, True)


def test_engines_share_one_memo_per_theory(service, traffic_compiled, falling_ball):
    assert service.engine(traffic_compiled).cache is service.engine(traffic_compiled, False).cache
    assert service.engine(traffic_compiled).cache is not service.engine(falling_ball).cache
