"""
Tests for the theory, automaton, narrative and query readers and the printer
"""

from fractions import Fraction

import pytest

from exceptions import NarrativeError, ParseError, UnsupportedFragmentError
from logic.formulas import FALSE, TRUE
from logic.render import render
from logic.terms import S0, Do, situation_actions
from models.theory import FluentKind
from parsing.ha_parser import parse_automaton
from parsing.narrative import format_narrative, parse_batch_line, parse_narrative, parse_query
from parsing.printer import print_theory
from parsing.theory_parser import parse_theory
from services.evaluator import evaluate
from services.hybrid import translate_automaton
from services.regression_engine import RegressionEngine
from services.sea_compiler import compile_theory


# ==== THEORIES ====

def test_parse_traffic_theory(traffic):
    """Test the declarations of the traffic sample"""
    assert traffic.name == "traffic"
    assert traffic.sorts["In"] == ("in1", "in2")
    assert set(traffic.actions) == {"switch", "empty"}
    assert [decl.functor for decl in traffic.natural_actions] == ["empty"]
    assert traffic.temporal_fluents == ["que"]
    assert traffic.fluents["que_init"].kind is FluentKind.INIT
    assert len(traffic.tcas["que"]) == 4
    assert traffic.initial.start == 0
    assert not traffic.is_compiled


def test_parse_falling_ball(falling_ball):
    assert falling_ball.temporal_fluents == ["vel", "height"]
    assert "vel" in falling_ball.effects
    assert "height" not in falling_ball.effects


def _expect_parse_error(text: str) -> ParseError:
    with pytest.raises(ParseError) as info:
        parse_theory(text)
    return info.value


def test_syntax_error_reports_position():
    """Test that a missing semicolon is reported with its line"""
    error = _expect_parse_error("theory t;\nsorts {\n    Obj = {o1}\n}\n")
    assert error.code == "syntax"
    assert error.line is not None


def test_unknown_symbol(traffic_text):
    error = _expect_parse_error(traffic_text.replace("Red(I, in1, S0);", "Amber(I, in1, S0);"))
    assert error.code == "unknown-symbol"


def test_time_dependent_context_is_rejected(traffic_text):
    """Test that a change axiom context mentioning t is refused"""
    mutated = traffic_text.replace("que(i, r): Red(i, r, s) => y = que_init(i, r, s);",
                                   "que(i, r): Red(i, r, s) & t > 1 => y = que_init(i, r, s);")
    assert _expect_parse_error(mutated).code == "context-time"


def test_duplicate_declaration(traffic_text):
    mutated = traffic_text.replace("Red(Inter, In);", "Red(Inter, In);\n    Red(Inter, In);", 1)
    assert _expect_parse_error(mutated).code == "duplicate"


def test_sort_mismatch(traffic_text):
    """Test that an incoming lane in an outgoing position is a sort error"""
    mutated = traffic_text.replace("lt(I, in1, out4);", "lt(I, in1, in2);")
    assert _expect_parse_error(mutated).code == "sort"


def test_temporal_fluent_initial_value_goes_through_init(traffic_text):
    mutated = traffic_text.replace("que_init(I, in1, S0) = 100;", "que(I, in1, 0, S0) = 100;")
    error = _expect_parse_error(mutated)
    assert "que_init" in error.message


# ==== PRINTER ====

@pytest.mark.parametrize("sample", ["traffic.tbat", "falling_ball.tbat"])
def test_printed_theory_is_a_fixpoint(samples, sample):
    """Test print(parse(print(T))) == print(T)"""
    printed = print_theory(parse_theory((samples / sample).read_text(encoding="utf-8")))
    assert print_theory(parse_theory(printed)) == printed


def test_printed_theory_gives_the_same_verdicts(traffic, traffic_compiled):
    """Test that the reprinted theory answers the sample queries the same way"""
    reprinted, _ = compile_theory(parse_theory(print_theory(traffic)))
    queries = (("switch(I)@1; switch(I)@2", "que(I, in1, 3) = 70"),
               ("switch(I)@1", "LArr(I, in1)"),
               ("switch(I)@1", "Green(I, in1)"),
               ("switch(I)@1", "que(I, in2, 2) < 20"))

    def answers(theory):
        engine = RegressionEngine(theory)
        found = []
        for narrative, query in queries:
            sigma = parse_narrative(theory, narrative)
            result = engine.regress(parse_query(theory, query, sit=sigma))
            found.append(evaluate(result.formula, engine.model))
        return found

    assert answers(reprinted) == answers(traffic_compiled) == [True, True, False, True]


def test_translated_automaton_is_a_fixpoint(bounce):
    """Test that the translation of an automaton prints back to itself"""
    theory = parse_theory(translate_automaton(bounce))
    printed = print_theory(theory)
    assert print_theory(parse_theory(printed)) == printed


# ==== NARRATIVES AND QUERIES ====

def test_narrative_round_trip(traffic):
    sigma = parse_narrative(traffic, "switch(I)@1; switch(I)@3/2")
    assert isinstance(sigma, Do)
    assert [step.time.value for step in situation_actions(sigma)] == [1, Fraction(3, 2)]
    assert format_narrative(sigma) == "switch(I)@1; switch(I)@3/2"
    assert parse_narrative(traffic, "") == S0


def test_narrative_errors(traffic):
    with pytest.raises(ParseError) as info:
        parse_narrative(traffic, "honk(I)@1")
    assert info.value.code == "unknown-symbol"
    with pytest.raises(ParseError):
        parse_narrative(traffic, "switch(in1)@1")


def test_query_fluents_default_to_the_narrative(traffic):
    """Test that a fluent without a situation refers to the narrative's end"""
    sigma = parse_narrative(traffic, "switch(I)@1")
    phi = parse_query(traffic, "Green(I, in1)", sit=sigma)
    assert render(phi) == "Green(I, in1, do(switch(I, 1), S0))"


def test_query_rejects_free_variables(traffic):
    with pytest.raises(ParseError) as info:
        parse_query(traffic, "que(I, in1, t) < 95")
    assert info.value.code == "unknown-symbol"


def test_batch_line():
    assert parse_batch_line("switch(I)@1 | Green(I, in1)") == ("switch(I)@1", "Green(I, in1)")
    assert parse_batch_line(" | que(I, in1, 0) = 100") == ("", "que(I, in1, 0) = 100")
    with pytest.raises(ParseError):
        parse_batch_line("switch(I)@1")


# ==== AUTOMATA ====

def test_parse_bounce(bounce):
    assert bounce.name == "bounce"
    assert bounce.variables == ("h", "v")
    assert bounce.mode_names == ("fall",)
    assert bounce.edges == [("fall", "fall")]
    assert len(bounce.mode("fall").invariant) == 1


def test_parse_traffic_light(traffic_light):
    assert traffic_light.mode_names == ("Red", "LArr", "Green", "RArr")
    assert ("RArr", "Red") in traffic_light.edges
    assert traffic_light.init[0].mode == "Red"


def test_automaton_undeclared_state():
    text = "automaton a { vars x; states p; edge p -> r { x := 0; } }"
    with pytest.raises(ParseError) as info:
        parse_automaton(text)
    assert info.value.code == "unknown-symbol"


def test_automaton_time_is_not_a_variable():
    with pytest.raises(ParseError):
        parse_automaton("automaton a { vars t; states p; }")


def test_state_named_like_generated_symbol(bounce):
    """Test that a state clashing with the translation's vocabulary is reported"""
    text = "automaton a { vars x; states Q; flow Q { x := x + t; } init Q { x = 0; } }"
    with pytest.raises(ParseError) as info:
        translate_automaton(parse_automaton(text))
    assert info.value.code == "reserved"


def test_nonpolynomial_flow_is_unsupported():
    text = "automaton a { vars x; states p; flow p { x := x + t*t*t; } init p { x = 0; } }"
    with pytest.raises(UnsupportedFragmentError):
        translate_automaton(parse_automaton(text))


def test_nonground_narrative_step(traffic):
    with pytest.raises((NarrativeError, ParseError)):
        parse_narrative(traffic, "switch(I)@que_init(I, in1, S0)")
