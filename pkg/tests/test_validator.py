"""
Tests for theory validation and law consistency
"""

from parsing.theory_parser import parse_theory
from services.consistency import check_consistency
from services.theory_validator import validate_theory


def _codes(diagnostics, errors_only=False):
    return {d.code for d in diagnostics if d.is_error or not errors_only}


def _validate(text: str):
    return validate_theory(parse_theory(text))


def _find(diagnostics, code: str):
    found = [d for d in diagnostics if d.code == code]
    assert found, f"no {code} among {[str(d) for d in diagnostics]}"
    return found[0]


# ==== SAMPLES ====

def test_samples_validate_cleanly(traffic, falling_ball):
    """Test that the sample theories have no validation errors"""
    assert not _codes(validate_theory(traffic), errors_only=True)
    assert not _codes(validate_theory(falling_ball), errors_only=True)


def test_samples_are_consistent(traffic, falling_ball):
    assert not _codes(check_consistency(traffic), errors_only=True)
    ball = check_consistency(falling_ball)
    assert not _codes(ball, errors_only=True)
    # height is quadratic in t
    assert _find(ball, "nonlinear-law").is_error is False


# ==== INITIAL THEORY ====

def test_contradictory_facts(traffic_text):
    """Test that asserting and denying a fact is reported with both facts"""
    text = traffic_text.replace("Red(I, in1, S0);\n", "Red(I, in1, S0);\n    !Red(I, in1, S0);\n")
    found = _find(_validate(text), "contradictory-facts")
    assert found.is_error
    assert found.witness == "Red(I, in1) / !Red(I, in1)"


def test_duplicate_fact_is_a_warning(traffic_text):
    text = traffic_text.replace("Green(I, in2, S0);\n", "Green(I, in2, S0);\n    Green(I, in2, S0);\n")
    diagnostics = _validate(text)
    assert not _find(diagnostics, "duplicate-fact").is_error
    assert not _codes(diagnostics, errors_only=True)


def test_double_valued_fluent(traffic_text):
    text = traffic_text.replace("que_init(I, in1, S0) = 100;",
                                "que_init(I, in1, S0) = 100;\n    que_init(I, in1, S0) = 90;")
    found = _find(_validate(text), "double-valued")
    assert "que_init(I, in1) = 100" in found.witness


def test_missing_start(traffic_text):
    found = _find(_validate(traffic_text.replace("start(S0) = 0;", "")), "incomplete")
    assert found.message == "start(S0) is not given"


def test_missing_initial_value(traffic_text):
    found = _find(_validate(traffic_text.replace("que_init(I, in2, S0) = 30;", "")), "incomplete")
    assert found.witness == "que_init(I, in2, S0)"


def test_missing_static_value(traffic_text):
    """Test that a static function without a default needs every value"""
    text = traffic_text.replace("flow(_, _, _) = 0;", "")
    found = _find(_validate(text), "incomplete")
    assert found.witness.startswith("flow(I, ")


def test_violated_constraint_names_a_grounding(traffic_text):
    """Test that a lane without a signal state violates the state constraint"""
    found = _find(_validate(traffic_text.replace("Green(I, in2, S0);", "")), "constraint-violated")
    assert found.witness == "i=I, r=in2"


# ==== AXIOMS ====

def test_missing_precondition_is_a_warning(traffic_text):
    diagnostics = _validate(traffic_text.replace("switch(i, t): start(s) <= t;", ""))
    assert not _find(diagnostics, "missing-poss").is_error


def test_missing_successor_state_axiom_is_a_warning(traffic_text):
    line = ("LArr(i, r, do(a, s)) <-> a = switch(i, _) & Red(i, r, s) "
            "| LArr(i, r, s) & a != switch(i, _);")
    assert line in traffic_text
    diagnostics = _validate(traffic_text.replace(line, ""))
    assert not _find(diagnostics, "missing-ssa").is_error


def test_nonuniform_precondition(traffic_text):
    """Test that a precondition about a later situation is not uniform"""
    text = traffic_text.replace("switch(i, t): start(s) <= t;",
                                "switch(i, t): start(s) <= t & Green(i, in1, do(switch(i, t), s));")
    assert "non-uniform" in _codes(_validate(text), errors_only=True)


def test_nonlinear_law_is_a_warning(falling_ball):
    diagnostics = validate_theory(falling_ball)
    assert not _find(diagnostics, "nonlinear").is_error


STRATIFICATION_CYCLE = """
theory cycle;

sorts { Obj = {o1}; }
actions { go(Obj); }
fluents { temporal f(Obj); temporal g(Obj); }
poss { go(x, t): start(s) <= t; }
tca {
    f(x): true => y = f_init(x, s) + g(x, t, s) - g(x, start(s), s);
    g(x): true => y = g_init(x, s) + f(x, t, s) - f(x, start(s), s);
}
init {
    start(S0) = 0;
    f_init(o1, S0) = 0;
    g_init(o1, S0) = 0;
}
"""


def test_stratification_cycle():
    """Test that mutually dependent temporal fluents are rejected with the cycle"""
    found = _find(_validate(STRATIFICATION_CYCLE), "stratification")
    assert found.is_error
    assert found.witness == "f ≻ g ≻ f"


# ==== CONSISTENCY ====

def test_law_with_two_values(falling_ball_text):
    """Test that y * y = t - start(s) defines two values"""
    text = falling_ball_text.replace("y = vel_init(b, s) - 10 * (t - start(s))", "y * y = t - start(s)")
    found = _find(check_consistency(parse_theory(text)), "law-uniqueness")
    assert found.is_error
    assert found.witness.count("y=") == 2


def test_law_disagreeing_with_initial_value(falling_ball_text):
    text = falling_ball_text.replace("y = vel_init(b, s) - 10 * (t - start(s))",
                                     "y = vel_init(b, s) + 1 - 10 * (t - start(s))")
    found = _find(check_consistency(parse_theory(text)), "initial-agreement")
    assert found.is_error
    assert "vel(b1)" in found.message or "vel(b2)" in found.message


def test_law_without_solution(falling_ball_text):
    text = falling_ball_text.replace("y = vel_init(b, s) - 10 * (t - start(s))", "y = y + 1")
    assert "wdp" in _codes(check_consistency(parse_theory(text)), errors_only=True)
