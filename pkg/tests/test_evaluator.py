"""
Tests for evaluation, thresholds, forward simulation, executability and
diagnosis
"""

from fractions import Fraction

import pytest

from exceptions import NarrativeError
from logic.formulas import Le, Lt, conj
from logic.sorts import REAL
from logic.terms import Var, num
from models.reports import DiagnosisStatus
from parsing.narrative import parse_narrative, parse_query
from services.diagnosis import TIME, diagnose
from services.evaluator import InitialModel, evaluate, evaluate_set
from services.regression_engine import RegressionEngine
from services.simulator import check_executable, forward_simulate
from services.threshold import solve_threshold

T = Var("t", REAL)


# ==== THRESHOLDS ====

def test_threshold_of_strict_guard_is_an_infimum():
    """Test that 3 < t on [0, 10] has infimum 3, not attained"""
    found = solve_threshold(Lt(num(3), T), Fraction(0), Fraction(10))
    assert found.value == 3
    assert not found.attained
    assert str(found) == "3 (infimum)"


def test_threshold_attained():
    found = solve_threshold(Le(num(3), T), Fraction(0), Fraction(10))
    assert (found.value, found.attained) == (Fraction(3), True)
    assert str(found) == "3"


def test_threshold_outside_the_window():
    assert solve_threshold(Lt(T, num(-1)), Fraction(0), Fraction(10)) is None
    assert solve_threshold(Le(num(20), T), Fraction(0), Fraction(10)) is None
    assert solve_threshold(Le(num(20), T), Fraction(0), None).value == 20


def test_truth_set_of_a_conjunction(traffic_compiled):
    model = InitialModel(traffic_compiled)
    holds = evaluate_set(conj(Lt(num(0), T), Lt(T, num(2))), T, model)
    assert str(holds) == "(0, 2)"


def test_evaluate_initial_facts(traffic_compiled):
    model = InitialModel(traffic_compiled)
    assert evaluate(parse_query(traffic_compiled, "Red(I, in1) & Green(I, in2)"), model)
    assert evaluate(parse_query(traffic_compiled, "flow(I, in1, out3) = 15"), model)
    assert evaluate(parse_query(traffic_compiled, "flow(I, in2, out2) = 0"), model)
    assert evaluate(parse_query(traffic_compiled, "exists r. lt(I, in1, r)"), model)
    assert not evaluate(parse_query(traffic_compiled, "forall r. lt(I, in1, r)"), model)


# ==== SIMULATION ====

def test_forward_simulation_of_traffic(traffic_compiled):
    sigma = parse_narrative(traffic_compiled, "switch(I)@1; switch(I)@2")
    valuation = forward_simulate(traffic_compiled, sigma, Fraction(3))
    assert valuation.value("que", "I", "in1") == 70
    assert valuation.value("que_init", "I", "in1") == 90
    assert valuation.value("Green", "I", "in1") is True
    assert valuation.value("Red", "I", "in2") is True
    assert valuation.value("que", "I", "in2") == 10


def test_falling_ball_height(falling_ball):
    """Test that a ball dropped at 1 from 80 is at 60 two seconds later"""
    sigma = parse_narrative(falling_ball, "drop(b1)@1")
    valuation = forward_simulate(falling_ball, sigma, Fraction(3))
    assert valuation.value("height", "b1") == 60
    assert valuation.value("vel", "b1") == -20
    assert valuation.value("height", "b2") == 45


def test_caught_ball_stays(falling_ball):
    sigma = parse_narrative(falling_ball, "drop(b1)@1; catch(b1)@3")
    valuation = forward_simulate(falling_ball, sigma, Fraction(10))
    assert valuation.value("height", "b1") == 60
    assert valuation.value("vel", "b1") == 0
    assert valuation.value("Falling", "b1") is False


def test_falling_ball_regression_agrees(falling_ball):
    engine = RegressionEngine(falling_ball)
    sigma = parse_narrative(engine.theory, "drop(b1)@1")
    for query, expected in (("height(b1, 3) = 60", True), ("height(b1, 5) = 0", True), ("height(b1, 6) < 0", True),
                            ("vel(b1, 2) = -10", True), ("height(b2, 3) = 45", True)):
        phi = parse_query(engine.theory, query, sit=sigma)
        assert evaluate(engine.regress(phi).formula, engine.model) is expected


def test_simulation_before_start(traffic_compiled):
    sigma = parse_narrative(traffic_compiled, "switch(I)@2")
    with pytest.raises(NarrativeError):
        forward_simulate(traffic_compiled, sigma, Fraction(1))


# ==== EXECUTABILITY ====

def test_executable_narrative(traffic_compiled):
    report = check_executable(parse_narrative(traffic_compiled, "switch(I)@1; switch(I)@2"), traffic_compiled)
    assert report.executable
    assert not report.diagnostics


def test_time_order(traffic_compiled):
    report = check_executable(parse_narrative(traffic_compiled, "switch(I)@2; switch(I)@1"), traffic_compiled)
    assert not report
    assert report.diagnostics[-1].code == "time-order"


def test_natural_action_too_early(traffic_compiled):
    """Test that emptying a full queue is not possible"""
    report = check_executable(parse_narrative(traffic_compiled, "empty(I, in1)@1"), traffic_compiled)
    assert not report.executable
    assert report.diagnostics[-1].code == "precondition"


def test_missed_natural_action(traffic_compiled):
    """Test that a green queue running empty before the next switch is reported"""
    sigma = parse_narrative(traffic_compiled, "switch(I)@1; switch(I)@2; switch(I)@8")
    report = check_executable(sigma, traffic_compiled)
    assert report.executable
    [warning] = [d for d in report.diagnostics if d.code == "natural-action"]
    assert not warning.is_error
    assert "due at 13/2" in warning.message
    assert warning.witness == "empty(I, in1, 13/2)"


def test_natural_action_on_time(traffic_compiled):
    sigma = parse_narrative(traffic_compiled, "switch(I)@1; switch(I)@2; empty(I, in1)@13/2; switch(I)@8")
    report = check_executable(sigma, traffic_compiled)
    assert report.executable
    assert not report.diagnostics


# ==== DIAGNOSIS ====

def _diagnose(theory, narrative: str, query: str, horizon=None):
    engine = RegressionEngine(theory)
    sigma = parse_narrative(engine.theory, narrative)
    phi = parse_query(engine.theory, query, sit=sigma, free={TIME.name: REAL})
    return diagnose(phi, sigma, engine.theory, horizon, TIME, engine)


def test_diagnosis_attributes_the_first_switch(traffic_compiled):
    """Test that que < 95 is due to the switch at 1, half a second later"""
    report = _diagnose(traffic_compiled, "switch(I)@1; switch(I)@2", "que(I, in1, t) < 95")
    assert report.status is DiagnosisStatus.ATTRIBUTED
    assert report.responsible_index == 1
    assert report.elapsed == Fraction(1, 2)
    assert not report.attained
    assert report.summary == "responsible: switch(I)@1; elapsed: 1/2"
    assert [str(v.holds) for v in report.prefixes] == ["{}", "(3/2, 2]", "[2, 2]"]


def test_diagnosis_at_a_later_horizon(traffic_compiled):
    report = _diagnose(traffic_compiled, "switch(I)@1; switch(I)@2", "que(I, in1, t) <= 50", Fraction(5))
    assert report.status is DiagnosisStatus.ATTRIBUTED
    assert report.responsible_index == 2
    # 90 - 20 (t - 2) <= 50 from t = 4
    assert report.elapsed == 2
    assert report.attained


def test_diagnosis_other_outcomes(traffic_compiled):
    narrative = "switch(I)@1; switch(I)@2"
    assert _diagnose(traffic_compiled, narrative, "que(I, in1, t) < 0").status is DiagnosisStatus.NEVER_TRUE
    assert _diagnose(traffic_compiled, narrative, "que(I, in1, t) > 95").status is \
        DiagnosisStatus.NOT_AT_HORIZON
    assert _diagnose(traffic_compiled, narrative, "que(I, in1, t) > 0").status is \
        DiagnosisStatus.INITIALLY_TRUE


def test_diagnosis_horizon_before_start(traffic_compiled):
    with pytest.raises(NarrativeError):
        _diagnose(traffic_compiled, "switch(I)@2", "que(I, in1, t) < 95", Fraction(1))
