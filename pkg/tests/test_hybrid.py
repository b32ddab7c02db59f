"""
Tests for hybrid automata: translation into temporal theories, induced
trajectories and their checks, and invariance checked in the translated
theory.
"""

import random
from dataclasses import replace
from fractions import Fraction

import pytest

from exceptions import NarrativeError
from models.hybrid import Trajectory, TrajectoryElement
from parsing.ha_parser import parse_automaton
from parsing.narrative import parse_narrative
from services.hybrid import (
    build_trajectory, check_invariance, check_trajectory, ha_to_tbat, initial_state, translate_automaton,
)
from services.sea_compiler import compile_theory
from services.simulator import forward_simulate
from utils.cache import format_rational

BOUNCES = "trans(fall, fall, 0, 5)@1; trans(fall, fall, 0, 5/2)@2; trans(fall, fall, 0, 5/4)@5/2"

TRAFFIC_CYCLE = ("trans(Red, LArr, 140, 0)@20; trans(LArr, Green, 120, 0)@25; "
                 "trans(Green, RArr, 60, 0)@35; trans(RArr, Red, 55, 0)@40")

ANY_HEIGHT = """
automaton drop {
    vars h, v;
    states fall;
    flow fall { h := h + v*t - 5*t*t; v := v - 10*t; }
    inv fall { h >= 0; }
    edge fall -> fall when h = 0 & v < 0 { v := -1/2 * v; }
    init fall { h >= 0; v = 0; }
}
"""


@pytest.fixture(scope="module")
def bounce_theory(bounce):
    theory, diagnostics = compile_theory(ha_to_tbat(bounce))
    assert not any(d.is_error for d in diagnostics)
    return theory


# ==== TRANSLATION ====

def test_initial_state_from_equalities(bounce, traffic_light):
    assert initial_state(bounce) == ("fall", (Fraction(5), Fraction(0)))
    assert initial_state(traffic_light) == ("Red", (Fraction(100), Fraction(0)))


def test_translation_text(bounce):
    text = translate_automaton(bounce)
    assert "theory bounce;" in text
    assert "State = {fall}" in text
    assert "Edge(fall, fall) := true" in text
    assert "trans(State, State, Real, Real)" in text
    assert "temporal X_h()" in text
    assert "Q(S0) = fall" in text
    assert "X_h_init(S0) = 5" in text
    assert "X_v_init(S0) = 0" in text


def test_translation_with_explicit_initial_point(bounce):
    text = translate_automaton(bounce, initial=("fall", (Fraction(20), 0)), start=3)
    assert "X_h_init(S0) = 20" in text
    assert "start(S0) = 3" in text


def test_translated_theory_evolves_by_the_flow(bounce_theory):
    valuation = forward_simulate(bounce_theory, parse_narrative(bounce_theory, ""), Fraction(1, 2))
    # 5 - 5 (1/2)^2
    assert valuation.value("X_h") == Fraction(15, 4)
    assert valuation.value("X_v") == -5


def test_traffic_light_cycle(traffic_light):
    """Test that a full signal cycle returns to Red with the expected queue"""
    theory = ha_to_tbat(traffic_light)
    sigma = parse_narrative(theory, TRAFFIC_CYCLE)
    valuation = forward_simulate(theory, sigma, Fraction(41))
    assert valuation.value("Q") == "Red"
    assert valuation.value("X_q") == 57
    assert valuation.value("X_c") == 1


# ==== TRAJECTORIES ====

def test_bounce_trajectory(bounce, bounce_theory):
    sigma = parse_narrative(bounce_theory, BOUNCES)
    trajectory = build_trajectory(bounce, sigma, Fraction(11, 4), bounce_theory)
    assert [e.duration for e in trajectory.elements] == [1, 1, Fraction(1, 2), Fraction(1, 4)]
    assert [e.start for e in trajectory.elements] == [
        (5, 0), (0, 5), (0, Fraction(5, 2)), (0, Fraction(5, 4))]
    assert all(e.mode == "fall" for e in trajectory.elements)
    assert check_trajectory(bounce, trajectory).ok


def test_empty_narrative_and_zero_length_segment(bounce, bounce_theory):
    resting = build_trajectory(bounce, parse_narrative(bounce_theory, ""), Fraction(1), bounce_theory)
    assert [(e.duration, e.start) for e in resting.elements] == [(1, (5, 0))]
    sigma = parse_narrative(bounce_theory, "trans(fall, fall, 0, 5)@1")
    landed = build_trajectory(bounce, sigma, Fraction(1), bounce_theory)
    assert [e.duration for e in landed.elements] == [1, 0]
    assert check_trajectory(bounce, landed).ok


def test_translated_laws_have_one_branch_per_state(traffic_light):
    theory, _ = compile_theory(ha_to_tbat(traffic_light))
    assert len(theory.seas["X_q"].branches) == 4


def test_bounce_at_the_wrong_time(bounce, bounce_theory):
    sigma = parse_narrative(bounce_theory, "trans(fall, fall, 0, 5)@3/2")
    with pytest.raises(NarrativeError):
        build_trajectory(bounce, sigma, Fraction(2), bounce_theory)


def test_tau_before_the_last_action(bounce, bounce_theory):
    sigma = parse_narrative(bounce_theory, BOUNCES)
    with pytest.raises(NarrativeError):
        build_trajectory(bounce, sigma, Fraction(2), bounce_theory)


@pytest.fixture
def legal(bounce, bounce_theory) -> Trajectory:
    return build_trajectory(bounce, parse_narrative(bounce_theory, BOUNCES), Fraction(11, 4), bounce_theory)


def _mutate(trajectory: Trajectory, index: int, **changes) -> Trajectory:
    elements = list(trajectory.elements)
    elements[index] = replace(elements[index], **changes)
    return Trajectory(tuple(elements))


@pytest.mark.parametrize("index, changes, condition", [
    (0, {"duration": Fraction(-1)}, "a"),
    (0, {"duration": None}, "a"),
    (2, {"mode": "rise"}, "b"),
    (3, {"duration": Fraction(1)}, "c"),
    (0, {"start": (Fraction(5), Fraction(1))}, "d"),
    (1, {"start": (Fraction(0), Fraction(6))}, "e"),
])
def test_trajectory_conditions(bounce, legal, index, changes, condition):
    """Test that each broken run is rejected for the right reason"""
    verdict = check_trajectory(bounce, _mutate(legal, index, **changes))
    assert not verdict.ok
    assert verdict.condition == condition


def test_unbounded_final_element(bounce):
    """Test that a dropped ball that never bounces leaves its invariant"""
    falling = Trajectory((TrajectoryElement(None, "fall", (Fraction(5), Fraction(0))),))
    verdict = check_trajectory(bounce, falling)
    # h = 5 - 5 t^2 reaches 0 at t = 1
    assert verdict.condition == "c"
    assert verdict.instant == "1"


def test_invariance_in_the_theory(bounce, bounce_theory):
    sigma = parse_narrative(bounce_theory, BOUNCES)
    assert check_invariance(bounce, sigma, Fraction(11, 4), bounce_theory).ok
    late = check_invariance(bounce, sigma, Fraction(3), bounce_theory)
    assert not late.ok
    assert late.condition == "c"
    assert "11/4" in late.instant


def test_traffic_light_invariance(traffic_light):
    theory = ha_to_tbat(traffic_light)
    sigma = parse_narrative(theory, TRAFFIC_CYCLE)
    trajectory = build_trajectory(traffic_light, sigma, Fraction(50), theory)
    assert check_trajectory(traffic_light, trajectory).ok
    assert check_invariance(traffic_light, sigma, Fraction(50), theory).ok
    # Red must switch by c = 30
    assert check_invariance(traffic_light, sigma, Fraction(71), theory).condition == "c"


# ==== AGREEMENT OF THE TWO CHECKS ====

def _bounce_narrative(m: Fraction, bounces: int):
    """Legal bounces of a ball dropped from 5 m^2 and the next impact time"""
    time, speed, steps = m, 10 * m, []
    for _ in range(bounces):
        speed = speed / 2
        steps.append(f"trans(fall, fall, 0, {format_rational(speed)})@{format_rational(time)}")
        time += speed / 5
    last = Fraction(0) if not steps else time - speed / 5
    return "; ".join(steps), last, time


def test_trajectory_and_invariance_agree():
    """Test that the direct and the theory-based checks agree on 100 bounce narratives"""
    rng = random.Random(11)
    automaton = parse_automaton(ANY_HEIGHT)
    agreed = 0
    for _ in range(100):
        m = Fraction(rng.randint(1, 8), rng.choice((1, 2, 4)))
        theory = ha_to_tbat(automaton, initial=("fall", (5 * m * m, 0)))
        narrative, last, impact = _bounce_narrative(m, rng.randint(0, 3))
        sigma = parse_narrative(theory, narrative)
        if rng.random() < 0.5:
            tau = last + (impact - last) * Fraction(rng.randint(0, 8), 8)
        else:
            tau = impact + Fraction(rng.randint(1, 8), 8)
        direct = check_trajectory(automaton, build_trajectory(automaton, sigma, tau, theory))
        in_theory = check_invariance(automaton, sigma, tau, theory)
        assert direct.ok == in_theory.ok == (tau <= impact), f"m={m} {narrative} tau={tau}"
        assert direct.condition == in_theory.condition
        agreed += 1
    assert agreed == 100


@pytest.mark.parametrize("point", [
    (Fraction(-1), Fraction(0)),
    (Fraction(5), Fraction(1)),
    (Fraction(-1), Fraction(-2)),
])
def test_checks_agree_on_illegal_initial_points(point):
    """Test that a start outside Init is reported as d by both checks, also when it breaks Inv"""
    automaton = parse_automaton(ANY_HEIGHT)
    theory = ha_to_tbat(automaton, initial=("fall", point))
    sigma = parse_narrative(theory, "")
    direct = check_trajectory(automaton, build_trajectory(automaton, sigma, Fraction(1, 4), theory))
    in_theory = check_invariance(automaton, sigma, Fraction(1, 4), theory)
    assert (direct.ok, direct.condition) == (in_theory.ok, in_theory.condition) == (False, "d")
