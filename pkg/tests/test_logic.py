"""
Tests for terms, formulas, simplification and interval sets
"""

from fractions import Fraction

import pytest

from exceptions import SortError
from logic.classify import is_regressable, is_uniform_in
from logic.formulas import FALSE, TRUE, Eq, Exists, Le, Lt, Not, RelAtom, conj, disj, neg
from logic.intervals import Interval, IntervalSet
from logic.linear import is_linear_in, to_linear
from logic.render import render
from logic.simplify import UnaContext, defining_term, simplify
from logic.sorts import REAL, object_sort
from logic.substitution import free_vars, substitute
from logic.terms import S0, Action, Arith, Do, Num, Obj, Start, TimeOf, Var, do_chain, num, plus, times

INTER = object_sort("Inter")
I = Obj("I", INTER)
T = Var("t", REAL)
X = Var("x", REAL)


def switch(time) -> Action:
    return Action("switch", (I,), num(time))


# ==== TERMS ====

def test_arithmetic_rejects_non_real_arguments():
    """Test that arithmetic over an object constant is a sort error"""
    with pytest.raises(SortError):
        Arith("+", (I, num(1)))


def test_situation_prefixes_and_actions():
    """Test do-chain helpers"""
    sigma = do_chain([switch(1), switch(2)])
    assert sigma == Do(switch(2), Do(switch(1), S0))
    assert render(sigma) == "do(switch(I, 2), do(switch(I, 1), S0))"


def test_linear_normal_form_collects_coefficients():
    """Test that 2(t - 1) + t normalizes to 3t - 2"""
    form = to_linear(plus(times(num(2), Arith("-", (T, num(1)))), T))
    assert form.coefficient(T) == 3
    assert form.const == -2
    assert is_linear_in(plus(T, num(5)), T)
    assert not is_linear_in(times(T, T), T)


# ==== SIMPLIFICATION ====

def test_simplify_folds_ground_arithmetic():
    assert simplify(Eq(plus(num(1), num(2)), num(3))) == TRUE
    assert simplify(Lt(num(3), num(2))) == FALSE
    assert simplify(Le(num(2), num(2))) == TRUE


def test_simplify_start_of_do_is_action_time():
    """Test start(do(a, s)) -> time(a) -> the action's time argument"""
    sigma = Do(switch(Fraction(3, 2)), S0)
    assert simplify(Eq(Start(sigma), num(Fraction(3, 2)))) == TRUE
    assert simplify(TimeOf(switch(7))) == Num(Fraction(7))


def test_unique_names_for_actions():
    """Test that actions with different arguments or functors are different"""
    una = UnaContext(["switch", "empty"])
    assert simplify(Eq(switch(1), switch(2)), una) == FALSE
    assert simplify(Eq(switch(1), Action("empty", (I,), num(1))), una) == FALSE
    assert simplify(Eq(switch(1), switch(1)), una) == TRUE


def test_complementary_literals():
    green = RelAtom("Green", (I,), S0)
    assert simplify(conj(green, neg(green))) == FALSE
    assert simplify(disj(green, neg(green))) == TRUE


def test_exists_eliminates_defined_variable():
    """Test ∃x (x = t + 1 ∧ x < 5) -> t + 1 < 5"""
    phi = Exists(X, conj(Eq(X, plus(T, num(1))), Lt(X, num(5))))
    result = simplify(phi)
    assert X not in free_vars(result)
    assert simplify(substitute(result, T, num(3))) == TRUE
    assert simplify(substitute(result, T, num(4))) == FALSE


def test_defining_term_solves_linear_equations():
    """Test that 2x + 4 = t defines x as t/2 - 2"""
    value = defining_term(Eq(plus(times(num(2), X), num(4)), T), X)
    assert value is not None
    assert simplify(Eq(substitute(value, T, num(10)), num(3))) == TRUE
    assert defining_term(Lt(X, T), X) is None


# ==== CLASSIFICATION ====

def test_uniformity_and_regressability():
    green = RelAtom("Green", (I,), Do(switch(1), S0))
    assert is_uniform_in(RelAtom("Green", (I,), S0), S0)
    assert not is_uniform_in(green, S0)
    assert is_regressable(green, ["switch"])
    assert is_regressable(Not(green), ["switch"])


# ==== INTERVALS ====

def test_interval_set_normalizes_adjacent_pieces():
    """Test that [0, 1) ∪ [1, 2] is [0, 2]"""
    merged = IntervalSet.of(Interval(Fraction(0), Fraction(1), True, False),
                            Interval(Fraction(1), Fraction(2)))
    assert merged == IntervalSet.closed(0, 2)
    assert str(merged) == "[0, 2]"


def test_interval_set_complement_and_infimum():
    above = IntervalSet.above(Fraction(3, 2), closed=False)
    assert str(above) == "(3/2, inf)"
    assert above.infimum() == (Fraction(3, 2), False)
    assert above.complement() == IntervalSet.below(Fraction(3, 2), closed=True)
    assert IntervalSet.empty().infimum() is None


def test_interval_set_points_and_cover():
    pair = IntervalSet.point(1).union(IntervalSet.point(3))
    assert pair.points() == [Fraction(1), Fraction(3)]
    assert IntervalSet.closed(0, 5).covers(pair)
    assert not pair.covers(IntervalSet.closed(0, 5))
    assert IntervalSet.closed(0, 5).points() is None
