"""
Tests for temporal regression: golden queries over the traffic theory,
partial regression, traces, and agreement with forward simulation on
generated theories.
"""

import random
from fractions import Fraction

import pytest

from exceptions import NotRegressableError, StepLimitExceeded
from logic.classify import is_uniform_in
from logic.formulas import FALSE, TRUE, Le, Lt, RelAtom, iter_atoms
from logic.render import render
from logic.substitution import mentions
from logic.terms import S0, Start, situation_prefixes
from parsing.narrative import parse_narrative, parse_query
from services.evaluator import evaluate
from services.regression_engine import (
    RegressionEngine, partial_regress, regress, regress_with_trace, trace_records,
)
from services.simulator import forward_simulate
from utils.cache import format_rational

SWITCHED_TWICE = "switch(I)@1; switch(I)@2"


def _verdict(theory, narrative: str, query: str) -> bool:
    engine = RegressionEngine(theory)
    sigma = parse_narrative(engine.theory, narrative)
    result = engine.regress(parse_query(engine.theory, query, sit=sigma))
    assert is_uniform_in(result.formula, S0)
    return evaluate(result.formula, engine.model)


# ==== GOLDEN QUERIES ====

def test_queue_after_two_switches(traffic_compiled):
    """Test que(I, in1, 3) = 70 after switching at 1 and 2"""
    assert _verdict(traffic_compiled, SWITCHED_TWICE, "que(I, in1, 3) = 70")
    assert not _verdict(traffic_compiled, SWITCHED_TWICE, "que(I, in1, 3) = 71")
    assert _verdict(traffic_compiled, SWITCHED_TWICE, "que(I, in1, 3) < 95")


@pytest.mark.parametrize("narrative, query, expected", [
    ("", "que(I, in1, 0) = 100", True),
    ("", "que(I, in1, 50) = 100", True),
    ("switch(I)@1", "que(I, in1, 3/2) = 95", True),
    ("switch(I)@1", "que(I, in1, 3) = 80", True),
    ("switch(I)@1", "LArr(I, in1)", True),
    ("switch(I)@1", "que(I, in2, 1) = 15", True),
    (SWITCHED_TWICE, "Green(I, in1) & Red(I, in2)", True),
    (SWITCHED_TWICE, "que(I, in2, 5) = 10", True),
    (SWITCHED_TWICE, "que(I, in1, 2) = 90", True),
    (SWITCHED_TWICE, "RArr(I, in1)", False),
])
def test_traffic_queries(traffic_compiled, narrative, query, expected):
    assert _verdict(traffic_compiled, narrative, query) is expected


def test_regression_compiles_on_demand(traffic):
    """Test that an uncompiled theory is compiled by the engine"""
    sigma = parse_narrative(traffic, "switch(I)@1")
    formula = regress(parse_query(traffic, "LArr(I, in1)", sit=sigma), traffic)
    assert formula == TRUE


def test_precondition_regression(traffic_compiled):
    """Test that Poss of a switch before the start of the situation is false"""
    sigma = parse_narrative(traffic_compiled, "switch(I)@2")
    late = parse_query(traffic_compiled, "Poss(switch(I, 3), do(switch(I, 2), S0))", sit=sigma)
    early = parse_query(traffic_compiled, "Poss(switch(I, 1), do(switch(I, 2), S0))", sit=sigma)
    assert regress(late, traffic_compiled) == TRUE
    assert regress(early, traffic_compiled) == FALSE


def test_empty_precondition_at_s0(traffic_compiled):
    """Test that Poss(empty(I, in1, 2), S0) regresses to its precondition at S0"""
    poss = parse_query(traffic_compiled, "Poss(empty(I, in1, 2), S0)")
    symbolic = regress(poss, traffic_compiled, resolve_initial=False)
    assert is_uniform_in(symbolic, S0)
    bounds = [atom for atom in iter_atoms(symbolic) if isinstance(atom, (Le, Lt))
              and mentions(atom, lambda term: term == Start(S0))]
    assert bounds
    assert "que_init(I, in1, S0)" in render(symbolic)
    # the queue of a red lane stays at 100, so it cannot be emptied at 2
    assert evaluate(symbolic, RegressionEngine(traffic_compiled).model) is False


# ==== TRACE ====

def test_trace_names_the_rules(traffic_compiled):
    sigma = parse_narrative(traffic_compiled, SWITCHED_TWICE)
    result = regress_with_trace(parse_query(traffic_compiled, "que(I, in1, 3) = 70", sit=sigma),
                                traffic_compiled)
    rules = set(result.trace.rules())
    assert {"temporal-sea", "init-ssa"} <= rules
    records = trace_records(result)
    assert [record["step"] for record in records] == list(range(1, len(records) + 1))
    assert all(record["kind"] == "trace-step" for record in records)
    assert records[0]["before"] == render(result.query)


def test_trace_of_the_queue_chain(traffic_compiled):
    """Test the order and depth of the SEA and init-SSA rewrites for que(I, in1, 3) after two switches"""
    sigma = parse_narrative(traffic_compiled, SWITCHED_TWICE)
    result = regress_with_trace(parse_query(traffic_compiled, "que(I, in1, 3) < 95", sit=sigma), traffic_compiled)
    chain = [(record["rule"], record["depth"]) for record in trace_records(result)
             if record["rule"] in ("temporal-sea", "init-ssa")]
    assert chain == [
        ("temporal-sea", 2), ("init-ssa", 2),
        ("temporal-sea", 1), ("init-ssa", 1),
        ("temporal-sea", 0),
    ]
    assert trace_records(result)[0]["rule"] == "definition"
    assert trace_records(result)[-1]["rule"] == "simplify"


def test_step_limit(traffic_compiled):
    engine = RegressionEngine(traffic_compiled, step_limit=1)
    sigma = parse_narrative(traffic_compiled, SWITCHED_TWICE)
    with pytest.raises(StepLimitExceeded):
        engine.regress(parse_query(traffic_compiled, "que(I, in1, 3) = 70", sit=sigma))


# ==== PARTIAL REGRESSION ====

def test_partial_regression_stops_at_prefix(traffic_compiled):
    """Test that regressing to a prefix leaves fluents at the prefix untouched"""
    sigma = parse_narrative(traffic_compiled, SWITCHED_TWICE)
    middle = situation_prefixes(sigma)[1]
    phi = parse_query(traffic_compiled, "Green(I, in1)", sit=sigma)
    formula = partial_regress(phi, middle, traffic_compiled, resolve_initial=False)
    assert is_uniform_in(formula, middle)
    assert formula == RelAtom("LArr", phi.args, middle)


def test_partial_regression_is_equivalent(traffic_compiled):
    """Test that R[R^stop[phi]] agrees with R[phi]"""
    sigma = parse_narrative(traffic_compiled, SWITCHED_TWICE)
    middle = situation_prefixes(sigma)[1]
    engine = RegressionEngine(traffic_compiled)
    for query in ("que(I, in1, 3) = 70", "que(I, in1, 3) < 70", "Green(I, in1)"):
        phi = parse_query(traffic_compiled, query, sit=sigma)
        partial = engine.regress(phi, middle).formula
        assert evaluate(engine.regress(partial).formula, engine.model) == \
            evaluate(engine.regress(phi).formula, engine.model)


def test_partial_regression_keeps_the_initial_queue_at_the_prefix(traffic_compiled):
    sigma = parse_narrative(traffic_compiled, SWITCHED_TWICE)
    middle = situation_prefixes(sigma)[1]
    phi = parse_query(traffic_compiled, "que(I, in1, 3) < 95", sit=sigma)
    formula = partial_regress(phi, middle, traffic_compiled)
    assert is_uniform_in(formula, middle)
    assert "que_init(I, in1, do(switch(I, 1), S0))" in render(formula)


def test_stop_must_be_a_prefix(traffic_compiled):
    sigma = parse_narrative(traffic_compiled, "switch(I)@1")
    other = parse_narrative(traffic_compiled, "switch(I)@2")
    with pytest.raises(NotRegressableError):
        RegressionEngine(traffic_compiled).regress(parse_query(traffic_compiled, "Green(I, in1)", sit=sigma),
                                                   other)


def test_unresolved_initial_situation(traffic_compiled):
    """Test that without resolving S0 facts the result keeps fluents at S0"""
    sigma = parse_narrative(traffic_compiled, "switch(I)@1")
    phi = parse_query(traffic_compiled, "LArr(I, in1)", sit=sigma)
    symbolic = RegressionEngine(traffic_compiled, resolve_initial=False).regress(phi).formula
    assert symbolic == RelAtom("Red", phi.args, S0)
    assert evaluate(symbolic, RegressionEngine(traffic_compiled).model)


# ==== AGREEMENT WITH SIMULATION ====

def _queries(rng: random.Random, compiled, valuation, time: Fraction):
    """Comparisons with known answers read off the simulated valuation"""
    objects = compiled.sorts["Obj"]
    for _ in range(5):
        obj = rng.choice(objects)
        if rng.random() < 0.25:
            fluent = rng.choice(("P1", "P2"))
            yield f"{fluent}({obj})", valuation.value(fluent, obj)
            continue
        fluent = rng.choice(compiled.temporal_fluents)
        actual = valuation.value(fluent, obj)
        offset = rng.choice((Fraction(0), Fraction(1), Fraction(-1, 2)))
        bound = actual + offset
        op = rng.choice(("=", "<", "<=", ">", ">="))
        expected = {"=": actual == bound, "<": actual < bound, "<=": actual <= bound,
                    ">": actual > bound, ">=": actual >= bound}[op]
        yield f"{fluent}({obj}, {format_rational(time)}) {op} {format_rational(bound)}", expected


def test_regression_agrees_with_simulation(random_theories, narrative_of):
    """Test regression verdicts against forward simulation on 500 generated cases"""
    checked = 0
    for rng, text, compiled in random_theories(seed=20240611, count=100):
        narrative, last = narrative_of(rng, compiled, rng.randint(0, 4))
        sigma = parse_narrative(compiled, narrative)
        time = last + rng.choice((Fraction(0), Fraction(1, 2), Fraction(3)))
        valuation = forward_simulate(compiled, sigma, time)
        engine = RegressionEngine(compiled)
        for query, expected in _queries(rng, compiled, valuation, time):
            regressed = engine.regress(parse_query(compiled, query, sit=sigma)).formula
            assert evaluate(regressed, engine.model) is expected, f"{query} at {narrative}\n{text}"
            checked += 1
    assert checked == 500
