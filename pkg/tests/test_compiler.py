"""
Tests for compiling change axioms into state evolution axioms and effect
cases into init-SSAs
"""

from fractions import Fraction

import pytest

from exceptions import ConsistencyError, StratificationError
from logic.formulas import Eq, Lt, RelAtom, conj, disj, neg
from logic.sorts import REAL, SITUATION, object_sort
from logic.substitution import free_vars, substitute_many
from logic.terms import Num, Obj, Var, num
from parsing.narrative import parse_narrative
from parsing.printer import print_compiled
from parsing.theory_parser import parse_theory
from services.polynomials import lra_satisfiable
from services.sea_compiler import (
    ContextOracle, appendix_axioms, compile_theory, disjoin_contexts, ensure_compiled, find_cycle,
    temporal_dependencies,
)
from services.simulator import Simulation

SMALL = """
theory small;

sorts {{ Obj = {{o1, o2}}; }}
actions {{ up(Obj); down(Obj); }}
fluents {{ P(Obj); R(Obj); temporal f(Obj); }}
poss {{ up(x, t): start(s) <= t; down(x, t): start(s) <= t; }}
ssa {{
    P(x, do(a, s)) <-> a = up(x, _) | P(x, s) & a != down(x, _);
    R(x, do(a, s)) <-> a = down(x, _) | R(x, s) & a != up(x, _);
}}
{effects}
tca {{
{laws}
}}
init {{ start(S0) = 0; P(o1, S0); f_init(o1, S0) = 1; f_init(o2, S0) = 2; }}
"""


def _small(laws: str, effects: str = "") -> str:
    return SMALL.format(laws=laws, effects=effects)


# ==== TRAFFIC ====

def test_traffic_compiles_four_branches(traffic_compiled):
    sea = traffic_compiled.seas["que"]
    assert len(sea.branches) == 4
    assert [p.name for p in sea.params] == ["i", "r"]
    assert sea.init_fluent == "que_init"
    assert traffic_compiled.is_compiled
    assert len(traffic_compiled.init_ssas["que_init"].cases) == 1


def test_print_compiled(traffic_compiled):
    printed = print_compiled(traffic_compiled)
    assert "// state evolution axiom for que\n" in printed
    assert "// successor state axiom for que_init\n" in printed
    assert printed.count("\n    | ") >= 4


# ==== CONTEXTS ====

LANE = Obj("in1", object_sort("Lane"))
X = Var("x", REAL)
S = Var("s", SITUATION)
GREEN = RelAtom("Green", (LANE,), S)


@pytest.mark.parametrize("phi, expected", [
    (conj(GREEN, Lt(X, num(1))), True),
    (conj(GREEN, Lt(X, num(1)), Lt(num(2), X)), False),
    (disj(conj(GREEN, Lt(X, num(1)), Lt(num(2), X)), conj(neg(GREEN), Lt(X, num(3)))), True),
    (conj(GREEN, neg(Eq(X, num(1))), Eq(X, num(1))), False),
])
def test_satisfiability_mixes_relational_atoms_and_comparisons(phi, expected):
    assert lra_satisfiable(phi) is expected


def test_traffic_contexts_are_exclusive(traffic):
    pieces = disjoin_contexts(traffic.tcas["que"], traffic)
    oracle = ContextOracle(traffic)
    for index, first in enumerate(pieces):
        assert oracle.satisfiable(first.context, first.params) is True
        for second in pieces[index + 1:]:
            assert oracle.satisfiable(conj(first.context, second.context), first.params) is False



def test_exclusive_contexts_stay(traffic):
    assert len(disjoin_contexts(traffic.tcas["que"], traffic)) == 4


def test_overlapping_contexts_are_split():
    """Test that P and R overlap and are split into three exclusive pieces"""
    theory = parse_theory(_small("    f(x): P(x, s) => y = f_init(x, s) + (t - start(s));\n"
                                 "    f(x): R(x, s) => y = f_init(x, s) + 2 * (t - start(s));"))
    pieces = disjoin_contexts(theory.tcas["f"], theory)
    assert len(pieces) == 3
    oracle = ContextOracle(theory)
    for index, first in enumerate(pieces):
        for second in pieces[index + 1:]:
            assert oracle.satisfiable(conj(first.context, second.context), first.params) is False
    # the overlap keeps the law of the first axiom
    laws = [piece.law for piece in pieces]
    assert laws.count(theory.tcas["f"][0].law) == 2


# ==== INIT-SSA ====

def test_effect_cases_with_different_values_conflict():
    text = _small("    f(x): P(x, s) => y = f_init(x, s);",
                  "init-ssa { f(x): on up(x, _) -> 3; f(x): on up(x, _) -> 4; }")
    compiled, diagnostics = compile_theory(parse_theory(text))
    assert [d.code for d in diagnostics if d.is_error] == ["effect-conflict"]
    with pytest.raises(ConsistencyError):
        ensure_compiled(parse_theory(text))


def test_effect_value_sets_init_companion():
    text = _small("    f(x): P(x, s) => y = f_init(x, s) + (t - start(s));",
                  "init-ssa { f(x): on down(x, _) -> 7; }")
    simulation = Simulation(parse_theory(text))
    sigma = parse_narrative(simulation.theory, "down(o1)@2")
    world = simulation.world(sigma)
    assert world.value("f_init", (simulation.theory.constant("o1"),)) == 7
    # o2 never had P, so f stays at its initial value
    assert world.value("f_init", (simulation.theory.constant("o2"),)) == 2


def test_continuity_without_effects():
    """Test that f_init of a successor is f at the action's time"""
    text = _small("    f(x): P(x, s) => y = f_init(x, s) + (t - start(s));")
    simulation = Simulation(parse_theory(text))
    sigma = parse_narrative(simulation.theory, "up(o2)@1; down(o1)@3")
    o1 = simulation.theory.constant("o1")
    assert simulation.world(sigma).value("f_init", (o1,)) == 4


# ==== STRATIFICATION ====

def test_dependencies_and_cycles():
    assert find_cycle({"f": {"g"}, "g": set()}) is None
    assert find_cycle({"f": {"g"}, "g": {"h"}, "h": {"f"}}) == ["f", "g", "h", "f"]
    assert find_cycle({"f": {"f"}}) == ["f", "f"]


def test_cycle_blocks_compilation():
    text = _small("    f(x): P(x, s) => y = f_init(x, s) + f(x, t, s) - f(x, start(s), s);")
    theory = parse_theory(text)
    assert temporal_dependencies(theory) == {"f": {"f"}}
    _, diagnostics = compile_theory(theory)
    assert diagnostics[0].code == "stratification"
    with pytest.raises(StratificationError):
        ensure_compiled(theory)


# ==== INTERMEDIATE AXIOMS ====

def test_appendix_axiom_names(traffic_compiled):
    names = [name for name, _ in appendix_axioms(traffic_compiled, "que")]
    assert names == ["PNFCA", "Cons", "ECA", "NNFCA", "SEA1", "SEA2"]


def test_appendix_axioms_hold_in_simulated_worlds(random_theories, narrative_of):
    """Test that every intermediate axiom holds at 200 sampled groundings"""
    checked = 0
    for rng, text, compiled in random_theories(seed=7, count=100):
        narrative, last = narrative_of(rng, compiled, rng.randint(0, 3))
        sigma = parse_narrative(compiled, narrative)
        simulation = Simulation(compiled)
        world = simulation.world(sigma)
        for fluent in compiled.temporal_fluents:
            obj = rng.choice(compiled.domain(compiled.fluents[fluent].arg_sorts[0]))
            time = last + rng.choice((Fraction(0), Fraction(1, 2), Fraction(2)))
            actual = world.temporal(fluent, (obj,), time)
            value = actual + rng.choice((0, 1))
            for name, axiom in appendix_axioms(compiled, fluent):
                sea = compiled.seas[fluent]
                params = {p: obj for p in free_vars(axiom) if p.sort.is_object}
                mapping = {**params, sea.value_var: Num(value), sea.time_var: Num(time), sea.sit_var: sigma}
                ground = substitute_many(axiom, mapping)
                extra = {v: Num(rng.choice((actual, actual + 1))) for v in free_vars(ground)}
                ground = substitute_many(ground, extra)
                assert simulation.evaluator.truth(ground, {}), f"{name} of {fluent} fails at {narrative}\n{text}"
            checked += 1
    assert checked >= 200
