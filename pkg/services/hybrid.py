"""
Hybrid automata as temporal theories.

translate_automaton writes the theory of an automaton in .tbat syntax: one
object per state, a state fluent Q, one temporal fluent X_x per coordinate
and a single action trans(q, q', y..., t) whose precondition asks for an edge,
a guard that holds at the handoff point, the resets y and the target
invariant at y. Static predicates carry the automaton's data:

    Edge(q, q')            an edge exists
    Inv(q, x...)           invariant of q
    Init(q, x...)          initial condition of q
    Reset(q, q', x..., y...)  some transition q -> q' fires at x and resets to y
    flow_x(q, x..., t)     coordinate x after t time units in q

The same text parses into a TemporalBAT, so everything downstream (compiling,
regression, simulation) treats a translated automaton like any other theory.
"""

import logging
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

import sympy

from exceptions import NarrativeError, ParseError, UnsupportedFragmentError
from logic.formulas import FALSE, TRUE, Eq, Formula, StaticAtom, conj, split_conjuncts
from logic.render import render
from logic.simplify import defining_term, simplify
from logic.sorts import REAL
from logic.substitution import substitute_many
from logic.terms import S0, Action, Fluent, Num, TFluent, Term, Var, situation_actions, situation_prefixes
from models.hybrid import (
    TIME_VAR, HybridAutomaton, Trajectory, TrajectoryCheck, TrajectoryElement,
)
from models.theory import TemporalBAT, init_name
from parsing.printer import format_section
from parsing.theory_parser import parse_theory
from services.polynomials import (
    SympyBridge, comparison_polynomial, earliest, first_violation, format_instant, rational, to_fraction,
)
from services.simulator import Simulation, check_executable
from utils.cache import format_rational

logger = logging.getLogger(__name__)

STATE_SORT = "State"
MODE_FLUENT = "Q"
TRANSITION = "trans"
EDGE, INVARIANT, INITIAL, RESET = "Edge", "Inv", "Init", "Reset"

RESERVED = {
    STATE_SORT, MODE_FLUENT, TRANSITION, EDGE, INVARIANT, INITIAL, RESET,
    "S0", "Real", "q", "q_from", "q_to", "a", "s", "t", "y",
}

Point = Tuple[Fraction, ...]


def state_fluent(variable: str) -> str:
    return f"X_{variable}"


def flow_function(variable: str) -> str:
    return f"flow_{variable}"


def _point_var(variable: str) -> Var:
    return Var(f"x_{variable}", REAL)


def _next_var(variable: str) -> Var:
    return Var(f"y_{variable}", REAL)


# ==== AUTOMATON CHECKS ====

def check_automaton(automaton: HybridAutomaton) -> None:
    """
    Reject automata the translation cannot represent.

    Raises:
        ParseError: when a state name clashes with a generated symbol
        UnsupportedFragmentError: when a flow is not a polynomial of degree
            at most two in t, or does not start at the handoff point
    """
    generated = set(RESERVED)
    for name in automaton.variables:
        generated |= {state_fluent(name), init_name(state_fluent(name)), flow_function(name),
                      _point_var(name).name, _next_var(name).name}
    for mode in automaton.modes:
        if mode.name in generated:
            raise ParseError(f"state name {mode.name} clashes with a symbol of the translation",
                             mode.location.line if mode.location else None,
                             mode.location.column if mode.location else None, code="reserved")

    bridge = SympyBridge()
    time = bridge.symbol(TIME_VAR)
    for mode in automaton.modes:
        for name, coordinate_var in zip(automaton.variables, automaton.coordinates):
            flow = mode.flow(name)
            expr = sympy.expand(bridge.expr(flow))
            if not expr.is_polynomial(*expr.free_symbols) or sympy.degree(expr, time) > 2:
                raise UnsupportedFragmentError(
                    f"flow of {name} in {mode.name} is outside the closed-form fragment: {render(flow)}")
            if sympy.expand(expr.subs(time, 0) - bridge.expr(coordinate_var)) != 0:
                raise UnsupportedFragmentError(
                    f"flow of {name} in {mode.name} does not start at the handoff point")


def initial_state(automaton: HybridAutomaton) -> Tuple[str, Point]:
    """
    First state whose initial condition fixes every coordinate by equalities.

    Raises:
        UnsupportedFragmentError: when no initial condition determines a point
    """
    for condition in automaton.init:
        values: Dict[str, Fraction] = {}
        parts = split_conjuncts(simplify(condition.predicate))
        for name, coordinate_var in zip(automaton.variables, automaton.coordinates):
            for part in parts:
                value = defining_term(part, coordinate_var)
                if isinstance(value, Num):
                    values[name] = value.value
                    break
        if len(values) == automaton.dimension:
            return condition.mode, tuple(values[name] for name in automaton.variables)
    raise UnsupportedFragmentError(
        f"no initial condition of {automaton.name} fixes every variable; give the initial point")


# ==== TRANSLATION ====

def translate_automaton(automaton: HybridAutomaton, initial: Optional[Tuple[str, Sequence]] = None,
                        start=0) -> str:
    """
    The temporal theory of an automaton in .tbat syntax.

    Args:
        automaton: Parsed hybrid automaton
        initial: Initial state and point; taken from the init equalities when omitted
        start: start(S0)

    Returns:
        Theory source that parse_theory accepts

    Raises:
        ParseError: when state names clash with generated symbols
        UnsupportedFragmentError: for flows outside the closed-form fragment,
            or when the initial point cannot be determined
    """
    check_automaton(automaton)
    mode, point = initial if initial is not None else initial_state(automaton)
    if automaton.mode(mode) is None:
        raise ParseError(f"initial state {mode} is not a state of {automaton.name}", code="unknown-symbol")
    point = tuple(Fraction(value) for value in point)
    if len(point) != automaton.dimension:
        raise ParseError(f"initial point has {len(point)} values for {automaton.dimension} variables")

    names = automaton.variables
    xs = [_point_var(name) for name in names]
    ys = [_next_var(name) for name in names]
    to_x = dict(zip(automaton.coordinates, xs))
    x_list = ", ".join(x.name for x in xs)
    y_list = ", ".join(y.name for y in ys)
    reals = ", ".join(["Real"] * automaton.dimension)

    def args(*parts: str) -> str:
        return ", ".join(part for part in parts if part)

    statics = [
        f"{EDGE}({STATE_SORT}, {STATE_SORT})",
        f"{INVARIANT}({args(STATE_SORT, reals)})",
        f"{INITIAL}({args(STATE_SORT, reals)})",
        f"{RESET}({args(STATE_SORT, STATE_SORT, reals, reals)})",
    ]
    statics += [f"{flow_function(name)}({args(STATE_SORT, reals, 'Real')}) : Real" for name in names]
    statics += [f"{EDGE}({source}, {target}) := true" for source, target in automaton.edges]
    for state in automaton.modes:
        invariant = substitute_many(state.invariant_formula(), to_x)
        statics.append(f"{INVARIANT}({args(state.name, x_list)}) := {render(invariant)}")
    for condition in automaton.init:
        predicate = substitute_many(condition.predicate, to_x)
        statics.append(f"{INITIAL}({args(condition.mode, x_list)}) := {render(predicate)}")
    for transition in automaton.transitions:
        fires = conj(substitute_many(transition.guard, to_x),
                     *(Eq(y, substitute_many(transition.reset(name), to_x)) for name, y in zip(names, ys)))
        head = args(transition.source, transition.target, x_list, y_list)
        statics.append(f"{RESET}({head}) := {render(fires)}")
    for state in automaton.modes:
        for name in names:
            flow = substitute_many(state.flow(name), to_x)
            statics.append(f"{flow_function(name)}({args(state.name, x_list, 't')}) := {render(flow)}")

    now = ", ".join(f"{state_fluent(name)}(t, s)" for name in names)
    poss = (f"{TRANSITION}({args('q_from', 'q_to', y_list, 't')}): "
            f"{MODE_FLUENT}(s) = q_from & {EDGE}(q_from, q_to) & "
            f"{RESET}({args('q_from', 'q_to', now, y_list)}) & {INVARIANT}({args('q_to', y_list)})")
    entering = f"exists {args('q_from', y_list, 't')}. a = {TRANSITION}({args('q_from', 'q', y_list, 't')})"
    leaving = f"exists {args('q_to', y_list, 't')}. a = {TRANSITION}({args('q', 'q_to', y_list, 't')})"
    ssa = f"{MODE_FLUENT}(do(a, s)) = q <-> ({entering}) | {MODE_FLUENT}(s) = q & !({leaving})"

    effects = [f"{state_fluent(name)}(): on {TRANSITION}({args('q_from', 'q_to', y_list, 't')}) -> {y.name}"
               for name, y in zip(names, ys)]
    handoff = ", ".join(f"{init_name(state_fluent(name))}(s)" for name in names)
    laws = [f"{state_fluent(name)}(): {MODE_FLUENT}(s) = {state.name} => "
            f"y = {flow_function(name)}({args(state.name, handoff, 't - start(s)')})"
            for state in automaton.modes for name in names]

    facts = [f"start(S0) = {format_rational(Fraction(start))}", f"{MODE_FLUENT}(S0) = {mode}"]
    facts += [f"{init_name(state_fluent(name))}(S0) = {format_rational(value)}"
              for name, value in zip(names, point)]

    lines = [f"theory {automaton.name};", "", f"// translated from the hybrid automaton {automaton.name}", ""]
    lines += format_section("sorts", [f"{STATE_SORT} = {{{', '.join(automaton.mode_names)}}}"])
    lines += format_section("statics", statics)
    lines += format_section("actions", [f"{TRANSITION}({args(STATE_SORT, STATE_SORT, reals)})"])
    lines += format_section("fluents", [f"{MODE_FLUENT}() : {STATE_SORT}"]
                            + [f"temporal {state_fluent(name)}()" for name in names])
    lines += format_section("poss", [poss])
    lines += format_section("ssa", [ssa])
    lines += format_section("init-ssa", effects)
    lines += format_section("tca", laws)
    lines += format_section("init", facts)
    logger.info("translated %r", automaton)
    return "\n".join(lines)


def ha_to_tbat(automaton: HybridAutomaton, initial: Optional[Tuple[str, Sequence]] = None,
               start=0) -> TemporalBAT:
    """Translate an automaton and parse the result"""
    return parse_theory(translate_automaton(automaton, initial, start))


# ==== TRAJECTORIES ====

def _handoff(world, automaton: HybridAutomaton) -> Point:
    return tuple(world.value(init_name(state_fluent(name)), ()) for name in automaton.variables)


def build_trajectory(automaton: HybridAutomaton, sigma: Term, tau,
                     theory: Optional[TemporalBAT] = None) -> Trajectory:
    """
    The trajectory a narrative of trans actions induces up to tau.

    One element per prefix of sigma: its duration runs from the prefix's
    start to the next action, or to tau for the last prefix.

    Raises:
        NarrativeError: when sigma uses other actions, is not executable, or
            tau precedes start(sigma)
    """
    theory = theory or ha_to_tbat(automaton)
    actions = situation_actions(sigma)
    for action in actions:
        if not isinstance(action, Action) or action.functor != TRANSITION:
            raise NarrativeError(f"{render(action)} is not a transition of {automaton.name}")
    report = check_executable(sigma, theory)
    if not report.executable:
        failed = [d.message for d in report.diagnostics if d.is_error]
        raise NarrativeError(failed[0] if failed else f"{render(sigma)} is not executable")

    simulation = Simulation(theory)
    tau = Fraction(tau)
    final_start = simulation.world(sigma).start
    if tau < final_start:
        raise NarrativeError(f"time {format_rational(tau)} precedes start {format_rational(final_start)} "
                             f"of {render(sigma)}")
    elements = []
    for index, prefix in enumerate(situation_prefixes(sigma)):
        world = simulation.world(prefix)
        end = actions[index].time.value if index < len(actions) else tau
        mode = world.value(MODE_FLUENT, ())
        elements.append(TrajectoryElement(end - world.start, mode.name, _handoff(world, automaton)))
    return Trajectory(tuple(elements))


def _violation(formula: Formula, time: Var, lo: Fraction, hi: Optional[Fraction]):
    """Earliest instant of [lo, hi] where a conjunction of polynomial comparisons in time fails"""
    bridge = SympyBridge()
    symbol = bridge.symbol(time)
    found = []
    for part in split_conjuncts(simplify(formula)):
        if part == TRUE:
            continue
        if part == FALSE:
            return rational(lo)
        expr, relation = comparison_polynomial(part, bridge)
        found.append(first_violation(expr, symbol, relation, lo, hi))
    return earliest(found)


def _number(term: Term) -> Optional[Fraction]:
    """Value of a closed arithmetic term"""
    value = sympy.expand(SympyBridge().expr(term))
    return to_fraction(value) if value.is_Rational else None


def _advance(automaton: HybridAutomaton, mode: str, point: Point, elapsed: Fraction) -> Point:
    values = []
    for name, term in zip(automaton.variables, automaton.flow_at(mode, point, elapsed)):
        value = _number(term)
        if value is None:
            raise UnsupportedFragmentError(f"flow of {name} in {mode} does not evaluate at "
                                           f"{format_rational(elapsed)}")
        values.append(value)
    return tuple(values)


def _holds_at(automaton: HybridAutomaton, formula: Formula, point: Point) -> bool:
    return simplify(substitute_many(formula, automaton.bind(point))) == TRUE


def check_trajectory(automaton: HybridAutomaton, trajectory: Trajectory) -> TrajectoryCheck:
    """
    Decide whether a trajectory is a run of the automaton.

    Conditions, reported by letter at the first failure and checked in the
    order a, b, d, c, e:
      a. durations are non-negative; only the last may be unbounded
      b. every element's state exists
      c. the invariant holds along every element, endpoints included
      d. the first element starts in an initial condition
      e. consecutive elements are joined by an edge whose guard holds at
         the end of the first and whose resets give the start of the second
    """
    elements = trajectory.elements
    if not elements:
        return TrajectoryCheck(False, "a", 0, "empty trajectory")
    for index, element in enumerate(elements):
        if element.duration is None and index != len(elements) - 1:
            return TrajectoryCheck(False, "a", index, "only the last element may be unbounded")
        if element.duration is not None and element.duration < 0:
            return TrajectoryCheck(False, "a", index, f"negative duration {format_rational(element.duration)}")
    for index, element in enumerate(elements):
        if automaton.mode(element.mode) is None:
            return TrajectoryCheck(False, "b", index, f"{element.mode} is not a state of {automaton.name}")

    first = elements[0]
    if not any(condition.mode == first.mode and _holds_at(automaton, condition.predicate, first.start)
               for condition in automaton.init):
        return TrajectoryCheck(False, "d", 0, f"{first.mode} at the first point is not initial")

    for index, element in enumerate(elements):
        mode = automaton.mode(element.mode)
        binding = dict(zip(automaton.coordinates, automaton.flow_at(element.mode, element.start, TIME_VAR)))
        along = substitute_many(mode.invariant_formula(), binding)
        instant = _violation(along, TIME_VAR, Fraction(0), element.duration)
        if instant is not None:
            shown = format_instant(instant)
            return TrajectoryCheck(False, "c", index,
                                   f"invariant of {element.mode} fails {shown} into element {index}",
                                   instant=shown)

    for index, (element, following) in enumerate(zip(elements, elements[1:])):
        if (element.mode, following.mode) not in automaton.edges:
            return TrajectoryCheck(False, "e", index, f"no edge {element.mode} -> {following.mode}")
        end = _advance(automaton, element.mode, element.start, element.duration)
        if not any(_fires(automaton, transition, end, following.start)
                   for transition in automaton.transitions_between(element.mode, following.mode)):
            return TrajectoryCheck(False, "e", index,
                                   f"no transition {element.mode} -> {following.mode} leads from the "
                                   f"end of element {index} to the start of element {index + 1}")
    return TrajectoryCheck(True)


def _fires(automaton: HybridAutomaton, transition, end: Point, target: Point) -> bool:
    if not _holds_at(automaton, transition.guard, end):
        return False
    binding = automaton.bind(end)
    return all(_number(substitute_many(transition.reset(name), binding)) == value
               for name, value in zip(automaton.variables, target))


# ==== INVARIANCE IN THE THEORY ====

def check_invariance(automaton: HybridAutomaton, sigma: Term, tau,
                     theory: Optional[TemporalBAT] = None) -> TrajectoryCheck:
    """
    Check, in the translated theory, that sigma starts in an initial state
    and that Inv(Q(s'), X(t, s')) holds over every prefix s' of sigma while
    it is current, up to tau for the last one.

    For an executable narrative the outcome agrees with check_trajectory on
    the trajectory the narrative induces.
    """
    theory = theory or ha_to_tbat(automaton)
    simulation = Simulation(theory)
    state_sort = theory.fluents[MODE_FLUENT].result_sort
    tau = Fraction(tau)

    initial = simulation.world(S0)
    handoff = tuple(Fluent(init_name(state_fluent(name)), (), S0, REAL) for name in automaton.variables)
    starts_initial = StaticAtom(INITIAL, (Fluent(MODE_FLUENT, (), S0, state_sort),) + handoff)
    if not simulation.evaluator.truth(starts_initial, {}):
        return TrajectoryCheck(False, "d", 0, f"{render(initial.value(MODE_FLUENT, ()))} at S0 is not initial")

    actions = situation_actions(sigma)
    for index, prefix in enumerate(situation_prefixes(sigma)):
        world = simulation.world(prefix)
        end = actions[index].time.value if index < len(actions) else tau
        if end < world.start:
            raise NarrativeError(f"time {format_rational(end)} precedes start {format_rational(world.start)} "
                                 f"of {render(prefix)}")
        arguments = (world.value(MODE_FLUENT, ()),)
        arguments += tuple(simulation.evaluator.reduce(TFluent(state_fluent(name), (), TIME_VAR, prefix),
                                                       TIME_VAR, {})
                           for name in automaton.variables)
        invariant = simulation.model.static_atom(INVARIANT, arguments)
        if invariant is None:
            invariant = FALSE
        instant = _violation(invariant, TIME_VAR, world.start, end)
        if instant is not None:
            shown = format_instant(instant)
            return TrajectoryCheck(False, "c", index, f"Inv fails at {shown} in {render(prefix)}",
                                   instant=shown)
    return TrajectoryCheck(True)
