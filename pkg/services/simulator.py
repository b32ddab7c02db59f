"""
Forward simulation of ground narratives.

Each prefix of a narrative gets a SimWorld computed from its predecessor:
relational and functional fluents through their successor state axioms,
init companions through their init-SSAs, temporal fluents by selecting the
state evolution branch whose context holds. Regression is never used, so
the simulator is an independent check on the regression engine.
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from exceptions import ConsistencyError, NarrativeError, ReasonerError, UnsupportedFragmentError
from logic.formulas import Poss, split_conjuncts
from logic.render import render
from logic.simplify import defining_term, simplify
from logic.sorts import REAL
from logic.terms import Action, Do, Fluent, InitSit, Num, Term, Var, situation_actions, situation_prefixes
from models.reports import ExecutabilityReport, TimedValuation
from models.theory import Diagnostic, FluentKind, TemporalBAT, error, warning
from services.evaluator import Evaluator, InitialModel, Value, call_text
from services.sea_compiler import ensure_compiled
from services.threshold import solve_threshold
from utils.cache import format_rational

logger = logging.getLogger(__name__)

TRIGGER_TIME = Var("t", REAL)


class SimWorld:
    """Fluent values in one ground situation, computed on demand and memoized"""

    def __init__(self, simulation: "Simulation", sit: Term, previous: Optional["SimWorld"] = None):
        self.simulation = simulation
        self.sit = sit
        self.previous = previous
        self.action: Optional[Action] = sit.action if isinstance(sit, Do) else None
        self._holds: Dict[Tuple, bool] = {}
        self._values: Dict[Tuple, Value] = {}
        self._temporal: Dict[Tuple, Fraction] = {}

    def __repr__(self):
        return f"SimWorld({render(self.sit)})"

    @property
    def theory(self) -> TemporalBAT:
        return self.simulation.theory

    @property
    def evaluator(self) -> Evaluator:
        return self.simulation.evaluator

    @property
    def start(self) -> Fraction:
        if self.action is None:
            return self.simulation.model.initial_world.start
        return self.action.time.value

    # ==== ATEMPORAL FLUENTS ====

    def holds(self, functor: str, args: Tuple[Term, ...]) -> bool:
        key = (functor, args)
        if key not in self._holds:
            self._holds[key] = self._compute_holds(functor, args)
        return self._holds[key]

    def _compute_holds(self, functor: str, args: Tuple[Term, ...]) -> bool:
        if self.previous is None:
            return bool(self.simulation.model.initial_atom(functor, args))
        axiom = self.theory.successor_axiom(functor)
        if axiom is None:
            return self.previous.holds(functor, args)
        return self.evaluator.truth(axiom.instantiate(args, self.action, self.previous.sit), {})

    def value(self, functor: str, args: Tuple[Term, ...]) -> Value:
        key = (functor, args)
        if key not in self._values:
            self._values[key] = self._compute_value(functor, args)
        return self._values[key]

    def _compute_value(self, functor: str, args: Tuple[Term, ...]) -> Value:
        if self.previous is None:
            return self.simulation.model.initial_world.value(functor, args)
        axiom = self.theory.successor_axiom(functor)
        if axiom is None:
            return self.previous.value(functor, args)
        text = call_text(functor, args + (self.sit,))
        sort = axiom.result_sort or REAL
        if sort.is_object:
            candidates: List[Value] = [
                obj for obj in self.theory.domain(sort)
                if self.evaluator.truth(axiom.instantiate(args, self.action, self.previous.sit, obj), {})
            ]
        else:
            body = axiom.instantiate(args, self.action, self.previous.sit)
            candidates = self.evaluator.truth_set(body, axiom.value, {}).points()
            if candidates is None:
                raise ConsistencyError(f"{text} has infinitely many values", witness=text)
        if len(candidates) != 1:
            found = ", ".join(str(c if not isinstance(c, Fraction) else format_rational(c))
                              for c in candidates) or "none"
            raise ConsistencyError(f"{text} is not uniquely defined (values: {found})", witness=text)
        return candidates[0]

    # ==== TEMPORAL FLUENTS ====

    def temporal(self, functor: str, args: Tuple[Term, ...], time: Fraction) -> Fraction:
        key = (functor, args, time)
        if key not in self._temporal:
            term = self.temporal_term(functor, args, Num(time))
            self._temporal[key] = self.evaluator.value(term, {})
        return self._temporal[key]

    def temporal_term(self, functor: str, args: Tuple[Term, ...], time: Term) -> Term:
        """
        The value of a temporal fluent at time as a term over this situation.

        time may be a variable; the result is then linear in it whenever the
        selected law is.

        Raises:
            ConsistencyError: when several branches fire or the law leaves
                the value undetermined
        """
        sea = self.theory.seas.get(functor)
        if sea is None:
            raise UnsupportedFragmentError(f"no state evolution axiom for {functor}")
        firing = [law for context, law in sea.branches
                  if self.evaluator.truth(sea.instantiate(args, time, sea.value_var, self.sit, context), {})]
        text = call_text(functor, args + (self.sit,))
        if len(firing) > 1:
            raise ConsistencyError(f"{len(firing)} branches of the evolution of {functor} fire at {text}",
                                   witness=text)
        if not firing:
            return Fluent(sea.init_fluent, args, self.sit, REAL)
        law = sea.instantiate(args, time, sea.value_var, self.sit, firing[0])
        reduced = simplify(law, resolver=self.simulation.model)
        for part in split_conjuncts(reduced):
            value = defining_term(part, sea.value_var)
            if value is not None:
                return value
        if isinstance(time, Num):
            points = self.evaluator.truth_set(reduced, sea.value_var, {}).points()
            if points is not None and len(points) == 1:
                return Num(points[0])
        raise ConsistencyError(f"law for {functor} does not define a unique value at {text}", witness=text)


class Simulation:
    """
    Worlds of the prefixes of ground situations over one compiled theory.

    Args:
        theory: Theory to simulate; compiled on construction when needed
        model: Initial model to reuse
    """

    def __init__(self, theory: TemporalBAT, model: Optional[InitialModel] = None):
        self.theory = ensure_compiled(theory)
        self.model = model if model is not None and model.theory is self.theory else InitialModel(self.theory)
        self.evaluator = Evaluator(self.model, self.world)
        self._worlds: Dict[Term, SimWorld] = {}

    def world(self, sit: Term) -> SimWorld:
        found = self._worlds.get(sit)
        if found is not None:
            return found
        if isinstance(sit, InitSit):
            found = SimWorld(self, sit)
        elif isinstance(sit, Do) and isinstance(sit.action, Action) and isinstance(sit.action.time, Num):
            found = SimWorld(self, sit, self.world(sit.sit))
        else:
            raise NarrativeError(f"cannot simulate non-ground situation {render(sit)}")
        self._worlds[sit] = found
        return found

    def valuation(self, sit: Term, time: Fraction) -> TimedValuation:
        """All fluent values of sit, temporal fluents read at time"""
        world = self.world(sit)
        temporal, initial, relational, functional = {}, {}, {}, {}
        for decl in self.theory.fluents.values():
            for args in self.theory.groundings(decl.arg_sorts):
                key = (decl.name, tuple(obj.name for obj in args))
                if decl.kind is FluentKind.TEMPORAL:
                    temporal[key] = world.temporal(decl.name, args, time)
                elif decl.kind is FluentKind.INIT:
                    initial[key] = world.value(decl.name, args)
                elif decl.kind is FluentKind.RELATIONAL:
                    relational[key] = world.holds(decl.name, args)
                else:
                    value = world.value(decl.name, args)
                    functional[key] = value if isinstance(value, Fraction) else str(value)
        return TimedValuation(sit, time, temporal, initial, relational, functional)


def forward_simulate(theory: TemporalBAT, sigma: Term, t: Fraction) -> TimedValuation:
    """
    Simulate a ground narrative and read every fluent at time t.

    Args:
        theory: Temporal theory; compiled when it is not yet
        sigma: Ground situation
        t: Instant no earlier than start(sigma)

    Returns:
        TimedValuation of sigma at t

    Raises:
        NarrativeError: when t precedes start(sigma)
        ConsistencyError: when a fluent value is ambiguous or missing
    """
    simulation = Simulation(theory)
    t = Fraction(t)
    start = simulation.world(sigma).start
    if t < start:
        raise NarrativeError(f"time {format_rational(t)} precedes start {format_rational(start)} "
                             f"of {render(sigma)}")
    valuation = simulation.valuation(sigma, t)
    logger.info("simulated %s at %s", render(sigma), format_rational(t))
    return valuation


def check_executable(sigma: Term, theory: TemporalBAT) -> ExecutabilityReport:
    """
    Check that every action of a narrative is possible and on time.

    Preconditions are decided in the simulated world of each prefix. A
    natural action whose precondition becomes true strictly before the next
    action without occurring produces a warning.

    Returns:
        ExecutabilityReport; executable is False at the first failing step
    """
    simulation = Simulation(theory)
    prefixes = situation_prefixes(sigma)
    actions = situation_actions(sigma)
    diagnostics: List[Diagnostic] = []

    for index, action in enumerate(actions):
        before = prefixes[index]
        shown = f"{action.functor}@{format_rational(action.time.value)}"
        try:
            start = simulation.world(before).start
            if action.time.value < start:
                diagnostics.append(error(
                    "time-order", f"step {index + 1} {shown} precedes the start "
                                  f"{format_rational(start)} of its situation", witness=render(action)))
                return ExecutabilityReport(False, tuple(diagnostics))
            diagnostics += _natural_warnings(simulation, before, action)
            if not simulation.evaluator.truth(Poss(action, before), {}):
                diagnostics.append(error("precondition", f"step {index + 1} {shown} is not possible",
                                         witness=render(action)))
                return ExecutabilityReport(False, tuple(diagnostics))
        except ReasonerError as exc:
            diagnostics.append(error("evaluation", f"step {index + 1} {shown}: {exc}",
                                     witness=render(action)))
            return ExecutabilityReport(False, tuple(diagnostics))

    logger.info("narrative %s executable (%d warnings)", render(sigma), len(diagnostics))
    return ExecutabilityReport(True, tuple(diagnostics))


def _natural_warnings(simulation: Simulation, sit: Term, following: Action) -> List[Diagnostic]:
    """Natural actions due in [start(sit), time(following)) that did not occur"""
    found = []
    theory = simulation.theory
    start, until = simulation.world(sit).start, following.time.value
    for decl in theory.natural_actions:
        for args in theory.groundings(decl.arg_sorts):
            candidate = Action(decl.functor, args, TRIGGER_TIME)
            try:
                due = solve_threshold(Poss(candidate, sit), start, until, TRIGGER_TIME,
                                      simulation.model, simulation.world)
            except ReasonerError as exc:
                logger.debug("trigger of %s not decided: %s", render(candidate), exc)
                continue
            if due is None or due.value >= until:
                continue
            occurred = Action(decl.functor, args, Num(due.value))
            found.append(warning(
                "natural-action",
                f"natural action {render(occurred)} is due at {due} "
                f"before {following.functor}@{format_rational(until)}",
                witness=render(occurred)))
    return found
