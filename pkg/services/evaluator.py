"""
Exact evaluation of sentences against the complete initial theory.

Relational fluents and static predicates are read closed-world; functions
take their most specific fact or definition clause. Real quantifiers are
decided through the truth set of their body, a finite union of intervals,
so every linear formula in one real variable is decided exactly.
"""

import logging
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Protocol, Sequence, Tuple, Union

from exceptions import ConsistencyError, NonlinearError, NotRegressableError, UnsupportedFragmentError
from logic.formulas import (
    FALSE, And, Eq, Exists, Forall, Formula, Iff, Implies, Le, Lt, Not, Or, Poss, RelAtom,
    SitPrec, StaticAtom, Truth, conj, disj,
)
from logic.intervals import IntervalSet
from logic.linear import to_linear
from logic.render import render
from logic.simplify import simplify
from logic.sorts import REAL, Sort
from logic.substitution import free_vars, substitute_many
from logic.terms import (
    S0, Action, Arith, Do, Fluent, InitSit, Num, Obj, Start, StaticFn, TFluent, Term, TimeOf,
    Var, is_prefix,
)
from models.theory import Fact, StaticClause, TemporalBAT

logger = logging.getLogger(__name__)

Value = Union[Fraction, Term]
Env = Dict[Var, Value]


def as_term(value: Value) -> Term:
    return Num(value) if isinstance(value, Fraction) else value


def call_text(functor: str, args: Sequence[Term]) -> str:
    return f"{functor}({', '.join(render(arg) for arg in args)})"


class World(Protocol):
    """Fluent values in one situation"""

    @property
    def start(self) -> Fraction:
        ...

    def holds(self, functor: str, args: Tuple[Term, ...]) -> bool:
        ...

    def value(self, functor: str, args: Tuple[Term, ...]) -> Value:
        ...

    def temporal(self, functor: str, args: Tuple[Term, ...], time: Fraction) -> Fraction:
        ...

    def temporal_term(self, functor: str, args: Tuple[Term, ...], time: Term) -> Term:
        ...


class InitialModel:
    """
    The unique model of a complete ground initial theory.

    Also serves as the FactResolver of logic.simplify, so regression can
    replace rigid symbols and ground relational fluents at S0 by their values.
    """

    def __init__(self, theory: TemporalBAT):
        self.theory = theory
        self.facts: Dict[str, List[Fact]] = {}
        for fact in theory.initial.facts:
            self.facts.setdefault(fact.functor, []).append(fact)
        self.start = theory.initial.start
        self.initial_world = InitialWorld(self)

    def __repr__(self):
        return f"InitialModel({self.theory.name or 'anonymous'}, facts={len(self.theory.initial.facts)})"

    # ==== LOOKUP ====

    def fact_for(self, functor: str, args: Tuple[Term, ...]) -> Optional[Fact]:
        """Most specific covering fact; earlier facts win ties"""
        best, best_rank = None, -1
        for fact in self.facts.get(functor, ()):
            if fact.covers(args):
                rank = _fact_rank(fact)
                if rank > best_rank:
                    best, best_rank = fact, rank
        return best

    def clauses_for(self, functor: str, args: Tuple[Term, ...]) -> Optional[List[StaticClause]]:
        """Matching clauses, or None when a constant pattern meets an undetermined argument"""
        matching = []
        for clause in self.theory.static_clauses.get(functor, ()):
            if not _may_match(clause, args):
                continue
            if not clause.decides(args):
                return None
            if clause.match(args) is not None:
                matching.append(clause)
        return matching

    def _definition(self, functor: str, args: Tuple[Term, ...]):
        """('fact', Fact), ('clauses', [...]), ('none', None) or None when undetermined"""
        clauses = self.clauses_for(functor, args)
        if clauses is None:
            return None
        ground = all(isinstance(arg, (Obj, Num)) for arg in args)
        if not ground and self.facts.get(functor):
            return None
        fact = self.fact_for(functor, args) if ground else None
        if fact is not None and (not clauses or _fact_rank(fact) >= max(map(_rank, clauses))):
            return "fact", fact
        if clauses:
            return "clauses", clauses
        return ("none", None) if ground else None

    # ==== FACT RESOLVER ====

    def static_atom(self, functor: str, args: Sequence[Term]) -> Optional[Formula]:
        found = self._definition(functor, tuple(args))
        if found is None:
            return None
        kind, item = found
        if kind == "fact":
            return Truth(bool(item.value))
        if kind == "none":
            return FALSE
        return disj(*(clause.instantiate(tuple(args)) for clause in item))

    def static_fn(self, functor: str, args: Sequence[Term]) -> Optional[Term]:
        found = self._definition(functor, tuple(args))
        if found is None or found[0] == "none":
            return None
        kind, item = found
        if kind == "fact":
            return item.value
        best = max(item, key=_rank)
        return best.instantiate(tuple(args))

    def initial_atom(self, functor: str, args: Sequence[Term]) -> Optional[bool]:
        if functor not in self.theory.fluents:
            return None
        fact = self.fact_for(functor, tuple(args))
        return bool(fact.value) if fact is not None else False

    def domain(self, sort: Sort) -> Optional[Sequence[Obj]]:
        if not sort.is_object:
            return None
        return self.theory.domain(sort)

    def initial_start(self) -> Optional[Term]:
        return Num(self.start) if self.start is not None else None

    # ==== VALUES ====

    def static_truth(self, functor: str, args: Tuple[Term, ...], evaluator: "Evaluator") -> bool:
        formula = self.static_atom(functor, args)
        if formula is None:
            raise UnsupportedFragmentError(f"cannot decide {call_text(functor, args)}")
        return evaluator.truth(formula, {})

    def static_value(self, functor: str, args: Tuple[Term, ...], evaluator: "Evaluator") -> Value:
        term = self.static_fn(functor, args)
        if term is None:
            raise ConsistencyError(f"no value for {call_text(functor, args)}",
                                   witness=call_text(functor, args))
        return evaluator.value(term, {})


def _rank(clause: StaticClause) -> int:
    return sum(not isinstance(param, Var) for param in clause.params)


def _fact_rank(fact: Fact) -> int:
    return sum(arg is not None for arg in fact.args)


def _may_match(clause: StaticClause, args: Tuple[Term, ...]) -> bool:
    """A constant pattern facing a non-constant argument could still match"""
    return all(isinstance(param, Var) or not isinstance(arg, (Obj, Num)) or param == arg
               for param, arg in zip(clause.params, args))


class InitialWorld:
    """S0 as given by the initial theory; temporal fluents need the simulator"""

    def __init__(self, model: InitialModel):
        self.model = model

    @property
    def start(self) -> Fraction:
        if self.model.start is None:
            raise ConsistencyError("start(S0) is not given", witness="start(S0)")
        return self.model.start

    def holds(self, functor: str, args: Tuple[Term, ...]) -> bool:
        return bool(self.model.initial_atom(functor, args))

    def value(self, functor: str, args: Tuple[Term, ...]) -> Value:
        fact = self.model.fact_for(functor, args)
        if fact is None:
            text = call_text(functor, args + (S0,))
            raise ConsistencyError(f"no initial value for {text}", witness=text)
        return fact.value.value if isinstance(fact.value, Num) else fact.value

    def temporal(self, functor: str, args: Tuple[Term, ...], time: Fraction) -> Fraction:
        raise UnsupportedFragmentError(
            f"temporal fluent {functor} must be regressed or simulated before evaluation")

    def temporal_term(self, functor: str, args: Tuple[Term, ...], time: Term) -> Term:
        raise UnsupportedFragmentError(
            f"temporal fluent {functor} must be regressed or simulated before evaluation")


class Evaluator:
    """
    Truth values and truth sets of formulas.

    Args:
        model: Initial model supplying statics and S0
        worlds: Maps a ground situation to its World; defaults to S0 only
    """

    def __init__(self, model: InitialModel, worlds: Optional[Callable[[Term], World]] = None):
        self.model = model
        self.worlds = worlds or self._initial_only

    def _initial_only(self, sit: Term) -> World:
        if isinstance(sit, InitSit):
            return self.model.initial_world
        raise NotRegressableError(f"formula is not uniform in S0: mentions {render(sit)}")

    # ==== TERMS ====

    def value(self, term: Term, env: Env) -> Value:
        if isinstance(term, Num):
            return term.value
        if isinstance(term, Obj) or isinstance(term, InitSit):
            return term
        if isinstance(term, Var):
            if term not in env:
                raise UnsupportedFragmentError(f"free variable {term.name}")
            return env[term]
        if isinstance(term, Arith):
            values = [self.value(arg, env) for arg in term.args]
            if term.op == "-" and len(values) == 1:
                return -values[0]
            result = values[0]
            for other in values[1:]:
                if term.op == "+":
                    result += other
                elif term.op == "-":
                    result -= other
                else:
                    result *= other
            return result
        if isinstance(term, Action):
            args = tuple(as_term(self.value(arg, env)) for arg in term.args)
            return Action(term.functor, args, Num(self.value(term.time, env)))
        if isinstance(term, Do):
            return Do(self.value(term.action, env), self.value(term.sit, env))
        if isinstance(term, Start):
            return self.worlds(self.value(term.sit, env)).start
        if isinstance(term, TimeOf):
            return self.value(term.action, env).time.value
        if isinstance(term, StaticFn):
            args = self.arguments(term.args, env)
            return self.model.static_value(term.functor, args, self)
        if isinstance(term, Fluent):
            world = self.worlds(self.value(term.sit, env))
            return world.value(term.functor, self.arguments(term.args, env))
        if isinstance(term, TFluent):
            world = self.worlds(self.value(term.sit, env))
            return world.temporal(term.functor, self.arguments(term.args, env),
                                  self.value(term.time, env))
        raise UnsupportedFragmentError(f"cannot evaluate {term!r}")

    def arguments(self, args: Tuple[Term, ...], env: Env) -> Tuple[Term, ...]:
        return tuple(as_term(self.value(arg, env)) for arg in args)

    # ==== FORMULAS ====

    def truth(self, phi: Formula, env: Env) -> bool:
        if isinstance(phi, Truth):
            return phi.value
        if isinstance(phi, Eq):
            return self.value(phi.left, env) == self.value(phi.right, env)
        if isinstance(phi, Lt):
            return self.value(phi.left, env) < self.value(phi.right, env)
        if isinstance(phi, Le):
            return self.value(phi.left, env) <= self.value(phi.right, env)
        if isinstance(phi, RelAtom):
            world = self.worlds(self.value(phi.sit, env))
            return world.holds(phi.functor, self.arguments(phi.args, env))
        if isinstance(phi, StaticAtom):
            return self.model.static_truth(phi.functor, self.arguments(phi.args, env), self)
        if isinstance(phi, Poss):
            action = self.value(phi.action, env)
            axiom = self.model.theory.poss.get(action.functor)
            if axiom is None:
                return False
            return self.truth(axiom.instantiate(action, self.value(phi.sit, env)), {})
        if isinstance(phi, SitPrec):
            return is_prefix(self.value(phi.left, env), self.value(phi.right, env))
        if isinstance(phi, Not):
            return not self.truth(phi.body, env)
        if isinstance(phi, And):
            return all(self.truth(part, env) for part in phi.parts)
        if isinstance(phi, Or):
            return any(self.truth(part, env) for part in phi.parts)
        if isinstance(phi, Implies):
            return not self.truth(phi.left, env) or self.truth(phi.right, env)
        if isinstance(phi, Iff):
            return self.truth(phi.left, env) == self.truth(phi.right, env)
        if isinstance(phi, (Exists, Forall)):
            return self.quantifier(phi, env)
        raise UnsupportedFragmentError(f"cannot evaluate {render(phi)}")

    def quantifier(self, phi, env: Env) -> bool:
        var = phi.var
        domain = self.model.domain(var.sort)
        if domain is not None:
            results = (self.truth(phi.body, {**env, var: obj}) for obj in domain)
            return any(results) if isinstance(phi, Exists) else all(results)
        if var.sort != REAL:
            raise UnsupportedFragmentError(f"cannot quantify over {var.sort}")
        holds = self.truth_set(phi.body, var, env)
        return not holds.is_empty if isinstance(phi, Exists) else holds.is_everything

    # ==== TRUTH SETS ====

    def truth_set(self, phi: Formula, var: Var, env: Env) -> IntervalSet:
        """Values of the real variable var satisfying phi under env"""
        if var not in free_vars(phi):
            return IntervalSet.everything() if self.truth(phi, env) else IntervalSet.empty()
        if isinstance(phi, (Eq, Lt, Le)):
            return self.comparison_set(phi, var, env)
        if isinstance(phi, StaticAtom):
            args = tuple(self.reduce(arg, var, env) for arg in phi.args)
            unfolded = self.model.static_atom(phi.functor, args)
            if unfolded is None:
                raise UnsupportedFragmentError(f"cannot unfold {render(phi)}")
            return self.truth_set(unfolded, var, {})
        if isinstance(phi, Poss):
            action = self.reduce(phi.action, var, env)
            axiom = self.model.theory.poss.get(action.functor)
            if axiom is None:
                return IntervalSet.empty()
            return self.truth_set(axiom.instantiate(action, self.reduce(phi.sit, var, env)), var, {})
        if isinstance(phi, Not):
            return self.truth_set(phi.body, var, env).complement()
        if isinstance(phi, And):
            result = IntervalSet.everything()
            for part in phi.parts:
                result = result.intersection(self.truth_set(part, var, env))
                if result.is_empty:
                    break
            return result
        if isinstance(phi, Or):
            result = IntervalSet.empty()
            for part in phi.parts:
                result = result.union(self.truth_set(part, var, env))
            return result
        if isinstance(phi, Implies):
            return self.truth_set(phi.left, var, env).complement().union(
                self.truth_set(phi.right, var, env))
        if isinstance(phi, Iff):
            left, right = self.truth_set(phi.left, var, env), self.truth_set(phi.right, var, env)
            return left.intersection(right).union(left.complement().intersection(right.complement()))
        if isinstance(phi, (Exists, Forall)):
            return self.quantified_set(phi, var, env)
        raise UnsupportedFragmentError(f"truth set of {render(phi)} in {var.name}")

    def quantified_set(self, phi, var: Var, env: Env) -> IntervalSet:
        domain = self.model.domain(phi.var.sort)
        if domain is not None:
            sets = [self.truth_set(phi.body, var, {**env, phi.var: obj}) for obj in domain]
            if isinstance(phi, Exists):
                result = IntervalSet.empty()
                for found in sets:
                    result = result.union(found)
                return result
            result = IntervalSet.everything()
            for found in sets:
                result = result.intersection(found)
            return result
        ground = substitute_many(phi, {v: as_term(value) for v, value in env.items()})
        reduced = simplify(ground, resolver=self.model)
        if isinstance(reduced, (Exists, Forall)) and reduced.var == phi.var or reduced == ground:
            raise UnsupportedFragmentError(
                f"cannot eliminate real quantifier over {phi.var.name} in {render(phi)}")
        return self.truth_set(reduced, var, {})

    def comparison_set(self, phi: Formula, var: Var, env: Env) -> IntervalSet:
        if phi.left.sort != REAL:
            if isinstance(phi.left, Action) and isinstance(phi.right, Action):
                if phi.left.functor != phi.right.functor:
                    return IntervalSet.empty()
                pairs = list(zip(phi.left.args, phi.right.args)) + [(phi.left.time, phi.right.time)]
                return self.truth_set(conj(*(Eq(a, b) for a, b in pairs)), var, env)
            raise UnsupportedFragmentError(f"truth set of {render(phi)} in {var.name}")
        form = to_linear(self.reduce(phi.left, var, env)) - to_linear(self.reduce(phi.right, var, env))
        slope = form.coefficient(var)
        if any(term != var for term, _ in form.coeffs):
            raise NonlinearError(f"{render(phi)} is not linear in {var.name}")
        offset = form.const
        if isinstance(phi, Eq):
            if slope == 0:
                return IntervalSet.everything() if offset == 0 else IntervalSet.empty()
            return IntervalSet.point(-offset / slope)
        strict = isinstance(phi, Lt)
        if slope == 0:
            holds = offset < 0 if strict else offset <= 0
            return IntervalSet.everything() if holds else IntervalSet.empty()
        bound = -offset / slope
        if slope > 0:
            return IntervalSet.below(bound, closed=not strict)
        return IntervalSet.above(bound, closed=not strict)

    def reduce(self, term: Term, var: Var, env: Env) -> Term:
        """term with every subterm not mentioning var replaced by its value"""
        if var not in free_vars(term):
            return as_term(self.value(term, env))
        if term == var:
            return term
        if isinstance(term, Arith):
            return Arith(term.op, tuple(self.reduce(arg, var, env) for arg in term.args))
        if isinstance(term, Action):
            return Action(term.functor, tuple(self.reduce(arg, var, env) for arg in term.args),
                          self.reduce(term.time, var, env))
        if isinstance(term, TimeOf) and isinstance(term.action, Action):
            return self.reduce(term.action.time, var, env)
        if isinstance(term, Start) and isinstance(term.sit, Do):
            return self.reduce(TimeOf(term.sit.action), var, env)
        if isinstance(term, Do):
            return Do(self.reduce(term.action, var, env), self.reduce(term.sit, var, env))
        if isinstance(term, StaticFn):
            args = tuple(self.reduce(arg, var, env) for arg in term.args)
            body = self.model.static_fn(term.functor, args)
            if body is None:
                raise UnsupportedFragmentError(f"cannot unfold {render(term)}")
            return self.reduce(body, var, {})
        if isinstance(term, TFluent):
            world = self.worlds(self.value(term.sit, env))
            law = world.temporal_term(term.functor, self.arguments(term.args, env),
                                      self.reduce(term.time, var, env))
            return self.reduce(law, var, {})
        raise UnsupportedFragmentError(f"{render(term)} depends on {var.name}")


def evaluate(phi: Formula, model: InitialModel) -> bool:
    """
    Truth value of a closed sentence uniform in S0.

    Raises:
        UnsupportedFragmentError: for quantifiers that cannot be decided
        NotRegressableError: when phi mentions a situation other than S0
    """
    if free_vars(phi):
        names = ", ".join(sorted(v.name for v in free_vars(phi)))
        raise UnsupportedFragmentError(f"formula has free variables: {names}")
    result = Evaluator(model).truth(phi, {})
    logger.debug("evaluated %s -> %s", render(phi), result)
    return result


def evaluate_set(phi: Formula, var: Var, model: InitialModel,
                 worlds: Optional[Callable[[Term], World]] = None) -> IntervalSet:
    """Truth set of a formula whose only free variable is the real variable var"""
    stray = free_vars(phi) - {var}
    if stray:
        names = ", ".join(sorted(v.name for v in stray))
        raise UnsupportedFragmentError(f"formula has free variables besides {var.name}: {names}")
    return Evaluator(model, worlds).truth_set(phi, var, {})


def evaluate_term(term: Term, model: InitialModel,
                  worlds: Optional[Callable[[Term], World]] = None) -> Value:
    return Evaluator(model, worlds).value(term, {})
