"""
Definitional checks of a parsed temporal theory.

Covers what parsing leaves open: every action is declared and temporal,
right-hand sides are uniform in their situation, contexts do not mention
time, temporal fluents have their init companion, the dependency relation
among temporal fluents is acyclic, the initial theory is complete and free
of contradictions, and the state constraints hold at S0.
"""

import logging
from typing import Dict, Iterable, List, Optional, Tuple

from exceptions import ReasonerError
from logic.classify import is_uniform_in
from logic.formulas import Forall, Formula, atom_terms, iter_atoms
from logic.render import render
from logic.sorts import REAL, SITUATION
from logic.substitution import free_vars, substitute_many
from logic.terms import S0, Action, Arith, Term, Var, iter_subterms
from models.theory import (
    Diagnostic, Fact, FluentKind, StateConstraint, TemporalBAT, error, has_errors, warning,
)
from parsing.printer import format_fact
from services.evaluator import Evaluator, InitialModel, call_text
from services.sea_compiler import stratification_diagnostics

logger = logging.getLogger(__name__)

SIT = Var("s", SITUATION)


def _terms(phi: Formula) -> Iterable[Term]:
    for atom in iter_atoms(phi):
        for term in atom_terms(atom):
            yield from iter_subterms(term)


def _real_vars(term: Term) -> set:
    return {v for v in free_vars(term) if v.sort == REAL}


class TheoryValidator:
    """
    Collects diagnostics for one theory.

    Args:
        theory: Parsed temporal theory
    """

    def __init__(self, theory: TemporalBAT):
        self.theory = theory
        self.model = InitialModel(theory)
        self.diagnostics: List[Diagnostic] = []

    def run(self) -> List[Diagnostic]:
        self.check_actions()
        self.check_axioms_present()
        self.check_uniformity()
        self.check_change_axioms()
        self.diagnostics.extend(stratification_diagnostics(self.theory))
        self.check_facts()
        self.check_completeness()
        if not has_errors(self.diagnostics):
            self.check_constraints()
        logger.info("validated %r: %d errors, %d warnings", self.theory,
                    sum(d.is_error for d in self.diagnostics),
                    sum(not d.is_error for d in self.diagnostics))
        return self.diagnostics

    def formulas(self) -> Iterable[Tuple[str, Formula, object]]:
        """Every axiom body with a label and location"""
        theory = self.theory
        for name, axiom in theory.poss.items():
            yield f"precondition of {name}", axiom.body, axiom.location
        for name, axiom in theory.ssas.items():
            yield f"successor state axiom of {name}", axiom.body, axiom.location
        for name, spec in theory.effects.items():
            for case in spec.cases:
                yield f"effect on {name}", case.guard, case.location
        for name, tcas in theory.tcas.items():
            for tca in tcas:
                yield f"context of {name}", tca.context, tca.location
                yield f"law of {name}", tca.law, tca.location
        for constraint in theory.constraints:
            yield "state constraint", constraint.formula, constraint.location

    # ==== ACTIONS AND AXIOMS ====

    def check_actions(self) -> None:
        """Every action term is declared, has the declared arity and a real time argument"""
        for label, phi, location in self.formulas():
            for term in _terms(phi):
                if not isinstance(term, Action):
                    continue
                decl = self.theory.actions.get(term.functor)
                if decl is None:
                    self.diagnostics.append(error(
                        "undeclared-action", f"{label} mentions undeclared action {term.functor}",
                        location, witness=render(term)))
                elif len(term.args) != len(decl.arg_sorts) or term.time.sort != REAL:
                    self.diagnostics.append(error(
                        "atemporal-action", f"{label}: {render(term)} is not a temporal "
                                            f"instance of {term.functor}", location))

    def check_axioms_present(self) -> None:
        theory = self.theory
        for name, decl in theory.actions.items():
            if name not in theory.poss:
                self.diagnostics.append(warning(
                    "missing-poss", f"action {name} has no precondition axiom and is never possible",
                    decl.location))
        for decl in theory.fluents.values():
            if decl.kind in (FluentKind.RELATIONAL, FluentKind.FUNCTIONAL) and decl.name not in theory.ssas:
                self.diagnostics.append(warning(
                    "missing-ssa", f"fluent {decl.name} has no successor state axiom; "
                                   f"its value never changes", decl.location))
            if decl.kind is FluentKind.TEMPORAL:
                companion = theory.fluents.get(decl.companion or "")
                if companion is None or companion.kind is not FluentKind.INIT:
                    self.diagnostics.append(error(
                        "missing-init-ssa", f"temporal fluent {decl.name} has no init companion "
                                            f"for its init-SSA", decl.location))
        for name, spec in theory.effects.items():
            decl = theory.fluents.get(name)
            if decl is None or decl.kind is not FluentKind.TEMPORAL:
                self.diagnostics.append(error(
                    "init-ssa-target", f"effect cases given for {name}, which is not a temporal fluent",
                    spec.location))

    def check_uniformity(self) -> None:
        theory = self.theory
        bodies = [(f"precondition of {name}", axiom.body, axiom.sit, axiom.location)
                  for name, axiom in theory.poss.items()]
        bodies += [(f"successor state axiom of {name}", axiom.body, axiom.sit, axiom.location)
                   for name, axiom in theory.ssas.items()]
        for name, tcas in theory.tcas.items():
            for tca in tcas:
                bodies.append((f"context of {name}", tca.context, tca.sit_var, tca.location))
                bodies.append((f"law of {name}", tca.law, tca.sit_var, tca.location))
        for name, spec in theory.effects.items():
            for case in spec.cases:
                bodies.append((f"effect on {name}", case.guard, SIT, case.location))
        for label, body, sit, location in bodies:
            if not is_uniform_in(body, sit):
                self.diagnostics.append(error(
                    "non-uniform", f"{label} is not uniform in {sit.name}", location,
                    witness=render(body)))

    def check_change_axioms(self) -> None:
        for name, tcas in self.theory.tcas.items():
            for tca in tcas:
                if {tca.time_var, tca.value_var} & free_vars(tca.context):
                    self.diagnostics.append(error(
                        "context-time", f"context must be time-independent in change axiom of {name}",
                        tca.location, witness=render(tca.context)))
                allowed = set(tca.params) | {tca.value_var, tca.time_var, tca.sit_var}
                stray = sorted(v.name for v in free_vars(tca.law) - allowed)
                if stray:
                    self.diagnostics.append(error(
                        "free-variable", f"law of {name} has free variables {', '.join(stray)}",
                        tca.location))
                if tca.value_var not in free_vars(tca.law):
                    self.diagnostics.append(error(
                        "law-uniqueness", f"law of {name} does not mention {tca.value_var.name}",
                        tca.location, witness=render(tca.law)))
                self.check_linear(f"law of {name}", tca.law, tca.location)

    def check_linear(self, label: str, phi: Formula, location) -> None:
        for term in _terms(phi):
            if isinstance(term, Arith) and term.op == "*":
                mentioning = [arg for arg in term.args if _real_vars(arg)]
                if len(mentioning) > 1:
                    self.diagnostics.append(warning(
                        "nonlinear", f"{label} multiplies real variables in {render(term)}; "
                                     f"it is outside linear real arithmetic", location))
                    return

    # ==== INITIAL THEORY ====

    def check_facts(self) -> None:
        """Two facts about the same ground tuple must agree"""
        seen: Dict[Tuple, Fact] = {}
        for fact in self.theory.initial.facts:
            key = (fact.functor, fact.args)
            earlier = seen.get(key)
            if earlier is None:
                seen[key] = fact
                continue
            if earlier.value == fact.value:
                self.diagnostics.append(warning(
                    "duplicate-fact", f"{format_fact(fact)} is stated twice", fact.location))
                continue
            witness = f"{format_fact(earlier)} / {format_fact(fact)}"
            if isinstance(fact.value, bool):
                self.diagnostics.append(error(
                    "contradictory-facts", f"initial theory asserts and denies {fact.functor}",
                    fact.location, witness=witness))
            elif fact.functor in self.theory.fluents:
                self.diagnostics.append(error(
                    "double-valued", "functional fluent double-valued at S0", fact.location,
                    witness=witness))
            else:
                self.diagnostics.append(error(
                    "double-valued", f"static function {fact.functor} double-valued",
                    fact.location, witness=witness))

    def check_completeness(self) -> None:
        theory = self.theory
        if theory.initial.start is None:
            self.diagnostics.append(error("incomplete", "start(S0) is not given", witness="start(S0)"))
        for decl in theory.statics.values():
            if decl.is_predicate or not all(sort.is_object for sort in decl.arg_sorts):
                continue
            for args in theory.groundings(decl.arg_sorts):
                if self.model.static_fn(decl.name, args) is None:
                    self.diagnostics.append(error(
                        "incomplete", f"static function {decl.name} has no value on "
                                      f"{call_text(decl.name, args)}", decl.location,
                        witness=call_text(decl.name, args)))
        for decl in theory.fluents.values():
            if decl.kind not in (FluentKind.FUNCTIONAL, FluentKind.INIT):
                continue
            for args in theory.groundings(decl.arg_sorts):
                if self.model.fact_for(decl.name, args) is None:
                    text = call_text(decl.name, args + (S0,))
                    self.diagnostics.append(error(
                        "incomplete", f"no initial value for {text}", decl.location, witness=text))

    def check_constraints(self) -> None:
        evaluator = Evaluator(self.model)
        for constraint in self.theory.constraints:
            try:
                holds = evaluator.truth(constraint.formula, {})
            except ReasonerError as exc:
                self.diagnostics.append(warning(
                    "constraint-unverified", f"state constraint {render(constraint.formula)} "
                                             f"could not be evaluated: {exc}", constraint.location))
                continue
            if not holds:
                self.diagnostics.append(error(
                    "constraint-violated", f"state constraint {render(constraint.formula)} "
                                           f"is false at S0", constraint.location,
                    witness=self.counterexample(constraint, evaluator)))

    def counterexample(self, constraint: StateConstraint, evaluator: Evaluator) -> Optional[str]:
        """First grounding of the leading universal object quantifiers that falsifies the body"""
        variables = []
        body = constraint.formula
        while isinstance(body, Forall) and body.var.sort.is_object:
            variables.append(body.var)
            body = body.body
        if not variables:
            return render(constraint.formula)
        for args in self.theory.groundings(tuple(v.sort for v in variables)):
            binding = dict(zip(variables, args))
            if not evaluator.truth(substitute_many(body, binding), {}):
                return ", ".join(f"{v.name}={obj.name}" for v, obj in binding.items())
        return render(constraint.formula)


def validate_theory(theory: TemporalBAT) -> List[Diagnostic]:
    """
    Check a parsed theory against the conditions of a temporal basic action theory.

    Args:
        theory: Parsed theory

    Returns:
        Diagnostics; errors block compilation, warnings do not
    """
    return TheoryValidator(theory).run()
