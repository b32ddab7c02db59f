"""
Consistency of compiled state evolution axioms.

For every branch (γ, δ) of every SEA and every grounding of its object
parameters where γ can hold, the law δ is solved for the value variable:
  - no solution: the context admits no value
  - several solutions: the fluent would have more than one value
  - one solution: at t = start(s) it must equal f_init(x̄, s)
Solutions are computed symbolically in t, so no time sampling is involved.
"""

import logging
from typing import List

import sympy

from exceptions import UnsupportedFragmentError
from logic.formulas import FALSE, Eq, Formula, Or, split_conjuncts
from logic.render import render
from logic.simplify import simplify
from logic.substitution import free_vars, substitute_many
from logic.sorts import REAL
from logic.terms import Fluent, Start
from models.theory import (
    Diagnostic, StateEvolutionAxiom, TemporalBAT, TemporalChangeAxiom, error, warning,
)
from services.polynomials import SympyBridge
from services.sea_compiler import ContextOracle, check_wdp, compile_theory

logger = logging.getLogger(__name__)


class ConsistencyChecker:
    """
    Checks the laws of a compiled theory one grounding at a time.

    Args:
        theory: Temporal theory; compiled here when it is not yet
    """

    def __init__(self, theory: TemporalBAT):
        self.diagnostics: List[Diagnostic] = []
        if theory.is_compiled:
            self.theory = theory
        else:
            self.theory, found = compile_theory(theory)
            self.diagnostics.extend(found)
        self.oracle = ContextOracle(self.theory)
        self.model = self.oracle.model

    def run(self) -> List[Diagnostic]:
        for fluent in self.theory.temporal_fluents:
            sea = self.theory.seas.get(fluent)
            if sea is None:
                continue
            for context, law in sea.branches:
                self.check_branch(sea, context, law)
        logger.info("checked %d state evolution axioms: %d findings",
                    len(self.theory.seas), len(self.diagnostics))
        return self.diagnostics

    def check_branch(self, sea: StateEvolutionAxiom, context: Formula, law: Formula) -> None:
        objects = [p for p in sea.params if p.sort.is_object]
        for args in self.theory.groundings(tuple(p.sort for p in objects)):
            binding = dict(zip(objects, args))
            ground_context = substitute_many(context, binding)
            if self.oracle.satisfiable(ground_context, ()) is False:
                continue
            ground_law = simplify(substitute_many(law, binding), resolver=self.model)
            try:
                self.check_law(sea, binding, ground_law)
            except UnsupportedFragmentError as exc:
                logger.debug("law %s outside the solvable fragment: %s", render(ground_law), exc)
                self.fallback(sea, context, law)
                return

    def check_law(self, sea: StateEvolutionAxiom, binding, law: Formula) -> None:
        """Solve one ground law for the value variable and compare with the initial value"""
        where = self.grounding_text(sea, binding)
        if law == FALSE:
            self.diagnostics.append(error(
                "wdp", f"law of {sea.fluent} at {where} admits no value", sea.location, witness=where))
            return
        if isinstance(law, Or):
            raise UnsupportedFragmentError(f"disjunctive law {render(law)}")
        bridge = SympyBridge(self.model.domain)
        value = bridge.symbol(sea.value_var)
        equations = []
        for part in split_conjuncts(law):
            if sea.value_var not in free_vars(part):
                continue
            if not isinstance(part, Eq):
                raise UnsupportedFragmentError(f"{render(part)} bounds {sea.value_var.name} without defining it")
            equations.append(bridge.expr(part.left) - bridge.expr(part.right))
        if not equations:
            self.diagnostics.append(error(
                "law-uniqueness", f"law of {sea.fluent} at {where} leaves the value undetermined",
                sea.location, witness=f"{where}: {render(law)}"))
            return

        solutions = sympy.solve(equations, value, dict=True)
        if not solutions:
            self.diagnostics.append(error(
                "wdp", f"law of {sea.fluent} at {where} admits no value", sea.location,
                witness=f"{where}: {render(law)}"))
            return
        if len(solutions) > 1:
            shown = ", ".join(f"y={solution[value]}" for solution in solutions)
            self.diagnostics.append(error(
                "law-uniqueness", f"law of {sea.fluent} at {where} defines {len(solutions)} values",
                sea.location, witness=shown))
            return

        solution = sympy.expand(solutions[0][value])
        time = bridge.symbol(sea.time_var)
        if not solution.is_polynomial(time) or sympy.degree(solution, time) > 1:
            self.diagnostics.append(warning(
                "nonlinear-law", f"law of {sea.fluent} at {where} is nonlinear in "
                                 f"{sea.time_var.name}: y={solution}", sea.location))
        self.check_initial_agreement(sea, binding, bridge, solution, where)

    def check_initial_agreement(self, sea: StateEvolutionAxiom, binding, bridge: SympyBridge,
                                solution, where: str) -> None:
        """The law evaluated at t = start(s) yields f_init(x̄, s)"""
        args = tuple(binding.get(p, p) for p in sea.params)
        start = bridge.symbol(Start(sea.sit_var))
        initial = bridge.symbol(Fluent(sea.init_fluent, args, sea.sit_var, REAL))
        at_start = sympy.expand(solution.subs(bridge.symbol(sea.time_var), start))
        if sympy.simplify(at_start - initial) != 0:
            self.diagnostics.append(error(
                "initial-agreement",
                f"law of {sea.fluent} at {where} disagrees with {initial} at t = start(s)",
                sea.location, witness=f"y={at_start}≠{initial}"))

    def fallback(self, sea: StateEvolutionAxiom, context: Formula, law: Formula) -> None:
        tca = TemporalChangeAxiom(sea.fluent, sea.params, context, law, sea.value_var,
                                  sea.time_var, sea.sit_var, sea.location)
        found = check_wdp(self.theory, sea.fluent, [tca], self.oracle)
        self.diagnostics.extend(found)
        if not found:
            self.diagnostics.append(warning(
                "law-unverified", f"law {render(law)} of {sea.fluent} is outside the solvable "
                                  f"fragment; uniqueness and initial agreement are assumed",
                sea.location))

    @staticmethod
    def grounding_text(sea: StateEvolutionAxiom, binding) -> str:
        args = ", ".join(render(binding.get(p, p)) for p in sea.params)
        return f"{sea.fluent}({args})"


def check_consistency(theory: TemporalBAT) -> List[Diagnostic]:
    """
    Check every compiled law for a unique value that agrees with f_init at
    the start of its situation.

    Returns:
        Diagnostics; errors carry the offending grounding as witness
    """
    return ConsistencyChecker(theory).run()

