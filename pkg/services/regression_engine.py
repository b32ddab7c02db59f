"""
Temporal regression of regressable formulas.

Rewrites, innermost term first:
  start(do(α, σ))       -> time(α)
  f(C̄, do(α, σ))        -> ∃y (SSA of f at α, σ with value y ∧ W|y)
  f(C̄, τ, σ) temporal   -> ∃y ((τ = start(σ) ∧ y = f_init(C̄, σ)) ∨
                               (τ ≠ start(σ) ∧ ψ_f(C̄, τ, y, σ)) ∧ W|y)
  F(C̄, do(α, σ))        -> SSA right-hand side of F at α, σ
  Poss(A(C̄, τ), σ)      -> precondition of A
and simplifies after every rewrite. The case split on τ = start(σ) is
decided by arithmetic whenever both sides are ground.

Partial regression to a stop situation leaves every atemporal fluent at the
stop untouched; temporal fluents at the stop are still replaced by their
evolution, so the result is uniform in the stop.

Ground fluent terms and ground relational atoms are memoized per stop: a
term is stored as the regressed definition of its value, an atom as its
regressed formula. Engines built with the same cache share these across
queries.
"""

import logging
from typing import List, Optional

from config import Config
from exceptions import NotRegressableError, StepLimitExceeded
from logic.classify import is_regressable, is_uniform_in, situation_terms
from logic.formulas import (
    ATOMS, FALSE, TRUE, Eq, Formula, Poss, RelAtom, Truth, atom_terms, conj, disj, exists,
    formula_children, neg, rebuild_formula,
)
from logic.render import render
from logic.simplify import UnaContext, simplify
from logic.sorts import REAL
from logic.substitution import free_vars, fresh_var, replace_term, substitute, var_names
from logic.terms import (
    S0, Do, Fluent, Start, TFluent, Term, TimeOf, Var, is_ground_term, is_prefix, situation_actions, term_children,
)
from models.reports import RegressionResult, RegressionTrace
from models.theory import TemporalBAT
from services.evaluator import InitialModel
from services.sea_compiler import ensure_compiled
from utils.cache import ResultCache

logger = logging.getLogger(__name__)


def depth(sit: Term) -> int:
    return len(situation_actions(sit))


class RegressionEngine:
    """
    Regression against one compiled theory.

    Args:
        theory: Temporal theory; compiled on construction when needed
        resolve_initial: Replace statics, start(S0) and relational fluents at S0
            by their values from the initial theory while simplifying
        step_limit: Maximum number of rewrites per query
        cache: Memo of regressed ground terms and atoms; pass one cache per
            compiled theory to share it between engines
    """

    def __init__(self, theory: TemporalBAT, resolve_initial: bool = True,
                 step_limit: Optional[int] = None, cache: Optional[ResultCache] = None):
        self.theory = ensure_compiled(theory)
        self.model = InitialModel(self.theory)
        self.resolve_initial = resolve_initial
        self.resolver = self.model if resolve_initial else None
        self.una = UnaContext(self.theory.actions)
        self.step_limit = step_limit or Config.REGRESSION_STEP_LIMIT
        self.cache = cache or ResultCache(maxsize=Config.CACHE_MAXSIZE, ttl=Config.REGRESSION_CACHE_TTL)
        self.hits = 0
        self._steps = 0
        self._trace: Optional[RegressionTrace] = None

    def __repr__(self):
        return f"RegressionEngine({self.theory.name or 'anonymous'}, resolve_initial={self.resolve_initial})"

    # ==== ENTRY POINTS ====

    def regress(self, phi: Formula, stop: Term = S0) -> RegressionResult:
        """
        Regress phi down to stop.

        Args:
            phi: Regressable formula; free real variables are allowed
            stop: Ground situation that is a prefix of every situation in phi

        Returns:
            RegressionResult with the formula uniform in stop and the trace

        Raises:
            NotRegressableError: when phi is not regressable or stop is not a prefix
            StepLimitExceeded: when the rewrite bound is hit
        """
        if not is_regressable(phi, self.theory.actions):
            raise NotRegressableError(f"{render(phi)} is not regressable")
        for sit in situation_terms(phi):
            if not is_prefix(stop, sit):
                raise NotRegressableError(f"{render(stop)} is not a prefix of {render(sit)}")

        self._steps = 0
        self._trace = RegressionTrace()
        regressed = self.formula(phi, stop)
        final = self.simplify(regressed)
        self._trace.record("simplify", regressed, final, depth(stop))
        if not is_uniform_in(final, stop):
            raise NotRegressableError(f"regression of {render(phi)} is not uniform in {render(stop)}")

        logger.info("regressed %s to %s in %d steps (%d memo hits)", render(phi), render(stop), self._steps,
                    self.hits)
        return RegressionResult(phi, final, stop, self._trace)

    def simplify(self, phi: Formula) -> Formula:
        return simplify(phi, self.una, self.resolver)

    # ==== FORMULAS ====

    def formula(self, phi: Formula, stop: Term) -> Formula:
        if isinstance(phi, Truth):
            return phi
        if isinstance(phi, ATOMS):
            return self.atom(phi, stop)
        return rebuild_formula(phi, (self.formula(child, stop) for child in formula_children(phi)))

    def atom(self, phi: Formula, stop: Term) -> Formula:
        redex = self.redex(phi, stop)
        if redex is not None:
            return self.formula(self.rewrite_term(phi, redex, stop), stop)
        if isinstance(phi, Poss):
            return self.formula(self.rewrite_poss(phi), stop)
        if isinstance(phi, RelAtom) and depth(phi.sit) > depth(stop):
            return self.relational(phi, stop)
        return phi

    def relational(self, phi: RelAtom, stop: Term) -> Formula:
        if free_vars(phi):
            return self.formula(self.rewrite_relational(phi), stop)
        key = self._memo_key("atom", phi, stop)
        cached = self.cache.get(key)
        if cached is not None:
            self.hits += 1
            return self._step("memo", phi, cached, phi.sit)
        regressed = self.simplify(self.formula(self.rewrite_relational(phi), stop))
        self.cache.set(key, regressed)
        return regressed

    def _memo_key(self, kind: str, node, stop: Term) -> str:
        return self.cache.make_key(kind, render(node), render(stop), self.resolve_initial)

    def _tick(self) -> None:
        self._steps += 1
        if self._steps > self.step_limit:
            raise StepLimitExceeded(f"regression exceeded {self.step_limit} rewrite steps")

    # ==== TERMS ====

    def redex(self, phi: Formula, stop: Term) -> Optional[Term]:
        """Innermost term of an atom that regression rewrites"""
        for term in atom_terms(phi):
            found = self._innermost(term, stop)
            if found is not None:
                return found
        return None

    def _innermost(self, term: Term, stop: Term) -> Optional[Term]:
        for child in term_children(term):
            found = self._innermost(child, stop)
            if found is not None:
                return found
        if isinstance(term, Start) and isinstance(term.sit, Do) and depth(term.sit) > depth(stop):
            return term
        if isinstance(term, Fluent) and depth(term.sit) > depth(stop):
            return term
        if isinstance(term, TFluent):
            return term
        return None

    def rewrite_term(self, phi: Formula, term: Term, stop: Term) -> Formula:
        self._tick()
        if isinstance(term, Start):
            after = replace_term(phi, term, TimeOf(term.sit.action))
            return self._step("start-of-do", phi, self.simplify(after), term.sit)
        if not is_ground_term(term):
            return self._rewrite_once(phi, term)
        return self.rewrite_memoized(phi, term, stop)

    def _rewrite_once(self, phi: Formula, term: Term) -> Formula:
        if isinstance(term, TFluent):
            return self.rewrite_temporal(phi, term)
        return self.rewrite_functional(phi, term)

    def rewrite_memoized(self, phi: Formula, term: Term, stop: Term) -> Formula:
        """
        Replace a ground fluent term by its regressed definition.

        The definition is the regression of term = y down to stop; it is
        computed once per term and stop and renamed apart for each use.
        """
        placeholder = Var("y", term.sort)
        key = self._memo_key("term", term, stop)
        definition = self.cache.get(key)
        rule, opening = "memo", None
        if definition is None:
            rule, opening = "definition", len(self._trace) if self._trace is not None else None
            seed = Eq(term, placeholder)
            definition = self.simplify(self.formula(self._rewrite_once(seed, term), stop))
            self.cache.set(key, definition)
        else:
            self.hits += 1
        value = self._value_var(phi, definition, term.sort)
        lifted = exists([value], conj(substitute(definition, placeholder, value), replace_term(phi, term, value)))
        return self._step(rule, phi, self.simplify(lifted), term.sit, f"{render(term)} regressed to {render(stop)}",
                          at=opening)

    def _value_var(self, phi: Formula, definition: Formula, sort) -> Var:
        return fresh_var(Var("y", sort), var_names(phi) | var_names(definition))

    def rewrite_functional(self, phi: Formula, term: Fluent) -> Formula:
        """Reiter's rule for atemporal functional fluents and init companions"""
        sit = term.sit
        rule = "init-ssa" if term.functor in self.theory.init_ssas else "functional-ssa"
        axiom = self.theory.successor_axiom(term.functor)
        if axiom is None:
            after = replace_term(phi, term, Fluent(term.functor, term.args, sit.sit, term.result_sort))
            return self._step(rule, phi, after, sit, "no successor state axiom; value persists")
        probe = axiom.instantiate(term.args, sit.action, sit.sit)
        value = self._value_var(phi, probe, term.sort)
        definition = axiom.instantiate(term.args, sit.action, sit.sit, value)
        lifted = exists([value], conj(definition, replace_term(phi, term, value)))
        return self._step(rule, phi, self.simplify(lifted), sit)

    def rewrite_temporal(self, phi: Formula, term: TFluent) -> Formula:
        """Replace a temporal fluent by its initial value or its evolution in its situation"""
        sea = self.theory.seas[term.functor]
        sit = term.sit
        probe = sea.instantiate(term.args, term.time, sea.value_var, sit)
        value = self._value_var(phi, probe, REAL)
        at_start = Eq(term.time, Start(sit))
        initial = Eq(value, Fluent(sea.init_fluent, term.args, sit, REAL))
        evolution = sea.instantiate(term.args, term.time, value, sit)
        decided = self.simplify(at_start)
        note = ""
        if decided == TRUE:
            definition = initial
        elif decided == FALSE:
            definition = evolution
        else:
            definition = disj(conj(at_start, initial), conj(neg(at_start), evolution))
            note = f"{render(term.time)} = start({render(sit)}) undecided; both cases kept"
        lifted = exists([value], conj(definition, replace_term(phi, term, value)))
        return self._step("temporal-sea", phi, self.simplify(lifted), sit, note)

    # ==== ATOMS ====

    def rewrite_poss(self, phi: Poss) -> Formula:
        self._tick()
        axiom = self.theory.poss.get(phi.action.functor)
        body = FALSE if axiom is None else axiom.instantiate(phi.action, phi.sit)
        return self._step("poss", phi, self.simplify(body), phi.sit)

    def rewrite_relational(self, phi: RelAtom) -> Formula:
        self._tick()
        sit = phi.sit
        axiom = self.theory.successor_axiom(phi.functor)
        if axiom is None:
            return self._step("relational-ssa", phi, RelAtom(phi.functor, phi.args, sit.sit), sit,
                              "no successor state axiom; truth persists")
        body = axiom.instantiate(phi.args, sit.action, sit.sit)
        return self._step("relational-ssa", phi, self.simplify(body), sit)

    def _step(self, rule: str, before: Formula, after: Formula, sit: Term, note: str = "",
              at: Optional[int] = None) -> Formula:
        if self._trace is not None:
            self._trace.record(rule, before, after, depth(sit), note, at)
        logger.debug("%s at depth %d: %s", rule, depth(sit), render(after))
        return after


# ==== MODULE API ====

def regress(phi: Formula, theory: TemporalBAT, resolve_initial: bool = True) -> Formula:
    """R[phi]: an equivalent formula uniform in S0"""
    return RegressionEngine(theory, resolve_initial).regress(phi).formula


def partial_regress(phi: Formula, stop: Term, theory: TemporalBAT,
                    resolve_initial: bool = True) -> Formula:
    """R^stop[phi]: an equivalent formula uniform in stop"""
    return RegressionEngine(theory, resolve_initial).regress(phi, stop).formula


def regress_with_trace(phi: Formula, theory: TemporalBAT, stop: Term = S0,
                       resolve_initial: bool = True) -> RegressionResult:
    return RegressionEngine(theory, resolve_initial).regress(phi, stop)


def trace_records(result: RegressionResult) -> List[dict]:
    return [step.to_record(index) for index, step in enumerate(result.trace, start=1)]
