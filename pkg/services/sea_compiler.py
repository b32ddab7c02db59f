"""
Compilation of temporal change axioms into state evolution axioms and of
effect cases into init-SSAs.

For each temporal fluent f the compiler
  1. makes the contexts of its change axioms pairwise exclusive,
  2. collects them into the SEA f(x̄,t,s) = y <-> Φ ∨ (y = f_init(x̄,s) ∧ ¬Ψ),
  3. derives the init-SSA of f_init from the effect cases, with continuity
     as the default,
and checks that the dependency relation among temporal fluents is acyclic.

The builders for the intermediate axioms of the equivalence argument
(PNFCA, Cons, ECA, NNFCA, SEA1, SEA2) are exposed for testing and for
`compile --appendix`.
"""

import logging
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Set, Tuple

from exceptions import ConsistencyError, StratificationError, UnsupportedFragmentError
from logic.formulas import (
    FALSE, TRUE, Eq, Formula, Iff, Implies, atom_terms, conj, disj, exists, iter_atoms, neg, neq,
    split_conjuncts,
)
from logic.render import render
from logic.simplify import simplify
from logic.sorts import REAL, SITUATION
from logic.substitution import fresh_var, free_vars, replace_term, substitute, substitute_many, var_names
from logic.terms import S0, Start, TFluent, Term, Var, iter_subterms
from models.theory import (
    Diagnostic, EffectCase, EffectSpec, InitSSA, StateEvolutionAxiom, TemporalBAT,
    TemporalChangeAxiom, error, has_errors, init_name, warning,
)
from services.evaluator import InitialModel
from services.polynomials import lra_satisfiable

logger = logging.getLogger(__name__)

VALUE = Var("y", REAL)
TIME = Var("t", REAL)
SIT = Var("s", SITUATION)

# ==== PARAMETERS ====


def default_params(theory: TemporalBAT, fluent: str) -> Tuple[Var, ...]:
    decl = theory.fluents[fluent]
    return tuple(Var(f"x{index + 1}", sort) for index, sort in enumerate(decl.arg_sorts))


def canonical_params(theory: TemporalBAT, fluent: str,
                     tcas: Sequence[TemporalChangeAxiom]) -> Tuple[Var, ...]:
    """Parameters of the first change axiom, or generated ones"""
    return tcas[0].params if tcas else default_params(theory, fluent)


def rename_tca(tca: TemporalChangeAxiom, params: Tuple[Var, ...]) -> TemporalChangeAxiom:
    if tca.params == params:
        return tca
    mapping = dict(zip(tca.params, params))
    return replace(tca, params=params, context=substitute_many(tca.context, mapping),
                   law=substitute_many(tca.law, mapping))


def constraints_at(theory: TemporalBAT, sit: Term = SIT) -> Formula:
    """State constraints read at an arbitrary situation"""
    return conj(*(replace_term(c.formula, S0, sit) for c in theory.constraints))


# ==== CONTEXT SATISFIABILITY ====

class ContextOracle:
    """
    Decides satisfiability of situation-independent conditions over every
    grounding of the object parameters, under the state constraints.

    Fluents at the situation variable are unknowns; statics are resolved from
    the initial theory.
    """

    def __init__(self, theory: TemporalBAT, model: Optional[InitialModel] = None):
        self.theory = theory
        self.model = model or InitialModel(theory)
        self.constraints = constraints_at(theory)

    def satisfiable(self, phi: Formula, params: Sequence[Var]) -> Optional[bool]:
        """True, False, or None when outside the decidable fragment"""
        grounded = [p for p in params if p.sort.is_object]
        for args in self.theory.groundings(tuple(p.sort for p in grounded)):
            ground = substitute_many(conj(phi, self.constraints), dict(zip(grounded, args)))
            reduced = simplify(ground, resolver=self.model)
            if reduced == FALSE:
                continue
            if reduced == TRUE:
                return True
            try:
                if lra_satisfiable(reduced, self.model.domain):
                    return True
            except UnsupportedFragmentError as exc:
                logger.debug("satisfiability of %s undecided: %s", render(reduced), exc)
                return None
        return False


def _complementary(first: Formula, second: Formula) -> bool:
    parts = split_conjuncts(second)
    return any(neg(part) in parts for part in split_conjuncts(first))


def disjoin_contexts(tcas: Sequence[TemporalChangeAxiom], theory: TemporalBAT,
                     diagnostics: Optional[List[Diagnostic]] = None,
                     oracle: Optional[ContextOracle] = None) -> Tuple[TemporalChangeAxiom, ...]:
    """
    Make the contexts of a fluent's change axioms pairwise exclusive.

    Overlapping contexts γa, γb are replaced by γa ∧ ¬γb, ¬γa ∧ γb and
    γa ∧ γb, the last one keeping the law of γa; pieces whose context can
    never hold are dropped.

    Args:
        tcas: Change axioms of one fluent
        theory: Theory supplying statics, domains and state constraints
        diagnostics: Receives a warning for each pair whose overlap cannot be decided

    Returns:
        Change axioms over common parameters with exclusive contexts
    """
    if not tcas:
        return ()
    params = canonical_params(theory, tcas[0].fluent, tcas)
    pending = [rename_tca(tca, params) for tca in tcas]
    if len(pending) == 1:
        return tuple(pending)
    oracle = oracle or ContextOracle(theory)
    done: List[TemporalChangeAxiom] = []
    while pending:
        current = pending.pop(0)
        for index, other in enumerate(done):
            if _complementary(current.context, other.context):
                continue
            overlap = oracle.satisfiable(conj(current.context, other.context), params)
            if overlap is None:
                if diagnostics is not None:
                    diagnostics.append(warning(
                        "context-overlap",
                        f"cannot decide whether contexts of {current.fluent} overlap; add a state "
                        f"constraint excluding {render(other.context)} and {render(current.context)}",
                        current.location))
                continue
            if overlap:
                del done[index]
                pieces = _split(other, current)
                logger.debug("split overlapping contexts of %s into %d", current.fluent, len(pieces))
                pending = [piece for piece in pieces
                           if oracle.satisfiable(piece.context, params) is not False] + pending
                break
        else:
            done.append(current)
    return tuple(done)


def _split(first: TemporalChangeAxiom, second: TemporalChangeAxiom) -> List[TemporalChangeAxiom]:
    a, b = first.context, second.context
    return [
        replace(first, context=simplify(conj(a, neg(b)))),
        replace(second, context=simplify(conj(neg(a), b))),
        replace(first, context=simplify(conj(a, b))),
    ]


# ==== NORMAL FORMS ====

def build_pnf(tcas: Sequence[TemporalChangeAxiom]) -> Formula:
    """Φ(x̄,y,t,s), the disjunction of context-and-law pairs"""
    return disj(*(conj(tca.context, tca.law) for tca in tcas))


def _frame(theory: TemporalBAT, fluent: str, tcas: Sequence[TemporalChangeAxiom]):
    params = canonical_params(theory, fluent, tcas)
    tcas = [rename_tca(tca, params) for tca in tcas]
    value = tcas[0].value_var if tcas else VALUE
    time = tcas[0].time_var if tcas else TIME
    sit = tcas[0].sit_var if tcas else SIT
    return tcas, params, value, time, sit


def _other(phi: Formula, var: Var, base: str = "z") -> Var:
    return fresh_var(Var(base, var.sort), var_names(phi) | {var.name})


def build_pnfca(theory: TemporalBAT, fluent: str, tcas: Sequence[TemporalChangeAxiom]) -> Formula:
    """Φ -> f(x̄,t,s) = y"""
    tcas, params, y, t, s = _frame(theory, fluent, tcas)
    return Implies(build_pnf(tcas), Eq(TFluent(fluent, params, t, s), y))


def build_cons(theory: TemporalBAT, fluent: str, tcas: Sequence[TemporalChangeAxiom]) -> Formula:
    """Φ(y) ∧ Φ(y') -> y = y'"""
    tcas, _, y, _, _ = _frame(theory, fluent, tcas)
    phi = build_pnf(tcas)
    other = fresh_var(y, var_names(phi))
    return Implies(conj(phi, substitute(phi, y, other)), Eq(y, other))


def build_eca(theory: TemporalBAT, fluent: str, tcas: Sequence[TemporalChangeAxiom]) -> Formula:
    """f(x̄,start(s),s) ≠ f(x̄,t,s) -> ∃y Φ"""
    tcas, params, y, t, s = _frame(theory, fluent, tcas)
    initial = TFluent(fluent, params, Start(s), s)
    return Implies(neq(initial, TFluent(fluent, params, t, s)), exists([y], build_pnf(tcas)))


def _no_other_value(phi: Formula, y: Var) -> Formula:
    """¬∃z (Φ(z) ∧ y ≠ z)"""
    z = _other(phi, y)
    return neg(exists([z], conj(substitute(phi, y, z), neq(y, z))))


def build_nnfca(theory: TemporalBAT, fluent: str, tcas: Sequence[TemporalChangeAxiom]) -> Formula:
    """f(x̄,t,s) = y -> ¬∃z (Φ(z) ∧ y ≠ z)"""
    tcas, params, y, t, s = _frame(theory, fluent, tcas)
    return Implies(Eq(TFluent(fluent, params, t, s), y), _no_other_value(build_pnf(tcas), y))


def build_sea1(theory: TemporalBAT, fluent: str, tcas: Sequence[TemporalChangeAxiom]) -> Formula:
    """f(x̄,t,s) = y <-> Φ ∨ (f(x̄,start(s),s) = y ∧ ¬∃z (Φ(z) ∧ y ≠ z))"""
    tcas, params, y, t, s = _frame(theory, fluent, tcas)
    phi = build_pnf(tcas)
    initial = Eq(TFluent(fluent, params, Start(s), s), y)
    return Iff(Eq(TFluent(fluent, params, t, s), y), disj(phi, conj(initial, _no_other_value(phi, y))))


def build_sea2(theory: TemporalBAT, fluent: str, tcas: Sequence[TemporalChangeAxiom]) -> Formula:
    """f(x̄,t,s) = y <-> Φ ∨ (f(x̄,start(s),s) = y ∧ ¬⋁ γᵢ)"""
    tcas, params, y, t, s = _frame(theory, fluent, tcas)
    closure = disj(*(tca.context for tca in tcas))
    initial = Eq(TFluent(fluent, params, Start(s), s), y)
    return Iff(Eq(TFluent(fluent, params, t, s), y), disj(build_pnf(tcas), conj(initial, neg(closure))))


def check_wdp(theory: TemporalBAT, fluent: str, tcas: Sequence[TemporalChangeAxiom],
              oracle: Optional[ContextOracle] = None) -> List[Diagnostic]:
    """
    Check that every context admits a value: γ -> ∃y δ, for every grounding.

    Returns:
        An error per change axiom whose law has no solution somewhere, a
        warning per law outside the decidable fragment
    """
    oracle = oracle or ContextOracle(theory)
    found = []
    for tca in tcas:
        undefined = conj(tca.context, neg(exists([tca.value_var], tca.law)))
        verdict = oracle.satisfiable(undefined, tca.params)
        if verdict is None:
            found.append(warning("wdp-unverified",
                                 f"cannot verify that the law of {fluent} under {render(tca.context)} "
                                 f"defines a value", tca.location))
        elif verdict:
            found.append(error("wdp", f"context {render(tca.context)} of {fluent} admits no value "
                                      f"for {render(tca.law)}", tca.location))
    return found


def appendix_axioms(theory: TemporalBAT, fluent: str) -> List[Tuple[str, Formula]]:
    """Named intermediate axioms for one temporal fluent"""
    tcas = disjoin_contexts(theory.tcas.get(fluent, ()), theory)
    return [
        ("PNFCA", build_pnfca(theory, fluent, tcas)),
        ("Cons", build_cons(theory, fluent, tcas)),
        ("ECA", build_eca(theory, fluent, tcas)),
        ("NNFCA", build_nnfca(theory, fluent, tcas)),
        ("SEA1", build_sea1(theory, fluent, tcas)),
        ("SEA2", build_sea2(theory, fluent, tcas)),
    ]


# ==== DERIVATION ====

def derive_sea(theory: TemporalBAT, fluent: str,
               tcas: Sequence[TemporalChangeAxiom]) -> StateEvolutionAxiom:
    """
    State evolution axiom from change axioms with exclusive contexts.

    The frame branch reads the value at the start of the situation from the
    init companion, which keeps the right-hand side free of f itself.
    """
    tcas, params, y, t, s = _frame(theory, fluent, tcas)
    decl = theory.fluents[fluent]
    location = tcas[0].location if tcas else decl.location
    return StateEvolutionAxiom(fluent, params, tuple((tca.context, tca.law) for tca in tcas),
                               decl.companion or init_name(fluent), y, t, s, location)


def _locals(case: EffectCase, params: Sequence[Var]) -> List[Var]:
    found = free_vars(case.pattern) | free_vars(case.guard) | free_vars(case.value)
    return sorted((v for v in found if v not in params and v.sort != SITUATION), key=lambda v: v.name)


def _apart(case: EffectCase, params: Sequence[Var], avoid: Set[str]) -> EffectCase:
    mapping = {}
    used = set(avoid)
    for var in _locals(case, params):
        fresh = fresh_var(var, used)
        used.add(fresh.name)
        mapping[var] = fresh
    return EffectCase(substitute_many(case.pattern, mapping), substitute_many(case.guard, mapping),
                      substitute_many(case.value, mapping), case.location)


def derive_init_ssa(theory: TemporalBAT, fluent: str, spec: Optional[EffectSpec],
                    diagnostics: Optional[List[Diagnostic]] = None,
                    oracle: Optional[ContextOracle] = None) -> InitSSA:
    """
    Init-SSA of f_init from the effect cases of f.

    A later case overlapping an earlier one with the same value is
    restricted to where the earlier one does not apply; overlapping cases
    with different values are errors.
    """
    params = spec.params if spec is not None else default_params(theory, fluent)
    cases = list(spec.cases) if spec is not None else []
    oracle = oracle or ContextOracle(theory)
    exclusive: List[EffectCase] = []
    for case in cases:
        restricted = case
        for earlier in exclusive:
            names = var_names(case.pattern) | var_names(case.guard) | var_names(case.value)
            renamed = _apart(earlier, params, names | {p.name for p in params})
            applies = conj(Eq(case.pattern, renamed.pattern), renamed.guard)
            scope = [v for v in _locals(case, params) + _locals(renamed, params) if v.sort.is_object]
            overlap = oracle.satisfiable(exists(scope, conj(applies, case.guard)), params)
            if overlap is None:
                if diagnostics is not None:
                    diagnostics.append(warning(
                        "effect-overlap", f"cannot decide whether effects on {fluent} for "
                                          f"{render(earlier.pattern)} and {render(case.pattern)} overlap",
                        case.location))
                continue
            if not overlap:
                continue
            conflict = exists(scope, conj(applies, case.guard, neq(case.value, renamed.value)))
            if oracle.satisfiable(conflict, params) is not False:
                if diagnostics is not None:
                    diagnostics.append(error(
                        "effect-conflict", f"effects on {fluent} for {render(earlier.pattern)} and "
                                           f"{render(case.pattern)} overlap with different values",
                        case.location))
                continue
            earlier_locals = [v for v in _locals(renamed, params)]
            guard = conj(restricted.guard, neg(exists(earlier_locals, applies)))
            restricted = replace(restricted, guard=simplify(guard))
        exclusive.append(restricted)
    return InitSSA(init_name(fluent), fluent, tuple(params), tuple(exclusive),
                   location=spec.location if spec is not None else None)


# ==== STRATIFICATION ====

def _subterms(phi: Formula):
    for atom in iter_atoms(phi):
        for term in atom_terms(atom):
            yield from iter_subterms(term)


def temporal_dependencies(theory: TemporalBAT) -> Dict[str, Set[str]]:
    """f -> temporal fluents occurring in the contexts and laws of f"""
    temporal = set(theory.temporal_fluents)
    graph: Dict[str, Set[str]] = {f: set() for f in theory.temporal_fluents}
    for fluent, tcas in theory.tcas.items():
        for tca in tcas:
            for sub in _subterms(conj(tca.context, tca.law)):
                if isinstance(sub, TFluent) and sub.functor in temporal:
                    graph.setdefault(fluent, set()).add(sub.functor)
    return graph


def find_cycle(graph: Dict[str, Set[str]]) -> Optional[List[str]]:
    """A cycle f ≻ ... ≻ f as a list of names, first name repeated at the end"""
    state: Dict[str, int] = {}
    path: List[str] = []

    def visit(node: str) -> Optional[List[str]]:
        state[node] = 1
        path.append(node)
        for nxt in sorted(graph.get(node, ())):
            if state.get(nxt) == 1:
                return path[path.index(nxt):] + [nxt]
            if nxt not in state:
                cycle = visit(nxt)
                if cycle:
                    return cycle
        path.pop()
        state[node] = 2
        return None

    for node in sorted(graph):
        if node not in state:
            cycle = visit(node)
            if cycle:
                return cycle
    return None


def stratification_diagnostics(theory: TemporalBAT) -> List[Diagnostic]:
    cycle = find_cycle(temporal_dependencies(theory))
    if cycle is None:
        return []
    tcas = theory.tcas.get(cycle[0], ())
    return [error("stratification", f"SEA stratification cycle {' ≻ '.join(cycle)}",
                  tcas[0].location if tcas else None, witness=" ≻ ".join(cycle))]


# ==== PIPELINE ====

def compile_theory(theory: TemporalBAT) -> Tuple[TemporalBAT, List[Diagnostic]]:
    """
    Compile every temporal fluent.

    Returns:
        The theory with seas and init_ssas filled, and the diagnostics found
    """
    diagnostics = stratification_diagnostics(theory)
    oracle = ContextOracle(theory)
    seas: Dict[str, StateEvolutionAxiom] = {}
    init_ssas: Dict[str, InitSSA] = {}
    for fluent in theory.temporal_fluents:
        tcas = disjoin_contexts(theory.tcas.get(fluent, ()), theory, diagnostics, oracle)
        seas[fluent] = derive_sea(theory, fluent, tcas)
        axiom = derive_init_ssa(theory, fluent, theory.effects.get(fluent), diagnostics, oracle)
        init_ssas[axiom.fluent] = axiom
        logger.debug("compiled %s: %d branches, %d effect cases", fluent,
                     len(seas[fluent].branches), len(axiom.cases))
    compiled = replace(theory, seas=seas, init_ssas=init_ssas)
    logger.info("compiled %d state evolution axioms for %s", len(seas), theory.name or "theory")
    return compiled, diagnostics


def ensure_compiled(theory: TemporalBAT) -> TemporalBAT:
    """
    The theory itself when already compiled, otherwise its compilation.

    Raises:
        StratificationError: on a dependency cycle among temporal fluents
        ConsistencyError: on conflicting effect cases
    """
    if theory.is_compiled:
        return theory
    compiled, diagnostics = compile_theory(theory)
    if has_errors(diagnostics):
        first = next(d for d in diagnostics if d.is_error)
        if first.code == "stratification":
            raise StratificationError(first.message)
        raise ConsistencyError(first.message, witness=first.witness)
    return compiled
