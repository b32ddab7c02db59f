from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple, Union

from logic.formulas import (
    Eq, Formula, Iff, Implies, RelAtom, conj, disj, exists, forall, neg,
)
from logic.sorts import ACTION, REAL, SITUATION, Sort, object_sort
from logic.substitution import free_vars, mentions, substitute_many
from logic.terms import Action, Do, Fluent, Num, Obj, TFluent, Term, TimeOf, Var


@dataclass(frozen=True)
class SourceLocation:
    """Position in a source file"""
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}"


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """Validation or compilation finding; errors block compilation"""
    severity: Severity
    code: str
    message: str
    location: Optional[SourceLocation] = field(default=None, compare=False)
    witness: Optional[str] = None

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def to_record(self) -> dict:
        record = {"kind": "diagnostic", "severity": self.severity.value,
                  "code": self.code, "message": self.message}
        if self.location is not None:
            record["line"] = self.location.line
            record["column"] = self.location.column
        if self.witness is not None:
            record["witness"] = self.witness
        return record

    def __str__(self):
        where = f"{self.location}: " if self.location else ""
        extra = f" [witness: {self.witness}]" if self.witness else ""
        return f"{where}{self.severity.value} {self.code}: {self.message}{extra}"


def error(code: str, message: str, location=None, witness=None) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, location, witness)


def warning(code: str, message: str, location=None, witness=None) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, location, witness)


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)


# ==== DECLARATIONS ====

@dataclass(frozen=True)
class SymbolDecl:
    """Static predicate (result_sort None) or static function"""
    name: str
    arg_sorts: Tuple[Sort, ...]
    result_sort: Optional[Sort] = None
    location: Optional[SourceLocation] = field(default=None, compare=False)

    @property
    def is_predicate(self) -> bool:
        return self.result_sort is None


@dataclass(frozen=True)
class ActionDecl:
    """Action functor; the temporal argument is implicit in arg_sorts"""
    functor: str
    arg_sorts: Tuple[Sort, ...]
    natural: bool = False
    location: Optional[SourceLocation] = field(default=None, compare=False)


class FluentKind(Enum):
    RELATIONAL = "relational"
    FUNCTIONAL = "functional"
    TEMPORAL = "temporal"
    INIT = "init"


@dataclass(frozen=True)
class FluentDecl:
    name: str
    arg_sorts: Tuple[Sort, ...]
    kind: FluentKind
    result_sort: Optional[Sort] = None
    companion: Optional[str] = None  # f_init for temporal f, f for f_init
    location: Optional[SourceLocation] = field(default=None, compare=False)

    def __repr__(self):
        return f"FluentDecl({self.kind.value} {self.name}/{len(self.arg_sorts)})"


def init_name(fluent: str) -> str:
    return f"{fluent}_init"


# ==== AXIOMS ====

@dataclass(frozen=True)
class StaticClause:
    """Definition clause name(patterns) := body for a rigid symbol"""
    functor: str
    params: Tuple[Term, ...]
    body: Union[Term, Formula]
    location: Optional[SourceLocation] = field(default=None, compare=False)

    def match(self, args: Tuple[Term, ...]) -> Optional[Dict[Var, Term]]:
        if len(args) != len(self.params):
            return None
        binding: Dict[Var, Term] = {}
        for param, arg in zip(self.params, args):
            if isinstance(param, Var):
                if binding.get(param, arg) != arg:
                    return None
                binding[param] = arg
            elif param != arg:
                return None
        return binding

    def decides(self, args: Tuple[Term, ...]) -> bool:
        """False when a constant pattern faces an argument that is not yet a constant"""
        return all(isinstance(param, Var) or isinstance(arg, (Obj, Num))
                   for param, arg in zip(self.params, args))

    def instantiate(self, args: Tuple[Term, ...]):
        binding = self.match(args)
        if binding is None:
            return None
        return substitute_many(self.body, binding)


@dataclass(frozen=True)
class PossAxiom:
    """Poss(A(x̄, t), s) <-> body"""
    action: Action
    sit: Var
    body: Formula
    location: Optional[SourceLocation] = field(default=None, compare=False)

    def instantiate(self, action: Action, sit: Term) -> Formula:
        params = self.action.args + (self.action.time,)
        values = action.args + (action.time,)
        mapping = dict(zip(params, values))
        mapping[self.sit] = sit
        return substitute_many(self.body, mapping)


@dataclass(frozen=True)
class SuccessorStateAxiom:
    """
    F(x̄, do(a, s)) <-> body for relational fluents, or
    f(x̄, do(a, s)) = value <-> body for functional fluents.
    """
    fluent: str
    params: Tuple[Var, ...]
    action: Var
    sit: Var
    body: Formula
    value: Optional[Var] = None
    result_sort: Optional[Sort] = None
    location: Optional[SourceLocation] = field(default=None, compare=False)

    @property
    def is_functional(self) -> bool:
        return self.value is not None

    def instantiate(self, args: Tuple[Term, ...], action: Term, sit: Term,
                    value: Optional[Term] = None) -> Formula:
        mapping = dict(zip(self.params, args))
        mapping[self.action] = action
        mapping[self.sit] = sit
        if self.value is not None and value is not None:
            mapping[self.value] = value
        return substitute_many(self.body, mapping)

    def head(self) -> Formula:
        after = Do(self.action, self.sit)
        if self.value is None:
            return RelAtom(self.fluent, self.params, after)
        return Eq(Fluent(self.fluent, self.params, after, self.result_sort or REAL), self.value)

    def as_formula(self) -> Formula:
        closed = list(self.params) + [self.action, self.sit]
        if self.value is not None:
            closed.append(self.value)
        return forall(closed, Iff(self.head(), self.body))


@dataclass(frozen=True)
class EffectCase:
    """on pattern [when guard] -> value; pattern variables are local to the case"""
    pattern: Action
    guard: Formula
    value: Term
    location: Optional[SourceLocation] = field(default=None, compare=False)


@dataclass(frozen=True)
class EffectSpec:
    """Effect cases for the init companion of one temporal fluent"""
    fluent: str
    params: Tuple[Var, ...]
    cases: Tuple[EffectCase, ...] = ()
    location: Optional[SourceLocation] = field(default=None, compare=False)


@dataclass(frozen=True)
class TemporalChangeAxiom:
    """γ(x̄, s) ∧ δ(x̄, y, t, s) -> f(x̄, t, s) = y"""
    fluent: str
    params: Tuple[Var, ...]
    context: Formula
    law: Formula
    value_var: Var = Var("y", REAL)
    time_var: Var = Var("t", REAL)
    sit_var: Var = Var("s", SITUATION)
    location: Optional[SourceLocation] = field(default=None, compare=False)

    def head(self) -> Formula:
        return Eq(TFluent(self.fluent, self.params, self.time_var, self.sit_var), self.value_var)

    def as_formula(self) -> Formula:
        closed = list(self.params) + [self.value_var, self.time_var, self.sit_var]
        return forall(closed, Implies(conj(self.context, self.law), self.head()))


@dataclass(frozen=True)
class StateEvolutionAxiom:
    """
    f(x̄, t, s) = y <-> ⋁ᵢ (γᵢ ∧ δᵢ) ∨ (y = f_init(x̄, s) ∧ ¬⋁ᵢ γᵢ)

    Branch contexts are pairwise disjoint; the last disjunct is the frame branch.
    """
    fluent: str
    params: Tuple[Var, ...]
    branches: Tuple[Tuple[Formula, Formula], ...]
    init_fluent: str
    value_var: Var = Var("y", REAL)
    time_var: Var = Var("t", REAL)
    sit_var: Var = Var("s", SITUATION)
    location: Optional[SourceLocation] = field(default=None, compare=False)

    def init_term(self) -> Term:
        return Fluent(self.init_fluent, self.params, self.sit_var, REAL)

    def closure(self) -> Formula:
        """Ψ = ⋁ᵢ γᵢ"""
        return disj(*(context for context, _ in self.branches))

    def frame_branch(self) -> Formula:
        return conj(Eq(self.value_var, self.init_term()), neg(self.closure()))

    def branch_formulas(self) -> List[Formula]:
        """All disjuncts of the right-hand side, frame branch last"""
        return [conj(context, law) for context, law in self.branches] + [self.frame_branch()]

    def rhs(self) -> Formula:
        return disj(*self.branch_formulas())

    def instantiate(self, args: Tuple[Term, ...], time: Term, value: Term, sit: Term,
                    formula: Optional[Formula] = None) -> Formula:
        mapping = dict(zip(self.params, args))
        mapping[self.time_var] = time
        mapping[self.value_var] = value
        mapping[self.sit_var] = sit
        return substitute_many(self.rhs() if formula is None else formula, mapping)

    def head(self) -> Formula:
        return Eq(TFluent(self.fluent, self.params, self.time_var, self.sit_var), self.value_var)

    def as_formula(self) -> Formula:
        closed = list(self.params) + [self.time_var, self.value_var, self.sit_var]
        return forall(closed, Iff(self.head(), self.rhs()))

    def mentioned_temporal_fluents(self) -> set:
        found = set()

        def collect(sub):
            if isinstance(sub, TFluent):
                found.add(sub.functor)
            return False

        mentions(self.rhs(), collect)
        return found


@dataclass(frozen=True)
class InitSSA:
    """
    f_init(x̄, do(a, s)) = y <->
        ⋁ effect cases ∨ (no case applies ∧ y = f(x̄, time(a), s))
    """
    fluent: str
    temporal: str
    params: Tuple[Var, ...]
    cases: Tuple[EffectCase, ...]
    action_var: Var = Var("a", ACTION)
    sit_var: Var = Var("s", SITUATION)
    value_var: Var = Var("y", REAL)
    location: Optional[SourceLocation] = field(default=None, compare=False)

    def case_condition(self, case: EffectCase) -> Formula:
        """∃ pattern variables (a = pattern ∧ guard), without the value"""
        local = _pattern_vars(case, self.params)
        return exists(local, conj(Eq(self.action_var, case.pattern), case.guard))

    def case_formula(self, case: EffectCase) -> Formula:
        local = _pattern_vars(case, self.params)
        return exists(local, conj(Eq(self.action_var, case.pattern), case.guard,
                                  Eq(self.value_var, case.value)))

    def default_formula(self) -> Formula:
        continuity = Eq(self.value_var, TFluent(self.temporal, self.params,
                                                TimeOf(self.action_var), self.sit_var))
        applies = disj(*(self.case_condition(case) for case in self.cases))
        return conj(neg(applies), continuity) if self.cases else continuity

    def rhs(self) -> Formula:
        return disj(*[self.case_formula(case) for case in self.cases], self.default_formula())

    def as_successor_state_axiom(self) -> SuccessorStateAxiom:
        return SuccessorStateAxiom(self.fluent, self.params, self.action_var, self.sit_var,
                                   self.rhs(), self.value_var, REAL, self.location)

    def as_formula(self) -> Formula:
        return self.as_successor_state_axiom().as_formula()


def _pattern_vars(case: EffectCase, params: Tuple[Var, ...]) -> List[Var]:
    bound = set(params)
    ordered = []
    for term in case.pattern.args + (case.pattern.time,):
        for var in sorted(free_vars(term), key=lambda v: v.name):
            if var not in bound and var not in ordered:
                ordered.append(var)
    for var in sorted(free_vars(case.guard) | free_vars(case.value), key=lambda v: v.name):
        if var not in bound and var not in ordered and var.sort != SITUATION:
            ordered.append(var)
    return ordered


# ==== INITIAL THEORY ====

@dataclass(frozen=True)
class Fact:
    """Ground fact about S0 or a rigid symbol; None arguments are wildcards"""
    functor: str
    args: Tuple[Optional[Term], ...]
    value: Union[bool, Term]
    location: Optional[SourceLocation] = field(default=None, compare=False)

    @property
    def is_default(self) -> bool:
        return any(arg is None for arg in self.args)

    def covers(self, args: Tuple[Term, ...]) -> bool:
        return len(args) == len(self.args) and all(
            mine is None or mine == theirs for mine, theirs in zip(self.args, args))


@dataclass(frozen=True)
class InitialTheory:
    start: Optional[Fraction] = None
    facts: Tuple[Fact, ...] = ()
    start_location: Optional[SourceLocation] = field(default=None, compare=False)


@dataclass(frozen=True)
class StateConstraint:
    """Closed formula uniform in S0"""
    formula: Formula
    location: Optional[SourceLocation] = field(default=None, compare=False)


# ==== THEORY ====

@dataclass(frozen=True)
class TemporalBAT:
    """A temporal basic action theory; compiled SEAs and init-SSAs are filled by the compiler"""
    name: str = ""
    sorts: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    statics: Dict[str, SymbolDecl] = field(default_factory=dict)
    static_clauses: Dict[str, Tuple[StaticClause, ...]] = field(default_factory=dict)
    actions: Dict[str, ActionDecl] = field(default_factory=dict)
    fluents: Dict[str, FluentDecl] = field(default_factory=dict)
    poss: Dict[str, PossAxiom] = field(default_factory=dict)
    ssas: Dict[str, SuccessorStateAxiom] = field(default_factory=dict)
    effects: Dict[str, EffectSpec] = field(default_factory=dict)
    tcas: Dict[str, Tuple[TemporalChangeAxiom, ...]] = field(default_factory=dict)
    initial: InitialTheory = field(default_factory=InitialTheory)
    constraints: Tuple[StateConstraint, ...] = ()
    seas: Dict[str, StateEvolutionAxiom] = field(default_factory=dict)
    init_ssas: Dict[str, InitSSA] = field(default_factory=dict)

    def __repr__(self):
        return (f"TemporalBAT({self.name or 'anonymous'}, actions={len(self.actions)}, "
                f"fluents={len(self.fluents)}, tcas={sum(map(len, self.tcas.values()))})")

    # ==== LOOKUPS ====

    def constant(self, name: str) -> Optional[Obj]:
        for sort_name, constants in self.sorts.items():
            if name in constants:
                return Obj(name, object_sort(sort_name))
        return None

    def domain(self, sort: Sort) -> Tuple[Obj, ...]:
        return tuple(Obj(name, sort) for name in self.sorts.get(sort.name, ()))

    def fluents_of(self, kind: FluentKind) -> List[FluentDecl]:
        return [decl for decl in self.fluents.values() if decl.kind is kind]

    @property
    def temporal_fluents(self) -> List[str]:
        return [decl.name for decl in self.fluents_of(FluentKind.TEMPORAL)]

    @property
    def natural_actions(self) -> List[ActionDecl]:
        return [decl for decl in self.actions.values() if decl.natural]

    @property
    def is_compiled(self) -> bool:
        return set(self.seas) == set(self.temporal_fluents) and \
            set(self.init_ssas) == {init_name(f) for f in self.temporal_fluents}

    def successor_axiom(self, fluent: str) -> Optional[SuccessorStateAxiom]:
        """SSA for a relational or atemporal functional fluent, init companions included"""
        if fluent in self.ssas:
            return self.ssas[fluent]
        if fluent in self.init_ssas:
            return self.init_ssas[fluent].as_successor_state_axiom()
        return None

    def groundings(self, sorts: Tuple[Sort, ...]) -> List[Tuple[Obj, ...]]:
        """All tuples of constants for a tuple of object sorts"""
        tuples: List[Tuple[Obj, ...]] = [()]
        for sort in sorts:
            tuples = [prefix + (obj,) for prefix in tuples for obj in self.domain(sort)]
        return tuples
