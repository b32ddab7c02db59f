"""
Theory reader: builds a TemporalBAT from .tbat source text.

Only well-formedness is checked here (syntax, symbols, arities, sorts,
duplicates); the definitional conditions of a temporal theory are checked
by services.theory_validator.
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from exceptions import ParseError
from logic.formulas import TRUE, Eq, Exists, Formula, Iff, Not, RelAtom, StaticAtom
from logic.simplify import simplify
from logic.sorts import ACTION, REAL, SITUATION, Sort, sort_named
from logic.substitution import free_vars, substitute_many
from logic.terms import (
    Action, Do, Fluent, InitSit, Num, Obj, Start, StaticFn, TFluent, Term, Var,
)
from models.theory import (
    ActionDecl, EffectCase, EffectSpec, Fact, FluentDecl, FluentKind, InitialTheory,
    PossAxiom, SourceLocation, StateConstraint, StaticClause, SuccessorStateAxiom, SymbolDecl,
    TemporalBAT, TemporalChangeAxiom, init_name,
)
from parsing.grammar import (
    RAnd, RBool, RCall, RClause, RCmp, REffect, RIff, RImplies, RName, RNot, ROr, RPoss, RQuant,
    RSignature, RSortDecl, RTca, RTheory, read_theory, where,
)
from parsing.resolver import FORMULA, Resolver, SymbolTable

logger = logging.getLogger(__name__)

SECTION_ORDER = ("sorts", "statics", "actions", "fluents", "poss", "ssa", "init-ssa", "tca",
                 "init", "constraints")

VALUE_VAR = Var("y", REAL)
TIME_VAR = Var("t", REAL)
SIT_VAR = Var("s", SITUATION)
ACTION_VAR = Var("a", ACTION)


def _location(node) -> Optional[SourceLocation]:
    line, column = where(node)
    return SourceLocation(line, column) if line else None


def _error(message: str, node, code: str = "syntax") -> ParseError:
    line, column = where(node)
    return ParseError(message, line or None, column or None, code=code)


def parse_theory(text: str) -> TemporalBAT:
    """
    Parse a theory file.

    Args:
        text: .tbat source

    Returns:
        TemporalBAT with every formula sort-checked

    Raises:
        ParseError: on syntax errors, unknown symbols, arity or sort
            mismatches and duplicate definitions
    """
    raw = read_theory(text)
    theory = TheoryBuilder(raw).build()
    logger.info("parsed theory %r", theory)
    return theory


class TheoryBuilder:
    """Turns raw sections into a TemporalBAT, declarations first"""

    def __init__(self, raw: RTheory):
        self.raw = raw
        self.items: Dict[str, list] = {name: [] for name in SECTION_ORDER}
        for section in raw.sections:
            self.items[section.name].extend(section.items)
        self.sorts: Dict[str, Tuple[str, ...]] = {}
        self.statics: Dict[str, SymbolDecl] = {}
        self.actions: Dict[str, ActionDecl] = {}
        self.fluents: Dict[str, FluentDecl] = {}
        self.table: Optional[SymbolTable] = None

    def build(self) -> TemporalBAT:
        # Step 1: declarations
        self.declare_sorts()
        for item in self.items["statics"]:
            if isinstance(item, RSignature):
                self.declare_static(item)
        for item in self.items["actions"]:
            self.declare_action(item)
        for item in self.items["fluents"]:
            self.declare_fluent(item)
        self.table = SymbolTable(self.sorts, self.statics, self.actions, self.fluents)

        # Step 2: axioms
        clauses: Dict[str, List[StaticClause]] = {}
        for item in self.items["statics"]:
            if isinstance(item, RClause):
                clause = self.static_clause(item)
                clauses.setdefault(clause.functor, []).append(clause)
        poss: Dict[str, PossAxiom] = {}
        for item in self.items["poss"]:
            axiom = self.poss_axiom(item)
            if axiom.action.functor in poss:
                raise _error(f"duplicate precondition axiom for {axiom.action.functor}", item,
                             "duplicate")
            poss[axiom.action.functor] = axiom
        ssas: Dict[str, SuccessorStateAxiom] = {}
        for item in self.items["ssa"]:
            axiom = self.successor_state_axiom(item)
            if axiom.fluent in ssas:
                raise _error(f"duplicate successor state axiom for {axiom.fluent}", item,
                             "duplicate")
            ssas[axiom.fluent] = axiom
        effects: Dict[str, EffectSpec] = {}
        for item in self.items["init-ssa"]:
            self.effect_case(item, effects)
        tcas: Dict[str, List[TemporalChangeAxiom]] = {}
        for item in self.items["tca"]:
            tca = self.change_axiom(item)
            tcas.setdefault(tca.fluent, []).append(tca)

        # Step 3: initial theory and constraints
        initial = self.initial_theory(self.items["init"])
        constraints = tuple(self.constraint(item) for item in self.items["constraints"])

        return TemporalBAT(
            name=self.raw.name,
            sorts=self.sorts,
            statics=self.statics,
            static_clauses={name: tuple(items) for name, items in clauses.items()},
            actions=self.actions,
            fluents=self.fluents,
            poss=poss,
            ssas=ssas,
            effects=effects,
            tcas={name: tuple(items) for name, items in tcas.items()},
            initial=initial,
            constraints=constraints,
        )

    # ==== DECLARATIONS ====

    def declare_sorts(self) -> None:
        owner: Dict[str, str] = {}
        for item in self.items["sorts"]:
            assert isinstance(item, RSortDecl)
            if item.name in self.sorts or item.name in ("Action", "Situation", "Real", "Time"):
                raise _error(f"duplicate sort {item.name}", item, "duplicate")
            for constant in item.constants:
                if constant in owner:
                    raise _error(f"constant {constant} declared in {owner[constant]} and {item.name}",
                                 item, "duplicate")
                owner[constant] = item.name
            self.sorts[item.name] = tuple(item.constants)

    def sort(self, name: str, node) -> Sort:
        sort = sort_named(name)
        if sort.is_object and name not in self.sorts:
            raise _error(f"unknown sort {name}", node, "unknown-symbol")
        return sort

    def claim(self, name: str, node) -> None:
        if name in self.statics or name in self.actions or name in self.fluents:
            raise _error(f"duplicate declaration of {name}", node, "duplicate")
        if any(name in constants for constants in self.sorts.values()):
            raise _error(f"{name} is already an object constant", node, "duplicate")
        if name in ("do", "start", "time", "S0", "Poss"):
            raise _error(f"{name} is a reserved symbol", node, "duplicate")

    def declare_static(self, item: RSignature) -> None:
        self.claim(item.name, item)
        result = self.sort(item.result, item) if item.result else None
        self.statics[item.name] = SymbolDecl(
            item.name, tuple(self.sort(s, item) for s in item.arg_sorts), result, _location(item))

    def declare_action(self, item: RSignature) -> None:
        self.claim(item.name, item)
        if item.result:
            raise _error(f"action {item.name} cannot have a result sort", item)
        self.actions[item.name] = ActionDecl(
            item.name, tuple(self.sort(s, item) for s in item.arg_sorts),
            item.modifier == "natural", _location(item))

    def declare_fluent(self, item: RSignature) -> None:
        self.claim(item.name, item)
        args = tuple(self.sort(s, item) for s in item.arg_sorts)
        location = _location(item)
        if item.modifier == "temporal":
            if item.result and self.sort(item.result, item) != REAL:
                raise _error(f"temporal fluent {item.name} must be Real-valued", item, "sort")
            companion = init_name(item.name)
            self.claim(companion, item)
            self.fluents[item.name] = FluentDecl(item.name, args, FluentKind.TEMPORAL, REAL,
                                                 companion, location)
            self.fluents[companion] = FluentDecl(companion, args, FluentKind.INIT, REAL,
                                                 item.name, location)
        elif item.result:
            self.fluents[item.name] = FluentDecl(item.name, args, FluentKind.FUNCTIONAL,
                                                 self.sort(item.result, item), None, location)
        else:
            self.fluents[item.name] = FluentDecl(item.name, args, FluentKind.RELATIONAL,
                                                 None, None, location)

    # ==== AXIOMS ====

    def parameters(self, head: RCall, sorts: Tuple[Sort, ...], reserved=()) -> Dict[str, Sort]:
        """Distinct variable names of an axiom head with their declared sorts"""
        if len(head.args) != len(sorts):
            raise _error(f"{head.name} expects {len(sorts)} arguments, got {len(head.args)}",
                         head, "sort")
        params: Dict[str, Sort] = {}
        for arg, sort in zip(head.args, sorts):
            if not isinstance(arg, RName) or arg.name in params or arg.name in reserved \
                    or arg.name in self.table.constants or arg.name[0].isupper():
                raise _error(f"parameters of {head.name} must be distinct variables", arg)
            params[arg.name] = sort
        return params

    def check_closed(self, formula, allowed, node, what: str) -> None:
        stray = sorted(v.name for v in free_vars(formula) if v not in allowed)
        if stray:
            raise _error(f"free variable {', '.join(stray)} in {what}", node, "unknown-symbol")

    def static_clause(self, item: RClause) -> StaticClause:
        head = item.head
        decl = self.statics.get(head.name)
        if decl is None:
            raise _error(f"clause for undeclared static {head.name}", item, "unknown-symbol")
        if len(head.args) != len(decl.arg_sorts):
            raise _error(f"{head.name} expects {len(decl.arg_sorts)} arguments", head, "sort")
        resolver = Resolver(self.table)
        pieces = [(arg, sort) for arg, sort in zip(head.args, decl.arg_sorts)]
        pieces.append((item.body, FORMULA if decl.is_predicate else decl.result_sort))
        if decl.is_predicate and not (_is_formula(item.body) or isinstance(item.body, RCall)) \
                or not decl.is_predicate and _is_formula(item.body):
            raise _error(f"body of {head.name} has the wrong kind", item, "sort")
        results = resolver.resolve(pieces)
        params = [term for term, _ in results[:-1]]
        body = results[-1]
        if not decl.is_predicate:
            body, wild = body
            if wild:
                raise _error("'_' is not allowed in a clause body", item)
        bound = set()
        for param in params:
            bound |= free_vars(param)
        self.check_closed(body, bound, item, f"clause for {head.name}")
        return StaticClause(head.name, tuple(params), body, _location(item))

    def poss_axiom(self, item: RPoss) -> PossAxiom:
        head = item.head
        decl = self.actions.get(head.name)
        if decl is None:
            raise _error(f"precondition for undeclared action {head.name}", item, "unknown-symbol")
        params = self.parameters(head, decl.arg_sorts + (REAL,), reserved=("s",))
        fixed = dict(params, s=SITUATION)
        body = Resolver(self.table, fixed).formula(item.body)
        variables = [Var(name, sort) for name, sort in params.items()]
        self.check_closed(body, set(variables) | {SIT_VAR}, item, f"precondition of {head.name}")
        action = Action(head.name, tuple(variables[:-1]), variables[-1])
        return PossAxiom(action, SIT_VAR, body, _location(item))

    def successor_state_axiom(self, item) -> SuccessorStateAxiom:
        formula = Resolver(self.table).formula(item.formula)
        if not isinstance(formula, Iff):
            raise _error("successor state axiom must have the form head <-> body", item)
        head, body = formula.left, formula.right
        value = None
        if isinstance(head, Eq) and isinstance(head.left, Fluent):
            value, head = head.right, head.left
            if not isinstance(value, Var):
                raise _error("functional successor state axiom must equate the fluent with a variable",
                             item)
            decl = self.fluents.get(head.functor)
            if decl.kind is FluentKind.INIT:
                raise _error(f"{head.functor} is defined by the init-ssa section", item, "duplicate")
        elif not isinstance(head, RelAtom):
            raise _error("successor state axiom head must be a fluent at do(a, s)", item)
        sit = head.sit
        if not (isinstance(sit, Do) and isinstance(sit.action, Var) and isinstance(sit.sit, Var)):
            raise _error("successor state axiom head must end in do(a, s)", item)
        params = head.args
        if not all(isinstance(p, Var) for p in params) or len(set(params)) != len(params):
            raise _error(f"parameters of {head.functor} must be distinct variables", item)
        allowed = set(params) | {sit.action, sit.sit} | ({value} if value is not None else set())
        if len(allowed) != len(params) + 2 + (value is not None):
            raise _error("head variables must be distinct", item)
        self.check_closed(body, allowed, item, f"successor state axiom of {head.functor}")
        result_sort = head.result_sort if value is not None else None
        return SuccessorStateAxiom(head.functor, tuple(params), sit.action, sit.sit, body,
                                   value, result_sort, _location(item))

    def effect_case(self, item: REffect, effects: Dict[str, EffectSpec]) -> None:
        head = item.head
        decl = self.fluents.get(head.name)
        if decl is None or decl.kind is not FluentKind.TEMPORAL:
            raise _error(f"init-ssa entries need a temporal fluent, got {head.name}", item,
                         "unknown-symbol" if decl is None else "sort")
        params = self.parameters(head, decl.arg_sorts, reserved=("s", "a", "y"))
        fixed = dict(params, s=SITUATION)
        pieces = [(item.pattern, ACTION), (item.value, REAL)]
        if item.guard is not None:
            pieces.append((item.guard, FORMULA))
        results = Resolver(self.table, fixed).resolve(pieces)
        pattern, _ = results[0]
        value, wild = results[1]
        if wild:
            raise _error("'_' is not allowed in an effect value", item)
        guard = results[2] if item.guard is not None else TRUE
        if not isinstance(pattern, Action):
            raise _error("effect pattern must be an action term", item, "sort")
        variables = tuple(Var(name, sort) for name, sort in params.items())
        allowed = free_vars(pattern) | set(variables) | {SIT_VAR}
        self.check_closed(guard, allowed, item, f"effect on {head.name}")
        self.check_closed(value, allowed, item, f"effect on {head.name}")
        case = EffectCase(pattern, guard, value, _location(item))
        spec = effects.get(head.name)
        if spec is None:
            effects[head.name] = EffectSpec(head.name, variables, (case,), _location(item))
            return
        if spec.params != variables:
            case = _rename_case(case, dict(zip(variables, spec.params)))
        effects[head.name] = EffectSpec(spec.fluent, spec.params, spec.cases + (case,),
                                        spec.location)

    def change_axiom(self, item: RTca) -> TemporalChangeAxiom:
        head = item.head
        decl = self.fluents.get(head.name)
        if decl is None or decl.kind is not FluentKind.TEMPORAL:
            raise _error(f"change axioms need a temporal fluent, got {head.name}", item,
                         "unknown-symbol" if decl is None else "sort")
        params = self.parameters(head, decl.arg_sorts, reserved=("y", "t", "s"))
        fixed = dict(params, y=REAL, t=REAL, s=SITUATION)
        context, law = Resolver(self.table, fixed).resolve([(item.context, FORMULA),
                                                            (item.law, FORMULA)])
        variables = tuple(Var(name, sort) for name, sort in params.items())
        allowed = set(variables) | {VALUE_VAR, TIME_VAR, SIT_VAR}
        self.check_closed(context, allowed, item, f"context of {head.name}")
        if {VALUE_VAR, TIME_VAR} & free_vars(context):
            raise _error(f"context must be time-independent in change axiom of {head.name}",
                         item, "context-time")
        self.check_closed(law, allowed, item, f"law of {head.name}")
        return TemporalChangeAxiom(head.name, variables, context, law, VALUE_VAR, TIME_VAR,
                                   SIT_VAR, _location(item))

    # ==== INITIAL THEORY ====

    def initial_theory(self, items) -> InitialTheory:
        start: Optional[Fraction] = None
        start_location = None
        facts: List[Fact] = []
        for item in items:
            formula = Resolver(self.table).formula(item.formula)
            if isinstance(formula, Eq) and isinstance(formula.left, Start):
                if not isinstance(formula.left.sit, InitSit):
                    raise _error("only start(S0) can be given initially", item)
                if start is not None:
                    raise _error("start(S0) given twice", item, "duplicate")
                start = _number(formula.right, item)
                start_location = _location(item)
                continue
            facts.append(self.fact(formula, item))
        return InitialTheory(start, tuple(facts), start_location)

    def fact(self, formula: Formula, item) -> Fact:
        positive = True
        if isinstance(formula, Not):
            positive, formula = False, formula.body
        wildcards = set()
        while isinstance(formula, Exists):
            wildcards.add(formula.var)
            formula = formula.body
        location = _location(item)
        if isinstance(formula, (RelAtom, StaticAtom)):
            if isinstance(formula, RelAtom) and not isinstance(formula.sit, InitSit):
                raise _error("initial facts must be about S0", item)
            return Fact(formula.functor, self.fact_args(formula.args, wildcards, item), positive,
                        location)
        if isinstance(formula, Eq) and positive and isinstance(formula.left, (Fluent, StaticFn)):
            target = formula.left
            if isinstance(target, Fluent) and not isinstance(target.sit, InitSit):
                raise _error("initial facts must be about S0", item)
            if free_vars(formula.right):
                raise _error("initial values must be ground", item)
            value = simplify(formula.right)
            if not isinstance(value, (Num, Obj)):
                raise _error("initial value must be a number or an object constant", item)
            return Fact(target.functor, self.fact_args(target.args, wildcards, item), value,
                        location)
        if isinstance(formula, Eq) and isinstance(formula.left, TFluent):
            raise _error(f"give the initial value of {formula.left.functor} through "
                         f"{init_name(formula.left.functor)}", item)
        raise _error("initial formulas must be ground facts; use constraints for the rest", item)

    @staticmethod
    def fact_args(args: Tuple[Term, ...], wildcards, item) -> Tuple[Optional[Term], ...]:
        result = []
        for arg in args:
            if arg in wildcards:
                result.append(None)
            elif free_vars(arg):
                raise _error("initial facts must be ground", item)
            else:
                result.append(simplify(arg))
        return tuple(result)

    def constraint(self, item) -> StateConstraint:
        formula = Resolver(self.table).formula(item.formula)
        if free_vars(formula):
            names = ", ".join(sorted(v.name for v in free_vars(formula)))
            raise _error(f"free variable {names} in state constraint", item, "unknown-symbol")
        return StateConstraint(formula, _location(item))


def _number(term: Term, node) -> Fraction:
    value = simplify(term)
    if not isinstance(value, Num):
        raise _error("expected a number", node)
    return value.value


def _is_formula(raw) -> bool:
    return isinstance(raw, (RAnd, RBool, RCmp, RIff, RImplies, RNot, ROr, RQuant))


def _rename_case(case: EffectCase, mapping: Dict[Var, Var]) -> EffectCase:
    return EffectCase(substitute_many(case.pattern, mapping), substitute_many(case.guard, mapping),
                      substitute_many(case.value, mapping), case.location)
