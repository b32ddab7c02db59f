"""
Sort inference and symbol resolution for raw syntax.

Variables are lowercase identifiers (or names starting with '_') that are
not object constants; their sorts are inferred from argument positions.
Inference walks the raw pieces repeatedly until no new sort is learned,
then a final walk builds typed terms and formulas.

A '_' inside an atom stands for a fresh variable existentially quantified
at that atom; '!=' negates the quantified equality.
"""

from dataclasses import fields, is_dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from exceptions import ParseError
from logic.formulas import (
    Eq, Forall, Exists, Formula, Iff, Implies, Le, Lt, Not, Poss, RelAtom, SitPrec,
    StaticAtom, Truth, conj, disj, exists,
)
from logic.sorts import ACTION, REAL, SITUATION, Sort, object_sort
from logic.terms import (
    S0, Action, Arith, Do, Fluent, Num, Obj, Start, StaticFn, TFluent, Term, TimeOf, Var,
)
from models.theory import ActionDecl, FluentDecl, FluentKind, SymbolDecl, TemporalBAT
from parsing.grammar import (
    RAnd, RArith, RBool, RCall, RCmp, RIff, RImplies, RName, RNot, RNum, ROr, RQuant, RWild,
    where,
)

FORMULA = "formula"
SPECIAL_SYMBOLS = ("do", "start", "time", "S0", "Poss")


class SymbolTable:
    """Declared constants and symbols of a theory"""

    def __init__(self, sorts: Dict[str, Tuple[str, ...]], statics: Dict[str, SymbolDecl],
                 actions: Dict[str, ActionDecl], fluents: Dict[str, FluentDecl]):
        self.sorts = sorts
        self.statics = statics
        self.actions = actions
        self.fluents = fluents
        self.constants: Dict[str, Obj] = {}
        for sort_name, constants in sorts.items():
            for name in constants:
                self.constants[name] = Obj(name, object_sort(sort_name))

    @classmethod
    def of(cls, theory: TemporalBAT) -> "SymbolTable":
        return cls(theory.sorts, theory.statics, theory.actions, theory.fluents)

    def is_symbol(self, name: str) -> bool:
        return name in self.statics or name in self.actions or name in self.fluents


def _fail(message: str, node, code: str) -> ParseError:
    line, column = where(node)
    return ParseError(message, line or None, column or None, code=code)


def constant_value(raw) -> Optional[Fraction]:
    """Value of a raw arithmetic expression over numbers only"""
    if isinstance(raw, RNum):
        return raw.value
    if not isinstance(raw, RArith):
        return None
    values = [constant_value(arg) for arg in raw.args]
    if any(v is None for v in values):
        return None
    if raw.op == "neg":
        return -values[0]
    if raw.op == "+":
        return values[0] + values[1]
    if raw.op == "-":
        return values[0] - values[1]
    if raw.op == "*":
        return values[0] * values[1]
    if values[1] == 0:
        return None
    return values[0] / values[1]


def raw_names(node) -> set:
    """Every identifier written in a raw node"""
    names = set()
    if isinstance(node, RName):
        names.add(node.name)
    elif isinstance(node, RCall):
        names.add(node.name)
    elif isinstance(node, RQuant):
        names.update(node.names)
    if isinstance(node, (tuple, list)):
        for item in node:
            names |= raw_names(item)
    elif is_dataclass(node):
        for f in fields(node):
            value = getattr(node, f.name)
            if is_dataclass(value) or isinstance(value, (tuple, list)):
                names |= raw_names(value)
    return names


class Resolver:
    """
    Resolve raw pieces sharing one variable namespace.

    Args:
        table: Declared symbols
        fixed: Variables with a predetermined sort (y, t, s in change axioms)
        default_sit: Situation appended to fluents written without one
    """

    def __init__(self, table: SymbolTable, fixed: Optional[Dict[str, Sort]] = None,
                 default_sit: Optional[Term] = None):
        self.table = table
        self.fixed = dict(fixed or {})
        self.default_sit = default_sit
        self.free_sorts: Dict[str, Sort] = {}

    def resolve(self, pieces: Sequence[Tuple[object, object]]) -> List:
        """
        Resolve (raw, expected) pieces; expected is FORMULA, a Sort or None.

        Returns:
            A Formula for each formula piece, a (Term, wildcard variables) pair
            for each term piece
        """
        sorts: Dict[tuple, Sort] = {("free", name): sort for name, sort in self.fixed.items()}
        names = raw_names([raw for raw, _ in pieces]) | set(self.fixed)
        while True:
            before = dict(sorts)
            walk = _Walk(self, sorts, names, build=False)
            for raw, expected in pieces:
                walk.piece(raw, expected)
            if sorts == before:
                break
        walk = _Walk(self, sorts, names, build=True)
        results = [walk.piece(raw, expected) for raw, expected in pieces]
        self.free_sorts = {key[1]: sort for key, sort in sorts.items() if key[0] == "free"}
        return results

    def formula(self, raw) -> Formula:
        return self.resolve([(raw, FORMULA)])[0]

    def term(self, raw, expected: Optional[Sort] = None) -> Term:
        term, wild = self.resolve([(raw, expected)])[0]
        if wild:
            raise _fail("'_' is only allowed inside atoms and action patterns", raw, "syntax")
        return term


class _Walk:

    def __init__(self, resolver: Resolver, sorts: Dict[tuple, Sort], names: Iterable[str],
                 build: bool):
        self.resolver = resolver
        self.table = resolver.table
        self.sorts = sorts
        self.build = build
        self.avoid = set(names)
        self.scope: List[Tuple[str, tuple]] = []
        self.wild: List[Var] = []
        self.wild_vars: Dict[int, Var] = {}

    def piece(self, raw, expected):
        if expected == FORMULA:
            return self.formula(raw)
        self.wild = []
        term, _ = self.term(raw, expected)
        return term, list(self.wild)

    # ==== SORTS ====

    def note(self, key: tuple, sort: Optional[Sort], node, label: str) -> None:
        if sort is None:
            return
        known = self.sorts.get(key)
        if known is None:
            self.sorts[key] = sort
        elif known != sort:
            raise _fail(f"{label} is used both as {known} and as {sort}", node, "sort")

    @staticmethod
    def expect(actual: Sort, expected: Optional[Sort], node, label: str) -> None:
        if expected is not None and actual != expected:
            raise _fail(f"{label} has sort {actual} where {expected} is expected", node, "sort")

    def settled(self, key: tuple, node, label: str) -> Sort:
        sort = self.sorts.get(key)
        if sort is None:
            raise _fail(f"cannot infer the sort of {label}", node, "sort")
        return sort

    def fresh(self, base: str) -> str:
        name = base
        while name in self.avoid:
            name += "'"
        self.avoid.add(name)
        return name

    # ==== TERMS ====

    def term(self, raw, expected: Optional[Sort]) -> Tuple[Optional[Term], Optional[Sort]]:
        if isinstance(raw, RNum):
            self.expect(REAL, expected, raw, str(raw.value))
            return Num(raw.value), REAL
        if isinstance(raw, RWild):
            return self.wildcard(raw, expected)
        if isinstance(raw, RName):
            return self.name(raw, expected)
        if isinstance(raw, RArith):
            return self.arith(raw, expected)
        if isinstance(raw, RCall):
            return self.call(raw, expected)
        raise _fail("expected a term", raw, "syntax")

    def wildcard(self, raw: RWild, expected: Optional[Sort]):
        key = ("wild", id(raw))
        self.note(key, expected, raw, "_")
        if not self.build:
            return None, self.sorts.get(key)
        sort = self.settled(key, raw, "_")
        var = self.wild_vars.get(id(raw))
        if var is None:
            var = Var(self.fresh("_w"), sort)
            self.wild_vars[id(raw)] = var
        if var not in self.wild:
            self.wild.append(var)
        return var, sort

    def lookup(self, name: str) -> Optional[tuple]:
        for bound, key in reversed(self.scope):
            if bound == name:
                return key
        return None

    def name(self, raw: RName, expected: Optional[Sort]):
        name = raw.name
        if name == "S0":
            self.expect(SITUATION, expected, raw, name)
            return S0, SITUATION
        key = self.lookup(name)
        if key is None:
            if name not in self.resolver.fixed:
                constant = self.table.constants.get(name)
                if constant is not None:
                    self.expect(constant.sort, expected, raw, name)
                    return constant, constant.sort
                if self.table.is_symbol(name):
                    raise _fail(f"{name} needs an argument list", raw, "sort")
                if name[0].isupper():
                    raise _fail(f"unknown symbol {name}", raw, "unknown-symbol")
            key = ("free", name)
        self.note(key, expected, raw, name)
        if not self.build:
            return None, self.sorts.get(key)
        sort = self.settled(key, raw, name)
        return Var(name, sort), sort

    def arith(self, raw: RArith, expected: Optional[Sort]):
        self.expect(REAL, expected, raw, "arithmetic")
        if raw.op == "/":
            divisor = constant_value(raw.args[1])
            if divisor is None or divisor == 0:
                raise _fail("divisor must be a nonzero number", raw, "syntax")
            left, _ = self.term(raw.args[0], REAL)
            if not self.build:
                return None, REAL
            if isinstance(left, Num):
                return Num(left.value / divisor), REAL
            return Arith("*", (left, Num(1 / divisor))), REAL
        args = [self.term(arg, REAL)[0] for arg in raw.args]
        if not self.build:
            return None, REAL
        if raw.op == "neg":
            if isinstance(args[0], Num):
                return Num(-args[0].value), REAL
            return Arith("-", (args[0],)), REAL
        return Arith(raw.op, tuple(args)), REAL

    def arguments(self, raw: RCall, sorts: Tuple[Sort, ...], implicit: bool) -> List[Term]:
        written = len(raw.args)
        default = self.resolver.default_sit
        if implicit and default is not None and written == len(sorts) - 1:
            args = [self.term(arg, sort)[0] for arg, sort in zip(raw.args, sorts)]
            return args + [default]
        if written != len(sorts):
            raise _fail(f"{raw.name} expects {len(sorts)} arguments, got {written}", raw, "sort")
        return [self.term(arg, sort)[0] for arg, sort in zip(raw.args, sorts)]

    def call(self, raw: RCall, expected: Optional[Sort]):
        name = raw.name
        table = self.table
        if name == "do":
            args = self.arguments(raw, (ACTION, SITUATION), False)
            self.expect(SITUATION, expected, raw, name)
            return (Do(*args) if self.build else None), SITUATION
        if name == "start":
            args = self.arguments(raw, (SITUATION,), False)
            self.expect(REAL, expected, raw, name)
            return (Start(args[0]) if self.build else None), REAL
        if name == "time":
            args = self.arguments(raw, (ACTION,), False)
            self.expect(REAL, expected, raw, name)
            return (TimeOf(args[0]) if self.build else None), REAL
        if name in table.actions:
            decl = table.actions[name]
            args = self.arguments(raw, decl.arg_sorts + (REAL,), False)
            self.expect(ACTION, expected, raw, name)
            return (Action(name, tuple(args[:-1]), args[-1]) if self.build else None), ACTION
        if name in table.statics:
            decl = table.statics[name]
            if decl.is_predicate:
                raise _fail(f"predicate {name} used as a term", raw, "sort")
            args = self.arguments(raw, decl.arg_sorts, False)
            self.expect(decl.result_sort, expected, raw, name)
            built = StaticFn(name, tuple(args), decl.result_sort) if self.build else None
            return built, decl.result_sort
        if name in table.fluents:
            decl = table.fluents[name]
            if decl.kind is FluentKind.RELATIONAL:
                raise _fail(f"relational fluent {name} used as a term", raw, "sort")
            if decl.kind is FluentKind.TEMPORAL:
                args = self.arguments(raw, decl.arg_sorts + (REAL, SITUATION), True)
                self.expect(REAL, expected, raw, name)
                built = TFluent(name, tuple(args[:-2]), args[-2], args[-1]) if self.build else None
                return built, REAL
            result = decl.result_sort or REAL
            args = self.arguments(raw, decl.arg_sorts + (SITUATION,), True)
            self.expect(result, expected, raw, name)
            built = Fluent(name, tuple(args[:-1]), args[-1], result) if self.build else None
            return built, result
        if name in SPECIAL_SYMBOLS:
            raise _fail(f"{name} cannot be used as a term here", raw, "sort")
        raise _fail(f"unknown symbol {name}", raw, "unknown-symbol")

    # ==== FORMULAS ====

    def formula(self, raw) -> Optional[Formula]:
        if isinstance(raw, RBool):
            return Truth(raw.value)
        if isinstance(raw, RNot):
            body = self.formula(raw.body)
            return Not(body) if self.build else None
        if isinstance(raw, (RAnd, ROr)):
            parts = [self.formula(part) for part in raw.parts]
            if not self.build:
                return None
            return conj(*parts) if isinstance(raw, RAnd) else disj(*parts)
        if isinstance(raw, (RImplies, RIff)):
            left, right = self.formula(raw.left), self.formula(raw.right)
            if not self.build:
                return None
            return Implies(left, right) if isinstance(raw, RImplies) else Iff(left, right)
        if isinstance(raw, RQuant):
            return self.quantifier(raw)
        if isinstance(raw, RCmp):
            return self.atom(raw, self.comparison)
        if isinstance(raw, RCall):
            return self.atom(raw, self.predicate)
        raise _fail("expected a formula", raw, "syntax")

    def quantifier(self, raw: RQuant) -> Optional[Formula]:
        keys = [(name, ("bound", id(raw), name)) for name in raw.names]
        self.scope.extend(keys)
        body = self.formula(raw.body)
        del self.scope[len(self.scope) - len(keys):]
        if not self.build:
            return None
        variables = [Var(name, self.settled(key, raw, name)) for name, key in keys]
        wrap = Exists if raw.kind == "exists" else Forall
        for var in reversed(variables):
            body = wrap(var, body)
        return body

    def atom(self, raw, build_atom) -> Optional[Formula]:
        outer = self.wild
        self.wild = []
        atom, negated = build_atom(raw)
        wild, self.wild = self.wild, outer
        if not self.build:
            return None
        atom = exists(wild, atom)
        return Not(atom) if negated else atom

    def comparison(self, raw: RCmp):
        op = raw.op
        if op in ("=", "!="):
            left, left_sort = self.term(raw.left, None)
            right, right_sort = self.term(raw.right, left_sort)
            if left_sort is None and right_sort is not None:
                left, left_sort = self.term(raw.left, right_sort)
            return (Eq(left, right) if self.build else None), op == "!="
        if op == "<<=":
            left, _ = self.term(raw.left, SITUATION)
            right, _ = self.term(raw.right, SITUATION)
            return (SitPrec(left, right) if self.build else None), False
        left, _ = self.term(raw.left, REAL)
        right, _ = self.term(raw.right, REAL)
        if not self.build:
            return None, False
        if op == "<":
            return Lt(left, right), False
        if op == "<=":
            return Le(left, right), False
        if op == ">":
            return Lt(right, left), False
        return Le(right, left), False

    def predicate(self, raw: RCall):
        name = raw.name
        table = self.table
        if name == "Poss":
            args = self.arguments(raw, (ACTION, SITUATION), True)
            return (Poss(*args) if self.build else None), False
        if name in table.fluents and table.fluents[name].kind is FluentKind.RELATIONAL:
            decl = table.fluents[name]
            args = self.arguments(raw, decl.arg_sorts + (SITUATION,), True)
            return (RelAtom(name, tuple(args[:-1]), args[-1]) if self.build else None), False
        if name in table.statics and table.statics[name].is_predicate:
            args = self.arguments(raw, table.statics[name].arg_sorts, False)
            return (StaticAtom(name, tuple(args)) if self.build else None), False
        if table.is_symbol(name) or name in SPECIAL_SYMBOLS:
            raise _fail(f"{name} is a function; compare it with a value", raw, "sort")
        raise _fail(f"unknown symbol {name}", raw, "unknown-symbol")
