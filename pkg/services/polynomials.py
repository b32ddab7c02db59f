"""
Bridge from terms and formulas to sympy.

Used for three things: satisfiability of quantifier-free formulas in linear
real arithmetic, solving laws for their value variable, and exact sign
analysis of univariate polynomials on intervals.
"""

import logging
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import sympy
from sympy.assumptions.ask import Q
from sympy.assumptions.assume import AppliedPredicate
from sympy.logic.algorithms.lra_theory import UnhandledInput
from sympy.logic.inference import satisfiable

from exceptions import NonlinearError, UnsupportedFragmentError
from logic.formulas import (
    And, Eq, Exists, Forall, Formula, Iff, Implies, Le, Lt, Not, Or, Truth,
)
from logic.render import render
from logic.sorts import REAL, Sort
from logic.terms import Arith, Num, Obj, Term, Var
from utils.cache import format_rational

logger = logging.getLogger(__name__)

Domains = Callable[[Sort], Sequence[Obj]]

# ==== CONVERSION ====


def rational(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def to_fraction(value) -> Fraction:
    """Exact Fraction of a rational sympy number"""
    value = sympy.sympify(value)
    if not value.is_Rational:
        raise UnsupportedFragmentError(f"{value} is not rational")
    return Fraction(int(value.p), int(value.q))


class SympyBridge:
    """
    Converts terms and formulas to sympy, keeping non-arithmetic terms as
    opaque real symbols and non-arithmetic atoms as boolean symbols.

    Args:
        domains: Finite domains of object sorts; lets equalities between an
            object-valued term and constants be read functionally
    """

    def __init__(self, domains: Optional[Domains] = None):
        self.domains = domains
        self.atoms: Dict[Term, sympy.Symbol] = {}
        self.booleans: Dict[str, sympy.Symbol] = {}
        self.object_terms: Dict[Term, Dict[Obj, sympy.Symbol]] = {}

    def symbol(self, term: Term) -> sympy.Symbol:
        if term not in self.atoms:
            name = term.name if isinstance(term, Var) else render(term)
            self.atoms[term] = sympy.Symbol(name, real=True)
        return self.atoms[term]

    def term_of(self, symbol: sympy.Symbol) -> Optional[Term]:
        for term, known in self.atoms.items():
            if known == symbol:
                return term
        return None

    def expr(self, term: Term) -> sympy.Expr:
        if isinstance(term, Num):
            return rational(term.value)
        if isinstance(term, Arith):
            args = [self.expr(arg) for arg in term.args]
            if term.op == "-" and len(args) == 1:
                return -args[0]
            if term.op == "+":
                return sympy.Add(*args)
            if term.op == "-":
                return args[0] - sympy.Add(*args[1:])
            return sympy.Mul(*args)
        if term.sort != REAL:
            raise UnsupportedFragmentError(f"{render(term)} is not a real term")
        return self.symbol(term)

    def _boolean(self, key: str) -> sympy.Symbol:
        if key not in self.booleans:
            self.booleans[key] = sympy.Symbol(key)
        return self.booleans[key]

    def _object_equality(self, left: Term, right: Term):
        if isinstance(left, Obj) and isinstance(right, Obj):
            return sympy.true if left == right else sympy.false
        if isinstance(left, Obj):
            left, right = right, left
        if isinstance(right, Obj) and self.domains is not None:
            table = self.object_terms.setdefault(left, {})
            if right not in table:
                table[right] = self._boolean(f"{render(left)} = {right.name}")
            return table[right]
        return self._boolean(f"{render(left)} = {render(right)}")

    def formula(self, phi: Formula, positive: bool = True):
        """Negation normal form over the LRA predicates sympy's solver accepts"""
        if isinstance(phi, Truth):
            return sympy.true if phi.value == positive else sympy.false
        if isinstance(phi, Not):
            return self.formula(phi.body, not positive)
        if isinstance(phi, And):
            parts = [self.formula(part, positive) for part in phi.parts]
            return sympy.And(*parts) if positive else sympy.Or(*parts)
        if isinstance(phi, Or):
            parts = [self.formula(part, positive) for part in phi.parts]
            return sympy.Or(*parts) if positive else sympy.And(*parts)
        if isinstance(phi, Implies):
            return self.formula(Or((Not(phi.left), phi.right)), positive)
        if isinstance(phi, Iff):
            both = And((phi.left, phi.right))
            neither = And((Not(phi.left), Not(phi.right)))
            return self.formula(Or((both, neither)), positive)
        if isinstance(phi, (Exists, Forall)):
            raise UnsupportedFragmentError(f"quantifier over {phi.var.name} in {render(phi)}")
        if isinstance(phi, (Eq, Lt, Le)) and phi.left.sort == REAL:
            return self.comparison(phi, positive)
        if isinstance(phi, Eq):
            atom = self._object_equality(phi.left, phi.right)
        else:
            atom = self._boolean(render(phi))
        return atom if positive else sympy.Not(atom)

    def comparison(self, phi: Formula, positive: bool):
        left, right = self.expr(phi.left), self.expr(phi.right)
        difference = sympy.expand(left - right)
        if difference.is_number:
            if isinstance(phi, Eq):
                holds = difference == 0
            elif isinstance(phi, Lt):
                holds = difference < 0
            else:
                holds = difference <= 0
            return sympy.true if bool(holds) == positive else sympy.false
        if isinstance(phi, Eq):
            return Q.eq(left, right) if positive else sympy.Or(Q.lt(left, right), Q.gt(left, right))
        if isinstance(phi, Lt):
            return Q.lt(left, right) if positive else Q.ge(left, right)
        return Q.le(left, right) if positive else Q.gt(left, right)

    def functional_axioms(self) -> List:
        """Each object-valued term equals exactly one constant of its sort"""
        axioms = []
        for term, table in self.object_terms.items():
            domain = list(self.domains(term.sort))
            symbols = [self._object_equality(term, obj) for obj in domain]
            axioms.append(sympy.Or(*symbols))
            for i, first in enumerate(symbols):
                for second in symbols[i + 1:]:
                    axioms.append(sympy.Or(sympy.Not(first), sympy.Not(second)))
        return axioms


def _arithmetic_atoms(encoded) -> Dict:
    """Each LRA predicate of an encoded formula mapped to a fresh proposition"""
    predicates = sorted(encoded.atoms(AppliedPredicate), key=str)
    return {predicate: sympy.Symbol(f"_lra{index}") for index, predicate in enumerate(predicates)}


def _lra_consistent(predicates: List, phi: Formula) -> bool:
    if not predicates:
        return True
    try:
        result = satisfiable(sympy.And(*predicates), use_lra_theory=True)
    except UnhandledInput as exc:
        raise NonlinearError(f"{render(phi)} is outside linear real arithmetic: {exc}") from exc
    return result is not False


def lra_satisfiable(phi: Formula, domains: Optional[Domains] = None) -> bool:
    """
    Satisfiability of a quantifier-free formula over linear real arithmetic.

    Fluent and static terms are read as unknown reals, relational atoms as
    unknown truth values. Free real variables are existential.

    The boolean skeleton, with every comparison abstracted to a proposition,
    is enumerated model by model; a model is kept when the comparisons it
    makes true are jointly satisfiable. Comparisons occur only positively in
    the encoding, so the ones a model makes false can be ignored.

    Raises:
        UnsupportedFragmentError: on quantifiers
        NonlinearError: on products of unknowns
    """
    bridge = SympyBridge(domains)
    encoded = sympy.And(bridge.formula(phi), *bridge.functional_axioms())
    if encoded is sympy.true or encoded is sympy.false:
        return encoded is sympy.true
    abstraction = _arithmetic_atoms(encoded)
    skeleton = encoded.xreplace(abstraction)
    concrete = {proposition: predicate for predicate, proposition in abstraction.items()}
    found = False
    for model in satisfiable(skeleton, all_models=True):
        if model is False:
            break
        chosen = [concrete[symbol] for symbol, value in model.items() if value and symbol in concrete]
        if _lra_consistent(chosen, phi):
            found = True
            break
    logger.debug("lra satisfiable %s -> %s", render(phi), found)
    return found


# ==== UNIVARIATE POLYNOMIALS ====

RELATIONS = ("ge", "gt", "eq", "ne")


def comparison_polynomial(phi: Formula, bridge: SympyBridge) -> Tuple[sympy.Expr, str]:
    """(p, relation) with phi equivalent to p relation 0"""
    positive = True
    while isinstance(phi, Not):
        positive, phi = not positive, phi.body
    if not isinstance(phi, (Eq, Lt, Le)) or phi.left.sort != REAL:
        raise UnsupportedFragmentError(f"{render(phi)} is not a polynomial comparison")
    left, right = bridge.expr(phi.left), bridge.expr(phi.right)
    if isinstance(phi, Eq):
        return sympy.expand(left - right), "eq" if positive else "ne"
    strict = isinstance(phi, Lt)
    if positive:
        return sympy.expand(right - left), "gt" if strict else "ge"
    return sympy.expand(left - right), "ge" if strict else "gt"


def _sign(value) -> int:
    sign = sympy.sign(value)
    if sign not in (-1, 0, 1):
        raise UnsupportedFragmentError(f"cannot decide the sign of {value}")
    return int(sign)


def _satisfies(value, relation: str) -> bool:
    sign = _sign(value)
    return {"ge": sign >= 0, "gt": sign > 0, "eq": sign == 0, "ne": sign != 0}[relation]


def real_roots_between(poly: sympy.Poly, lo, hi) -> List:
    """Distinct exact real roots of poly in [lo, hi]; hi None is unbounded"""
    found = []
    for root in set(poly.real_roots()):
        if _sign(root - lo) < 0 or hi is not None and _sign(root - hi) > 0:
            continue
        found.append(root)
    return sorted(found, key=lambda root: root.evalf(50))


def first_violation(expr: sympy.Expr, symbol: sympy.Symbol, relation: str,
                    lo: Fraction, hi: Optional[Fraction]):
    """
    Earliest instant of [lo, hi] at which expr relation 0 fails.

    The instant returned is exact (rational or algebraic). When the failure
    begins right after a root, that root is returned.

    Args:
        expr: Polynomial in symbol with rational coefficients
        symbol: The time symbol
        relation: One of ge, gt, eq, ne
        lo: Interval start
        hi: Interval end; None for [lo, oo)

    Returns:
        The violation instant, or None when the relation holds throughout
    """
    lo_value = rational(lo)
    hi_value = rational(hi) if hi is not None else None
    free = expr.free_symbols - {symbol}
    if free:
        raise UnsupportedFragmentError(f"{expr} has unknowns besides {symbol}")
    poly = sympy.Poly(expr, symbol)
    if poly.is_zero:
        return None if relation in ("ge", "eq") else lo_value
    roots = real_roots_between(poly, lo_value, hi_value)
    points = [lo_value] + [root for root in roots if _sign(root - lo_value) > 0]
    if hi_value is not None and (not points or _sign(points[-1] - hi_value) < 0):
        points.append(hi_value)
    for index, point in enumerate(points):
        if not _satisfies(poly.eval(point), relation):
            return point
        if index + 1 < len(points):
            probe = (point + points[index + 1]) / 2
        elif hi_value is None:
            probe = point + 1
        else:
            continue
        if not _satisfies(poly.eval(probe), relation):
            return point
    return None


def holds_throughout(expr: sympy.Expr, symbol: sympy.Symbol, relation: str,
                     lo: Fraction, hi: Optional[Fraction]) -> bool:
    return first_violation(expr, symbol, relation, lo, hi) is None


def earliest(instants) -> Optional[sympy.Expr]:
    """Smallest of a collection of exact real instants; None entries are skipped"""
    best = None
    for instant in instants:
        if instant is not None and (best is None or _sign(instant - best) < 0):
            best = instant
    return best


def format_instant(value) -> str:
    """p/q for rational instants, sympy's exact notation for algebraic ones"""
    value = sympy.sympify(value)
    if value.is_Rational:
        return format_rational(to_fraction(value))
    return str(value)
