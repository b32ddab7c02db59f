"""
Linear normal form of real-valued terms.

A LinearForm is a map from non-arithmetic atoms to rational coefficients
plus a rational constant. Products of two non-constant forms are kept as
opaque atoms, so every real term has a normal form.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple

from logic.substitution import free_vars
from logic.terms import Arith, Num, Term, Var


@dataclass(frozen=True)
class LinearForm:
    coeffs: Tuple[Tuple[Term, Fraction], ...] = ()
    const: Fraction = field(default_factory=Fraction)

    @classmethod
    def constant(cls, value) -> "LinearForm":
        return cls((), Fraction(value))

    @classmethod
    def atom(cls, term: Term) -> "LinearForm":
        return cls(((term, Fraction(1)),), Fraction(0))

    @classmethod
    def from_map(cls, coeffs: Dict[Term, Fraction], const: Fraction) -> "LinearForm":
        items = [(term, c) for term, c in coeffs.items() if c != 0]
        items.sort(key=lambda item: _atom_key(item[0]))
        return cls(tuple(items), Fraction(const))

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def as_map(self) -> Dict[Term, Fraction]:
        return dict(self.coeffs)

    def coefficient(self, term: Term) -> Fraction:
        return self.as_map().get(term, Fraction(0))

    def __add__(self, other: "LinearForm") -> "LinearForm":
        merged = self.as_map()
        for term, c in other.coeffs:
            merged[term] = merged.get(term, Fraction(0)) + c
        return LinearForm.from_map(merged, self.const + other.const)

    def scale(self, factor: Fraction) -> "LinearForm":
        if factor == 0:
            return LinearForm.constant(0)
        return LinearForm(tuple((t, c * factor) for t, c in self.coeffs), self.const * factor)

    def __neg__(self) -> "LinearForm":
        return self.scale(Fraction(-1))

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + (-other)

    def without(self, term: Term) -> "LinearForm":
        return LinearForm.from_map({t: c for t, c in self.coeffs if t != term}, self.const)


def _atom_key(term: Term) -> Tuple[int, str]:
    # variables sort before fluent terms so solved forms read naturally
    return (0 if isinstance(term, Var) else 1, str(term))


def to_linear(term: Term) -> LinearForm:
    """Normal form of a real term"""
    if isinstance(term, Num):
        return LinearForm.constant(term.value)
    if not isinstance(term, Arith):
        return LinearForm.atom(term)
    forms = [to_linear(arg) for arg in term.args]
    if term.op == "+":
        total = LinearForm.constant(0)
        for form in forms:
            total = total + form
        return total
    if term.op == "-":
        if len(forms) == 1:
            return -forms[0]
        total = forms[0]
        for form in forms[1:]:
            total = total - form
        return total
    product = forms[0]
    for form in forms[1:]:
        product = _multiply(product, form)
    return product


def _multiply(left: LinearForm, right: LinearForm) -> LinearForm:
    if left.is_constant:
        return right.scale(left.const)
    if right.is_constant:
        return left.scale(right.const)
    opaque = Arith("*", (from_linear(left), from_linear(right)))
    return LinearForm.atom(opaque)


def from_linear(form: LinearForm) -> Term:
    """Canonical term for a normal form: atoms in a fixed order, constant last"""
    result: Optional[Term] = None
    for term, c in form.coeffs:
        if result is None:
            result = _monomial(c, term)
        elif c < 0:
            result = Arith("-", (result, _monomial(-c, term)))
        else:
            result = Arith("+", (result, _monomial(c, term)))
    if result is None:
        return Num(form.const)
    if form.const > 0:
        return Arith("+", (result, Num(form.const)))
    if form.const < 0:
        return Arith("-", (result, Num(-form.const)))
    return result


def _monomial(coefficient: Fraction, term: Term) -> Term:
    if coefficient == 1:
        return term
    return Arith("*", (Num(coefficient), term))


def normalize(term: Term) -> Term:
    return from_linear(to_linear(term))


def is_linear_in(term: Term, var: Var) -> bool:
    """No product in which both factors mention var"""
    if isinstance(term, Arith):
        if term.op == "*":
            mentioning = [arg for arg in term.args if _mentions(arg, var)]
            if len(mentioning) > 1:
                return False
        return all(is_linear_in(arg, var) for arg in term.args)
    return True


def _mentions(term: Term, var: Var) -> bool:
    return var in free_vars(term)


def solve_for(form: LinearForm, var: Var) -> Optional[LinearForm]:
    """Solve form = 0 for var when var occurs linearly with nonzero coefficient"""
    c = form.coefficient(var)
    if c == 0:
        return None
    rest = form.without(var)
    if any(_mentions(t, var) for t, _ in rest.coeffs):
        return None
    return rest.scale(Fraction(-1) / c)
