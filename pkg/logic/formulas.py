"""
First-order formulas over the sorted terms.

Connective constructors (conj, disj, neg, ...) perform only flattening;
all other rewriting lives in logic.simplify.
"""

from dataclasses import dataclass
from typing import Iterable, Tuple

from exceptions import SortError
from logic.sorts import REAL, SITUATION
from logic.terms import Term, Var


class Formula:
    """Base class of all formulas"""

    __slots__ = ()

    def __str__(self):
        from logic.render import render
        return render(self)


@dataclass(frozen=True)
class Truth(Formula):
    value: bool

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = Truth(True)
FALSE = Truth(False)


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term

    def __post_init__(self):
        if self.left.sort != self.right.sort:
            raise SortError(f"cannot equate {self.left} ({self.left.sort}) with {self.right} ({self.right.sort})")


@dataclass(frozen=True)
class Lt(Formula):
    left: Term
    right: Term

    def __post_init__(self):
        _check_real(self.left, self.right)


@dataclass(frozen=True)
class Le(Formula):
    left: Term
    right: Term

    def __post_init__(self):
        _check_real(self.left, self.right)


def _check_real(*terms: Term) -> None:
    for term in terms:
        if term.sort != REAL:
            raise SortError(f"comparison on non-real term {term}")


@dataclass(frozen=True)
class RelAtom(Formula):
    """Relational fluent F(x̄, s)"""
    functor: str
    args: Tuple[Term, ...]
    sit: Term


@dataclass(frozen=True)
class StaticAtom(Formula):
    functor: str
    args: Tuple[Term, ...]


@dataclass(frozen=True)
class Poss(Formula):
    action: Term
    sit: Term


@dataclass(frozen=True)
class SitPrec(Formula):
    """Situation ordering s ⊑ s'"""
    left: Term
    right: Term

    def __post_init__(self):
        if self.left.sort != SITUATION or self.right.sort != SITUATION:
            raise SortError("situation ordering between non-situations")


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    parts: Tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: Tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: Var
    body: Formula


ATOMS = (Truth, Eq, Lt, Le, RelAtom, StaticAtom, Poss, SitPrec)
QUANTIFIERS = (Exists, Forall)


def conj(*parts: Formula) -> Formula:
    flat = []
    for part in parts:
        flat.extend(part.parts if isinstance(part, And) else (part,))
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat = []
    for part in parts:
        flat.extend(part.parts if isinstance(part, Or) else (part,))
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def neg(body: Formula) -> Formula:
    if isinstance(body, Not):
        return body.body
    if isinstance(body, Truth):
        return Truth(not body.value)
    return Not(body)


def neq(left: Term, right: Term) -> Formula:
    return Not(Eq(left, right))


def exists(variables: Iterable[Var], body: Formula) -> Formula:
    for var in reversed(tuple(variables)):
        body = Exists(var, body)
    return body


def forall(variables: Iterable[Var], body: Formula) -> Formula:
    for var in reversed(tuple(variables)):
        body = Forall(var, body)
    return body


def formula_children(phi: Formula) -> Tuple[Formula, ...]:
    if isinstance(phi, Not):
        return (phi.body,)
    if isinstance(phi, (And, Or)):
        return phi.parts
    if isinstance(phi, (Implies, Iff)):
        return (phi.left, phi.right)
    if isinstance(phi, QUANTIFIERS):
        return (phi.body,)
    return ()


def rebuild_formula(phi: Formula, children) -> Formula:
    """Rebuild a connective or quantifier from new children, in formula_children order"""
    children = tuple(children)
    if isinstance(phi, Not):
        return Not(children[0])
    if isinstance(phi, (And, Or)):
        return type(phi)(children)
    if isinstance(phi, (Implies, Iff)):
        return type(phi)(children[0], children[1])
    if isinstance(phi, QUANTIFIERS):
        return type(phi)(phi.var, children[0])
    return phi


def atom_terms(phi: Formula) -> Tuple[Term, ...]:
    """Immediate term arguments of an atom"""
    if isinstance(phi, (Eq, Lt, Le, SitPrec)):
        return (phi.left, phi.right)
    if isinstance(phi, RelAtom):
        return phi.args + (phi.sit,)
    if isinstance(phi, StaticAtom):
        return phi.args
    if isinstance(phi, Poss):
        return (phi.action, phi.sit)
    return ()


def rebuild_atom(phi: Formula, terms) -> Formula:
    terms = tuple(terms)
    if isinstance(phi, (Eq, Lt, Le, SitPrec)):
        return type(phi)(terms[0], terms[1])
    if isinstance(phi, RelAtom):
        return RelAtom(phi.functor, terms[:-1], terms[-1])
    if isinstance(phi, StaticAtom):
        return StaticAtom(phi.functor, terms)
    if isinstance(phi, Poss):
        return Poss(terms[0], terms[1])
    return phi


def iter_atoms(phi: Formula):
    """All atoms of a formula, in pre-order"""
    if isinstance(phi, ATOMS):
        yield phi
        return
    for child in formula_children(phi):
        yield from iter_atoms(child)


def split_conjuncts(phi: Formula) -> Tuple[Formula, ...]:
    return phi.parts if isinstance(phi, And) else (phi,)


def split_disjuncts(phi: Formula) -> Tuple[Formula, ...]:
    return phi.parts if isinstance(phi, Or) else (phi,)
