"""
Truth-preserving simplification under unique names for actions and exact
rational arithmetic.

Rewrites applied bottom-up until a fixpoint:
  start(do(a, s)) -> time(a), time(A(x̄, τ)) -> τ
  linear normalization and ground folding of arithmetic
  unique-names resolution of action and situation equalities
  boolean constant propagation and complementary literals
  ∃y (y = τ ∧ φ) -> φ|y:=τ, ∃ distributed over ∨

With a FactResolver, ground static atoms and functions and ground relational
fluents at S0 are replaced by their values, and object quantifiers are
expanded over the finite domains.
"""

from typing import Iterable, Optional, Protocol, Sequence

from config import Config
from logic.formulas import (
    FALSE, TRUE, And, Eq, Exists, Forall, Formula, Iff, Implies, Le, Lt, Not, Or, Poss,
    RelAtom, SitPrec, StaticAtom, Truth, conj, disj, neg, split_conjuncts,
    split_disjuncts,
)
from logic.linear import from_linear, solve_for, to_linear
from logic.sorts import REAL, SITUATION, Sort
from logic.substitution import free_vars, substitute
from logic.terms import (
    Action, Arith, Do, InitSit, Obj, Start, StaticFn, Term, TimeOf, Var, is_ground_term,
    rebuild_term, term_children,
)


class UnaContext:
    """Unique-names reading of actions: different functors or arguments, different actions"""

    def __init__(self, actions: Iterable[str] = ()):
        self.actions = frozenset(actions)


class FactResolver(Protocol):
    """Source of ground facts about rigid symbols and the initial situation"""

    def static_atom(self, functor: str, args: Sequence[Term]) -> Optional[Formula]:
        ...

    def static_fn(self, functor: str, args: Sequence[Term]) -> Optional[Term]:
        ...

    def initial_atom(self, functor: str, args: Sequence[Term]) -> Optional[bool]:
        ...

    def domain(self, sort: Sort) -> Optional[Sequence[Obj]]:
        ...

    def initial_start(self) -> Optional[Term]:
        ...


def simplify(phi, una: Optional[UnaContext] = None, resolver: Optional[FactResolver] = None):
    """Simplify a formula or term to a fixpoint"""
    simplifier = _Simplifier(una or UnaContext(), resolver)
    step = simplifier.term if isinstance(phi, Term) else simplifier.formula
    for _ in range(Config.SIMPLIFY_MAX_PASSES):
        result = step(phi)
        if result == phi:
            return result
        phi = result
    return phi


def defining_term(atom: Formula, var: Var) -> Optional[Term]:
    """τ when atom is equivalent to var = τ with var not in τ"""
    if not isinstance(atom, Eq):
        return None
    left, right = atom.left, atom.right
    if left == var and var not in free_vars(right):
        return right
    if right == var and var not in free_vars(left):
        return left
    if var.sort == REAL:
        solved = solve_for(to_linear(left) - to_linear(right), var)
        if solved is not None:
            return from_linear(solved)
    return None


def defines(phi: Formula, var: Var) -> bool:
    return any(defining_term(part, var) is not None for part in split_conjuncts(phi))


class _Simplifier:

    def __init__(self, una: UnaContext, resolver: Optional[FactResolver]):
        self.una = una
        self.resolver = resolver

    # ==== TERMS ====

    def term(self, term: Term) -> Term:
        children = term_children(term)
        if children:
            term = rebuild_term(term, (self.term(child) for child in children))
        if isinstance(term, Start) and isinstance(term.sit, Do):
            return self.term(TimeOf(term.sit.action))
        if isinstance(term, TimeOf) and isinstance(term.action, Action):
            return term.action.time
        if isinstance(term, Start) and isinstance(term.sit, InitSit) and self.resolver is not None:
            value = self.resolver.initial_start()
            if value is not None:
                return value
        if isinstance(term, StaticFn) and self.resolver is not None:
            value = self.resolver.static_fn(term.functor, term.args)
            if value is not None and value != term:
                return self.term(value)
        if isinstance(term, Arith):
            return from_linear(to_linear(term))
        return term

    # ==== ATOMS ====

    def equality(self, left: Term, right: Term) -> Formula:
        if left == right:
            return TRUE
        if left.sort == REAL:
            difference = to_linear(left) - to_linear(right)
            if difference.is_constant:
                return Truth(difference.const == 0)
            return Eq(left, right)
        if isinstance(left, Obj) and isinstance(right, Obj):
            return FALSE
        if isinstance(left, Action) and isinstance(right, Action):
            if left.functor != right.functor or len(left.args) != len(right.args):
                return FALSE
            pairs = list(zip(left.args, right.args)) + [(left.time, right.time)]
            return self.formula(conj(*(Eq(a, b) for a, b in pairs)))
        if left.sort == SITUATION:
            if isinstance(left, InitSit) and isinstance(right, Do) or \
                    isinstance(left, Do) and isinstance(right, InitSit):
                return FALSE
            if isinstance(left, Do) and isinstance(right, Do):
                return self.formula(conj(Eq(left.action, right.action), Eq(left.sit, right.sit)))
        return Eq(left, right)

    def comparison(self, phi: Formula) -> Formula:
        left, right = self.term(phi.left), self.term(phi.right)
        difference = to_linear(left) - to_linear(right)
        if difference.is_constant:
            if isinstance(phi, Lt):
                return Truth(difference.const < 0)
            return Truth(difference.const <= 0)
        if left == right:
            return Truth(isinstance(phi, Le))
        return type(phi)(left, right)

    def atom(self, phi: Formula) -> Formula:
        if isinstance(phi, Eq):
            return self.equality(self.term(phi.left), self.term(phi.right))
        if isinstance(phi, (Lt, Le)):
            return self.comparison(phi)
        if isinstance(phi, RelAtom):
            args = tuple(self.term(arg) for arg in phi.args)
            sit = self.term(phi.sit)
            if self.resolver is not None and isinstance(sit, InitSit) and all(map(is_ground_term, args)):
                value = self.resolver.initial_atom(phi.functor, args)
                if value is not None:
                    return Truth(value)
            return RelAtom(phi.functor, args, sit)
        if isinstance(phi, StaticAtom):
            args = tuple(self.term(arg) for arg in phi.args)
            if self.resolver is not None:
                value = self.resolver.static_atom(phi.functor, args)
                if value is not None:
                    return self.formula(value)
            return StaticAtom(phi.functor, args)
        if isinstance(phi, Poss):
            return Poss(self.term(phi.action), self.term(phi.sit))
        if isinstance(phi, SitPrec):
            return SitPrec(self.term(phi.left), self.term(phi.right))
        return phi

    # ==== CONNECTIVES ====

    def formula(self, phi: Formula) -> Formula:
        if isinstance(phi, Truth):
            return phi
        if isinstance(phi, Not):
            return neg(self.formula(phi.body))
        if isinstance(phi, And):
            return self.conjunction(self.formula(part) for part in phi.parts)
        if isinstance(phi, Or):
            return self.disjunction(self.formula(part) for part in phi.parts)
        if isinstance(phi, Implies):
            return self.implication(self.formula(phi.left), self.formula(phi.right))
        if isinstance(phi, Iff):
            return self.equivalence(self.formula(phi.left), self.formula(phi.right))
        if isinstance(phi, Exists):
            return self.exists(phi.var, self.formula(phi.body))
        if isinstance(phi, Forall):
            return self.forall(phi.var, self.formula(phi.body))
        return self.atom(phi)

    def conjunction(self, parts) -> Formula:
        kept = []
        for part in split_conjuncts(conj(*parts)):
            if part == FALSE:
                return FALSE
            if part == TRUE or part in kept:
                continue
            kept.append(part)
        if any(neg(part) in kept for part in kept):
            return FALSE
        return conj(*kept)

    def disjunction(self, parts) -> Formula:
        kept = []
        for part in split_disjuncts(disj(*parts)):
            if part == TRUE:
                return TRUE
            if part == FALSE or part in kept:
                continue
            kept.append(part)
        if any(neg(part) in kept for part in kept):
            return TRUE
        return disj(*kept)

    @staticmethod
    def implication(left: Formula, right: Formula) -> Formula:
        if left == FALSE or right == TRUE or left == right:
            return TRUE
        if left == TRUE:
            return right
        if right == FALSE:
            return neg(left)
        return Implies(left, right)

    @staticmethod
    def equivalence(left: Formula, right: Formula) -> Formula:
        if left == right:
            return TRUE
        for a, b in ((left, right), (right, left)):
            if a == TRUE:
                return b
            if a == FALSE:
                return neg(b)
        return Iff(left, right)

    # ==== QUANTIFIERS ====

    def exists(self, var: Var, body: Formula) -> Formula:
        if var not in free_vars(body):
            return body
        if isinstance(body, Or):
            return self.disjunction(self.exists(var, part) for part in body.parts)
        parts = split_conjuncts(body)
        for index, part in enumerate(parts):
            value = defining_term(part, var)
            if value is not None:
                rest = conj(*(parts[:index] + parts[index + 1:]))
                return self.formula(substitute(rest, var, value))
        domain = self._domain(var)
        if domain is not None:
            return self.disjunction(self.formula(substitute(body, var, c)) for c in domain)
        independent = [p for p in parts if var not in free_vars(p)]
        if independent:
            dependent = [p for p in parts if var in free_vars(p)]
            return self.conjunction(independent + [self.exists(var, conj(*dependent))])
        for index, part in enumerate(parts):
            if isinstance(part, Or):
                others = parts[:index] + parts[index + 1:]
                return self.disjunction(
                    self.exists(var, self.formula(conj(*others, d))) for d in part.parts
                )
        return Exists(var, body)

    def forall(self, var: Var, body: Formula) -> Formula:
        if var not in free_vars(body):
            return body
        domain = self._domain(var)
        if domain is not None:
            return self.conjunction(self.formula(substitute(body, var, c)) for c in domain)
        return Forall(var, body)

    def _domain(self, var: Var):
        if self.resolver is None or not var.sort.is_object:
            return None
        return self.resolver.domain(var.sort)
