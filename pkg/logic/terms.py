"""
Sorted terms of the temporal situation calculus.

All terms are frozen dataclasses: structural equality, hashable, shareable.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple, Union

from exceptions import SortError
from logic.sorts import ACTION, REAL, SITUATION, Sort


class Term:
    """Base class of all terms"""

    __slots__ = ()

    @property
    def sort(self) -> Sort:
        raise NotImplementedError

    def __str__(self):
        from logic.render import render
        return render(self)


@dataclass(frozen=True)
class Var(Term):
    name: str
    var_sort: Sort

    @property
    def sort(self) -> Sort:
        return self.var_sort

    def __repr__(self):
        return f"Var({self.name}:{self.var_sort})"


@dataclass(frozen=True)
class Obj(Term):
    """Object constant of a declared finite sort"""
    name: str
    obj_sort: Sort

    @property
    def sort(self) -> Sort:
        return self.obj_sort

    def __repr__(self):
        return f"Obj({self.name})"


@dataclass(frozen=True)
class Num(Term):
    """Exact rational constant"""
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))

    @property
    def sort(self) -> Sort:
        return REAL

    def __repr__(self):
        return f"Num({self.value})"


@dataclass(frozen=True)
class Action(Term):
    """Action term; the last argument is always the occurrence time"""
    functor: str
    args: Tuple[Term, ...]
    time: Term

    def __post_init__(self):
        if self.time.sort != REAL:
            raise SortError(f"temporal argument of {self.functor} must be Real, got {self.time.sort}")

    @property
    def sort(self) -> Sort:
        return ACTION


class Situation(Term):
    __slots__ = ()

    @property
    def sort(self) -> Sort:
        return SITUATION


@dataclass(frozen=True)
class InitSit(Situation):

    def __repr__(self):
        return "S0"


S0 = InitSit()


@dataclass(frozen=True)
class Do(Situation):
    action: Term
    sit: Term


@dataclass(frozen=True)
class Start(Term):
    sit: Term

    @property
    def sort(self) -> Sort:
        return REAL


@dataclass(frozen=True)
class TimeOf(Term):
    action: Term

    @property
    def sort(self) -> Sort:
        return REAL


@dataclass(frozen=True)
class StaticFn(Term):
    """Situation-independent function application"""
    functor: str
    args: Tuple[Term, ...]
    result_sort: Sort

    @property
    def sort(self) -> Sort:
        return self.result_sort


@dataclass(frozen=True)
class Fluent(Term):
    """Atemporal functional fluent f(x̄, s), including f_init companions"""
    functor: str
    args: Tuple[Term, ...]
    sit: Term
    result_sort: Sort = REAL

    @property
    def sort(self) -> Sort:
        return self.result_sort


@dataclass(frozen=True)
class TFluent(Term):
    """Temporal functional fluent f(x̄, t, s)"""
    functor: str
    args: Tuple[Term, ...]
    time: Term
    sit: Term

    @property
    def sort(self) -> Sort:
        return REAL


ARITH_OPS = ("+", "-", "*")


@dataclass(frozen=True)
class Arith(Term):
    """Arithmetic over reals; '-' with a single argument is negation"""
    op: str
    args: Tuple[Term, ...]

    def __post_init__(self):
        if self.op not in ARITH_OPS:
            raise SortError(f"unknown arithmetic operator {self.op}")
        for arg in self.args:
            if arg.sort != REAL:
                raise SortError(f"arithmetic on non-real term {arg}")

    @property
    def sort(self) -> Sort:
        return REAL


Number = Union[int, Fraction]


def num(value: Number) -> Num:
    return Num(Fraction(value))


def plus(*args: Term) -> Term:
    return args[0] if len(args) == 1 else Arith("+", tuple(args))


def minus(left: Term, right: Term) -> Term:
    return Arith("-", (left, right))


def times(left: Term, right: Term) -> Term:
    return Arith("*", (left, right))


def do_chain(actions, sit: Term = S0) -> Term:
    """do([a1, ..., an], sit)"""
    for action in actions:
        sit = Do(action, sit)
    return sit


def situation_actions(sit: Term) -> Tuple[Term, ...]:
    """Actions of a do-chain in execution order"""
    actions = []
    while isinstance(sit, Do):
        actions.append(sit.action)
        sit = sit.sit
    return tuple(reversed(actions))


def situation_root(sit: Term) -> Term:
    while isinstance(sit, Do):
        sit = sit.sit
    return sit


def situation_prefixes(sit: Term) -> Tuple[Term, ...]:
    """All prefixes of a do-chain from its root up to and including sit"""
    prefixes = []
    while isinstance(sit, Do):
        prefixes.append(sit)
        sit = sit.sit
    prefixes.append(sit)
    return tuple(reversed(prefixes))


def is_prefix(prefix: Term, sit: Term) -> bool:
    """prefix ⊑ sit"""
    while True:
        if prefix == sit:
            return True
        if not isinstance(sit, Do):
            return False
        sit = sit.sit


def term_children(term: Term) -> Tuple[Term, ...]:
    if isinstance(term, Action):
        return term.args + (term.time,)
    if isinstance(term, Do):
        return (term.action, term.sit)
    if isinstance(term, Start):
        return (term.sit,)
    if isinstance(term, TimeOf):
        return (term.action,)
    if isinstance(term, StaticFn):
        return term.args
    if isinstance(term, Fluent):
        return term.args + (term.sit,)
    if isinstance(term, TFluent):
        return term.args + (term.time, term.sit)
    if isinstance(term, Arith):
        return term.args
    return ()


def rebuild_term(term: Term, children) -> Term:
    """Rebuild a compound term from new children, in term_children order"""
    children = tuple(children)
    if isinstance(term, Action):
        return Action(term.functor, children[:-1], children[-1])
    if isinstance(term, Do):
        return Do(children[0], children[1])
    if isinstance(term, Start):
        return Start(children[0])
    if isinstance(term, TimeOf):
        return TimeOf(children[0])
    if isinstance(term, StaticFn):
        return StaticFn(term.functor, children, term.result_sort)
    if isinstance(term, Fluent):
        return Fluent(term.functor, children[:-1], children[-1], term.result_sort)
    if isinstance(term, TFluent):
        return TFluent(term.functor, children[:-2], children[-2], children[-1])
    if isinstance(term, Arith):
        return Arith(term.op, children)
    return term


def iter_subterms(term: Term):
    """Pre-order iteration over a term and its subterms"""
    yield term
    for child in term_children(term):
        yield from iter_subterms(child)


def is_ground_term(term: Term) -> bool:
    return not any(isinstance(sub, Var) for sub in iter_subterms(term))
