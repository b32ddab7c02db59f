"""
Rendering of terms and formulas in the theory-file syntax.

The output re-parses to the same syntax tree.
"""

from fractions import Fraction

from utils.cache import format_rational
from logic.formulas import (
    And, Eq, Exists, Forall, Formula, Iff, Implies, Le, Lt, Not, Or, Poss, RelAtom,
    SitPrec, StaticAtom, Truth,
)
from logic.terms import (
    Action, Arith, Do, Fluent, InitSit, Num, Obj, Start, StaticFn, TFluent, Term, TimeOf, Var,
)

# term precedence
_SUM, _PRODUCT, _UNARY, _ATOM = 1, 2, 3, 4
# formula precedence
_QUANT, _IFF, _IMPLIES, _OR, _AND, _NOT, _LITERAL = 0, 1, 2, 3, 4, 5, 6


def render(node) -> str:
    if isinstance(node, Term):
        return _term(node)
    return _formula(node, _QUANT)


def _args(args) -> str:
    return ", ".join(_term(arg) for arg in args)


def _call(name: str, args) -> str:
    return f"{name}({_args(args)})" if args else f"{name}()"


def _term_prec(term: Term) -> int:
    if isinstance(term, Num):
        if term.value < 0:
            return _UNARY
        return _PRODUCT if term.value.denominator != 1 else _ATOM
    if isinstance(term, Arith):
        if len(term.args) == 1:
            return _UNARY
        return _SUM if term.op in "+-" else _PRODUCT
    return _ATOM


def _operand(term: Term, minimum: int) -> str:
    text = _term(term)
    if _term_prec(term) < minimum or (isinstance(term, Num) and term.value < 0):
        return f"({text})"
    return text


def _term(term: Term) -> str:
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Obj):
        return term.name
    if isinstance(term, Num):
        return format_rational(term.value)
    if isinstance(term, InitSit):
        return "S0"
    if isinstance(term, Do):
        return f"do({_term(term.action)}, {_term(term.sit)})"
    if isinstance(term, Action):
        return _call(term.functor, term.args + (term.time,))
    if isinstance(term, Start):
        return f"start({_term(term.sit)})"
    if isinstance(term, TimeOf):
        return f"time({_term(term.action)})"
    if isinstance(term, StaticFn):
        return _call(term.functor, term.args)
    if isinstance(term, Fluent):
        return _call(term.functor, term.args + (term.sit,))
    if isinstance(term, TFluent):
        return _call(term.functor, term.args + (term.time, term.sit))
    if isinstance(term, Arith):
        if len(term.args) == 1:
            return f"-{_operand(term.args[0], _ATOM)}"
        if term.op == "*":
            parts = [_operand(term.args[0], _PRODUCT)]
            parts += [_operand(arg, _UNARY) for arg in term.args[1:]]
            return " * ".join(parts)
        parts = [_operand(term.args[0], _SUM)]
        parts += [_operand(arg, _PRODUCT if term.op == "-" else _SUM) for arg in term.args[1:]]
        return f" {term.op} ".join(parts)
    raise TypeError(f"not a term: {term!r}")


def _wrap(text: str, prec: int, minimum: int) -> str:
    return f"({text})" if prec < minimum else text


def _formula(phi: Formula, minimum: int) -> str:
    text, prec = _formula_prec(phi)
    return _wrap(text, prec, minimum)


def _formula_prec(phi: Formula):
    if isinstance(phi, Truth):
        return ("true" if phi.value else "false"), _LITERAL
    if isinstance(phi, Eq):
        return f"{_term(phi.left)} = {_term(phi.right)}", _LITERAL
    if isinstance(phi, Lt):
        return f"{_term(phi.left)} < {_term(phi.right)}", _LITERAL
    if isinstance(phi, Le):
        return f"{_term(phi.left)} <= {_term(phi.right)}", _LITERAL
    if isinstance(phi, SitPrec):
        return f"{_term(phi.left)} <<= {_term(phi.right)}", _LITERAL
    if isinstance(phi, RelAtom):
        return _call(phi.functor, phi.args + (phi.sit,)), _LITERAL
    if isinstance(phi, StaticAtom):
        return _call(phi.functor, phi.args), _LITERAL
    if isinstance(phi, Poss):
        return f"Poss({_term(phi.action)}, {_term(phi.sit)})", _LITERAL
    if isinstance(phi, Not):
        if isinstance(phi.body, Eq):
            return f"{_term(phi.body.left)} != {_term(phi.body.right)}", _LITERAL
        return f"!{_formula(phi.body, _NOT)}", _NOT
    if isinstance(phi, And):
        return " & ".join(_formula(p, _NOT) for p in phi.parts), _AND
    if isinstance(phi, Or):
        return " | ".join(_formula(p, _AND) for p in phi.parts), _OR
    if isinstance(phi, Implies):
        return f"{_formula(phi.left, _OR)} -> {_formula(phi.right, _IMPLIES)}", _IMPLIES
    if isinstance(phi, Iff):
        return f"{_formula(phi.left, _IMPLIES)} <-> {_formula(phi.right, _IMPLIES)}", _IFF
    if isinstance(phi, (Exists, Forall)):
        kind = type(phi)
        names = []
        body = phi
        while isinstance(body, kind):
            names.append(body.var.name)
            body = body.body
        keyword = "exists" if kind is Exists else "forall"
        return f"{keyword} {', '.join(names)}. {_formula(body, _QUANT)}", _QUANT
    raise TypeError(f"not a formula: {phi!r}")


def render_value(value) -> str:
    """Render an evaluation result (rational, object name or action)"""
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)
