"""
pyparsing grammars for theory files, narratives and queries.

Parsing yields raw syntax nodes carrying source positions; symbol kinds and
sorts are assigned afterwards by parsing.resolver.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

import pyparsing as pp
from pyparsing import (
    DelimitedList, FollowedBy, Forward, Group, Keyword, Literal, OpAssoc, Opt, ParseBaseException, Regex,
    StringEnd, Suppress, ZeroOrMore, col, infix_notation, lineno,
)

from exceptions import ParseError

pp.ParserElement.enable_packrat()

KEYWORDS = ("exists", "forall", "true", "false", "on", "when")


def _pos():
    return field(default=0, compare=False, repr=False)


# ==== RAW SYNTAX ====

@dataclass(frozen=True)
class RName:
    name: str
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RWild:
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RNum:
    value: Fraction
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RCall:
    name: str
    args: Tuple[object, ...]
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RArith:
    """op is one of + - * / or neg"""
    op: str
    args: Tuple[object, ...]
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RCmp:
    op: str
    left: object
    right: object
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RBool:
    value: bool
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RNot:
    body: object
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RAnd:
    parts: Tuple[object, ...]
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class ROr:
    parts: Tuple[object, ...]
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RImplies:
    left: object
    right: object
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RIff:
    left: object
    right: object
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RQuant:
    kind: str
    names: Tuple[str, ...]
    body: object
    line: int = _pos()
    column: int = _pos()


# ==== RAW SECTION ITEMS ====

@dataclass(frozen=True)
class RSortDecl:
    name: str
    constants: Tuple[str, ...]
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RSignature:
    """name(Sorts) [: Sort] with an optional natural/temporal modifier"""
    name: str
    arg_sorts: Tuple[str, ...]
    result: Optional[str] = None
    modifier: Optional[str] = None
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RClause:
    head: RCall
    body: object
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RPoss:
    head: RCall
    body: object
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RAxiom:
    formula: object
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class REffect:
    head: RCall
    pattern: object
    guard: Optional[object]
    value: object
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RTca:
    head: RCall
    context: object
    law: object
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RSection:
    name: str
    items: Tuple[object, ...]
    line: int = _pos()
    column: int = _pos()


@dataclass(frozen=True)
class RTheory:
    name: str
    sections: Tuple[RSection, ...]


@dataclass(frozen=True)
class RStep:
    """One narrative entry A(args)@time"""
    action: RCall
    time: object
    line: int = _pos()
    column: int = _pos()


def where(node) -> Tuple[int, int]:
    return getattr(node, "line", 0), getattr(node, "column", 0)


# ==== PARSE ACTIONS ====

def _at(s, loc):
    return dict(line=lineno(loc, s), column=col(loc, s))


def _fold_left(s, loc, items, build):
    result = items[0]
    for index in range(1, len(items), 2):
        result = build(items[index], result, items[index + 1], _at(s, loc))
    return result


def _sum(s, loc, toks):
    return _fold_left(s, loc, list(toks[0]),
                      lambda op, a, b, pos: RArith(op, (a, b), **pos))


def _negate(s, loc, toks):
    return RArith("neg", (toks[0][1],), **_at(s, loc))


def _not(s, loc, toks):
    return RNot(toks[0][1], **_at(s, loc))


def _and(s, loc, toks):
    return RAnd(tuple(toks[0][::2]), **_at(s, loc))


def _or(s, loc, toks):
    return ROr(tuple(toks[0][::2]), **_at(s, loc))


def _implies(s, loc, toks):
    items = list(toks[0])
    result = items[-1]
    for index in range(len(items) - 3, -1, -2):
        result = RImplies(items[index], result, **_at(s, loc))
    return result


def _iff(s, loc, toks):
    return _fold_left(s, loc, list(toks[0]),
                      lambda op, a, b, pos: RIff(a, b, **pos))


def _build(cls):
    """Parse action calling cls with the tokens in order plus the position"""

    def action(s, loc, toks):
        values = [tuple(tok) if isinstance(tok, pp.ParseResults) else tok for tok in toks]
        return cls(*values, **_at(s, loc))

    return action


# ==== GRAMMAR ====

class TheoryGrammar:
    """
    Grammar elements shared by the theory, automaton, narrative and query readers.

    Term operators by decreasing precedence: unary -, then * and /, then + and -.
    Formula connectives by decreasing precedence: !, &, |, -> (right), <->.
    A quantifier body extends as far right as possible.
    """

    def __init__(self):
        self.ident = Regex(
            r"(?!(?:%s)(?![A-Za-z0-9_']))(?:[A-Za-z][A-Za-z0-9_']*|_[A-Za-z0-9_']+)"
            % "|".join(KEYWORDS)
        )
        number = Regex(r"\d+(?:\.\d+)?").set_parse_action(
            lambda s, loc, toks: RNum(Fraction(toks[0]), **_at(s, loc)))
        wildcard = Regex(r"_(?![A-Za-z0-9_'])").set_parse_action(
            lambda s, loc, toks: RWild(**_at(s, loc)))

        self.term = Forward()
        self.formula = Forward()

        self.call = (self.ident + Suppress("(") + Group(Opt(DelimitedList(self.term)))
                     + Suppress(")")).set_parse_action(_build(RCall))
        name = self.ident.copy().set_parse_action(lambda s, loc, toks: RName(toks[0], **_at(s, loc)))
        operand = number | wildcard | self.call | name

        minus = Regex(r"-(?!>)")
        self.term <<= infix_notation(operand, [
            (minus, 1, OpAssoc.RIGHT, _negate),
            (Regex(r"[*/]"), 2, OpAssoc.LEFT, _sum),
            (Regex(r"\+") | minus, 2, OpAssoc.LEFT, _sum),
        ])

        cmp_op = Regex(r"<<=|<=|>=|!=|=(?![>=])|<(?![-=<])|>")
        comparison = (self.term + cmp_op + self.term).set_parse_action(
            lambda s, loc, toks: RCmp(toks[1], toks[0], toks[2], **_at(s, loc)))
        quantifier = ((Keyword("exists") | Keyword("forall"))
                      + Group(DelimitedList(self.ident)) + Suppress(".")
                      + self.formula).set_parse_action(_build(RQuant))
        boolean = (Keyword("true") | Keyword("false")).set_parse_action(
            lambda s, loc, toks: RBool(toks[0] == "true", **_at(s, loc)))

        self.formula <<= infix_notation(quantifier | boolean | comparison | self.call, [
            (Regex(r"!(?!=)"), 1, OpAssoc.RIGHT, _not),
            (Literal("&"), 2, OpAssoc.LEFT, _and),
            (Literal("|"), 2, OpAssoc.LEFT, _or),
            (Literal("->"), 2, OpAssoc.RIGHT, _implies),
            (Literal("<->"), 2, OpAssoc.LEFT, _iff),
        ])
        # effect guards stop before the -> of the effect value
        self.guard = infix_notation(boolean | comparison | self.call, [
            (Regex(r"!(?!=)"), 1, OpAssoc.RIGHT, _not),
            (Literal("&"), 2, OpAssoc.LEFT, _and),
            (Literal("|"), 2, OpAssoc.LEFT, _or),
        ])
        self.theory = self._theory()
        self.narrative = self._narrative()

    def signature(self):
        return self.ident + Suppress("(") + Group(Opt(DelimitedList(self.ident))) + Suppress(")")

    def section(self, keyword, item):
        return (keyword + Suppress("{") + Group(ZeroOrMore(item + Suppress(";")))
                + Suppress("}")).set_parse_action(_build(RSection))

    def _theory(self):
        formula, term, call, ident = self.formula, self.term, self.call, self.ident

        sort_decl = (ident + Suppress("=") + Suppress("{") + Group(Opt(DelimitedList(ident)))
                     + Suppress("}")).set_parse_action(_build(RSortDecl))

        def signature(modifier):
            element = self.signature() + Opt(Suppress(":") + ident, default="")
            if modifier is None:
                return element.set_parse_action(
                    lambda s, loc, toks: RSignature(toks[0], tuple(toks[1]), toks[2] or None,
                                                    **_at(s, loc)))
            return (Opt(Keyword(modifier), default="") + element).set_parse_action(
                lambda s, loc, toks: RSignature(toks[1], tuple(toks[2]), toks[3] or None,
                                                toks[0] or None, **_at(s, loc)))

        clause = (call + Suppress(":=") + ((formula + FollowedBy(";")) | term)).set_parse_action(
            _build(RClause))
        poss = (call + Suppress(":") + formula).set_parse_action(_build(RPoss))
        axiom = formula.copy().set_parse_action(_build(RAxiom))
        effect = (call + Suppress(":") + Suppress(Keyword("on")) + term
                  + Opt(Suppress(Keyword("when")) + self.guard, default="")
                  + Suppress("->") + term).set_parse_action(
            lambda s, loc, toks: REffect(toks[0], toks[1], toks[2] or None, toks[3], **_at(s, loc)))
        tca = (call + Suppress(":") + formula + Suppress("=>") + formula).set_parse_action(
            _build(RTca))

        sections = (
            self.section(Keyword("sorts"), sort_decl)
            | self.section(Keyword("statics"), clause | signature(None))
            | self.section(Keyword("actions"), signature("natural"))
            | self.section(Keyword("fluents"), signature("temporal"))
            | self.section(Keyword("poss"), poss)
            | self.section(Keyword("ssa"), axiom)
            | self.section(Literal("init-ssa"), effect)
            | self.section(Keyword("tca"), tca)
            | self.section(Keyword("init"), axiom)
            | self.section(Keyword("constraints"), axiom)
        )
        header = Opt(Suppress(Keyword("theory")) + ident + Suppress(";"), default="")
        grammar = (header + Group(ZeroOrMore(sections)) + StringEnd()).set_parse_action(
            lambda toks: RTheory(toks[0], tuple(toks[1])))
        grammar.ignore(pp.dbl_slash_comment)
        return grammar

    def _narrative(self):
        step = (self.call + Suppress("@") + self.term).set_parse_action(_build(RStep))
        return Group(Opt(DelimitedList(step, delim=";") + Opt(Suppress(";")))) + StringEnd()


_grammar: Optional[TheoryGrammar] = None


def grammar() -> TheoryGrammar:
    """Shared grammar instance, built on first use"""
    global _grammar
    if _grammar is None:
        _grammar = TheoryGrammar()
    return _grammar


def parse_with(element, text: str, what: str):
    """Run a pyparsing element over the whole text, converting failures to ParseError"""
    try:
        return element.parse_string(text, parse_all=True)
    except ParseBaseException as exc:
        raise ParseError(f"invalid {what}: {exc.msg}", exc.lineno, exc.col) from exc


def read_theory(text: str) -> RTheory:
    return parse_with(grammar().theory, text, "theory")[0]


def read_formula(text: str):
    return parse_with(grammar().formula, text, "formula")[0]


def read_term(text: str):
    return parse_with(grammar().term, text, "term")[0]


def read_narrative(text: str) -> Tuple[RStep, ...]:
    if not text.strip():
        return ()
    return tuple(parse_with(grammar().narrative, text, "narrative")[0])
