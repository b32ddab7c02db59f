"""
Reader for .ha hybrid automaton files.

    automaton ball {
        vars h, v;
        states fall;
        flow fall { h := h + v*t - 5*t*t; v := v - 10*t; }
        inv fall { h >= 0; }
        edge fall -> fall when v < 0 { v := -1/2 * v; h := 0; }
        init fall { h = 5 & v = 0; }
    }

Flow right-hand sides use the coordinate names for the handoff point and
`t` for the time elapsed in the state.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from pyparsing import DelimitedList, Group, Keyword, Literal, Opt, StringEnd, Suppress, ZeroOrMore
import pyparsing as pp

from exceptions import ParseError
from logic.formulas import TRUE, conj
from logic.sorts import REAL
from logic.substitution import free_vars
from models.hybrid import HybridAutomaton, InitialCondition, Mode, Transition
from models.theory import SourceLocation
from parsing.grammar import _at, grammar, parse_with, where
from parsing.resolver import FORMULA, Resolver, SymbolTable

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _Block:
    kind: str
    state: str
    items: Tuple[object, ...]
    target: str = ""
    guard: object = None
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class _Assign:
    name: str
    value: object
    line: int = 0
    column: int = 0


_element = None


def _automaton_grammar():
    global _element
    if _element is not None:
        return _element
    shared = grammar()
    ident, term, formula = shared.ident, shared.term, shared.formula

    assign = (ident + Suppress(":=") + term).set_parse_action(
        lambda s, loc, toks: _Assign(toks[0], toks[1], **_at(s, loc)))
    assignments = Suppress("{") + Group(ZeroOrMore(assign + Suppress(";"))) + Suppress("}")
    conditions = Suppress("{") + Group(ZeroOrMore(formula + Suppress(";"))) + Suppress("}")

    names = Group(DelimitedList(ident)) + Suppress(";")
    vars_decl = (Keyword("vars") + names).set_parse_action(
        lambda s, loc, toks: _Block("vars", "", tuple(toks[1]), **_at(s, loc)))
    states_decl = (Keyword("states") + names).set_parse_action(
        lambda s, loc, toks: _Block("states", "", tuple(toks[1]), **_at(s, loc)))
    flow = (Keyword("flow") + ident + assignments).set_parse_action(
        lambda s, loc, toks: _Block("flow", toks[1], tuple(toks[2]), **_at(s, loc)))
    inv = (Keyword("inv") + ident + conditions).set_parse_action(
        lambda s, loc, toks: _Block("inv", toks[1], tuple(toks[2]), **_at(s, loc)))
    init = (Keyword("init") + ident + conditions).set_parse_action(
        lambda s, loc, toks: _Block("init", toks[1], tuple(toks[2]), **_at(s, loc)))
    edge = (Keyword("edge") + ident + Suppress(Literal("->")) + ident
            + Opt(Suppress(Keyword("when")) + formula, default="")
            + Opt(assignments, default=[])).set_parse_action(
        lambda s, loc, toks: _Block("edge", toks[1], tuple(toks[4]), toks[2], toks[3] or None,
                                    **_at(s, loc)))

    body = ZeroOrMore(vars_decl | states_decl | flow | inv | edge | init)
    element = (Suppress(Keyword("automaton")) + ident + Suppress("{") + Group(body)
               + Suppress("}") + StringEnd())
    element.ignore(pp.dbl_slash_comment)
    _element = element
    return element


def _location(node) -> Optional[SourceLocation]:
    line, column = where(node)
    return SourceLocation(line, column) if line else None


def _error(message: str, node, code: str = "syntax") -> ParseError:
    line, column = where(node)
    return ParseError(message, line or None, column or None, code=code)


def parse_automaton(text: str) -> HybridAutomaton:
    """
    Parse a .ha file.

    Raises:
        ParseError: on syntax errors, undeclared states or variables and
            duplicate blocks
    """
    tokens = parse_with(_automaton_grammar(), text, "automaton")
    name, blocks = tokens[0], list(tokens[1])
    automaton = _AutomatonBuilder(name, blocks).build()
    logger.info("parsed automaton %r", automaton)
    return automaton


class _AutomatonBuilder:

    def __init__(self, name: str, blocks: List[_Block]):
        self.name = name
        self.blocks = blocks
        self.variables: Tuple[str, ...] = ()
        self.states: Tuple[str, ...] = ()

    def build(self) -> HybridAutomaton:
        for block in self.blocks:
            if block.kind == "vars":
                if self.variables:
                    raise _error("vars declared twice", block, "duplicate")
                self.variables = self.distinct(block.items, block, "variable")
            elif block.kind == "states":
                if self.states:
                    raise _error("states declared twice", block, "duplicate")
                self.states = self.distinct(block.items, block, "state")
        if not self.states:
            raise ParseError("automaton declares no states")
        if "t" in self.variables:
            raise ParseError("t is reserved for the time elapsed in a state", code="duplicate")
        table = SymbolTable({}, {}, {}, {})
        point = {name: REAL for name in self.variables}
        self.resolver_point = lambda: Resolver(table, fixed=point)
        self.resolver_flow = lambda: Resolver(table, fixed=dict(point, t=REAL))

        flows: Dict[str, Tuple] = {}
        invariants: Dict[str, Tuple] = {}
        transitions: List[Transition] = []
        init: List[InitialCondition] = []
        for block in self.blocks:
            if block.kind == "flow":
                self.state(block.state, block)
                if block.state in flows:
                    raise _error(f"two flow blocks for {block.state}", block, "duplicate")
                flows[block.state] = self.assignments(block.items, self.resolver_flow)
            elif block.kind == "inv":
                self.state(block.state, block)
                if block.state in invariants:
                    raise _error(f"two inv blocks for {block.state}", block, "duplicate")
                invariants[block.state] = tuple(self.condition(item) for item in block.items)
            elif block.kind == "edge":
                self.state(block.state, block)
                self.state(block.target, block)
                guard = self.condition(block.guard) if block.guard is not None else TRUE
                transitions.append(Transition(block.state, block.target, guard,
                                              self.assignments(block.items, self.resolver_point),
                                              _location(block)))
            elif block.kind == "init":
                self.state(block.state, block)
                # conditions of one block hold together
                predicate = conj(*(self.condition(item) for item in block.items))
                init.append(InitialCondition(block.state, predicate, _location(block)))
        modes = tuple(Mode(state, flows.get(state, ()), invariants.get(state, ()))
                      for state in self.states)
        return HybridAutomaton(self.name, self.variables, modes, tuple(transitions), tuple(init))

    @staticmethod
    def distinct(names, node, what: str) -> Tuple[str, ...]:
        if len(set(names)) != len(names):
            raise _error(f"duplicate {what} name", node, "duplicate")
        return tuple(names)

    def state(self, name: str, node) -> None:
        if name not in self.states:
            raise _error(f"undeclared state {name}", node, "unknown-symbol")

    def assignments(self, items, make_resolver) -> Tuple[Tuple[str, object], ...]:
        seen = []
        for item in items:
            if item.name not in self.variables:
                raise _error(f"undeclared variable {item.name}", item, "unknown-symbol")
            if item.name in (name for name, _ in seen):
                raise _error(f"{item.name} assigned twice", item, "duplicate")
            resolver = make_resolver()
            value = resolver.term(item.value, REAL)
            self.closed(value, resolver, item)
            seen.append((item.name, value))
        return tuple(seen)

    def condition(self, raw):
        resolver = self.resolver_point()
        formula = resolver.resolve([(raw, FORMULA)])[0]
        self.closed(formula, resolver, raw)
        return formula

    @staticmethod
    def closed(node, resolver: Resolver, raw) -> None:
        stray = sorted(v.name for v in free_vars(node) if v.name not in resolver.fixed)
        if stray:
            raise _error(f"undeclared variable {', '.join(stray)}", raw, "unknown-symbol")
