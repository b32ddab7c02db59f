"""
Narratives (ground action sequences) and queries against a parsed theory.

A narrative is written `A(args)@time; B(args)@time`; a query is a formula
whose fluents may omit their situation argument, in which case the
narrative's situation is used.
"""

from typing import Dict, List, Optional, Tuple

from exceptions import NarrativeError, ParseError
from logic.formulas import Formula
from logic.simplify import simplify
from logic.sorts import REAL, Sort
from logic.substitution import free_vars
from logic.terms import S0, Action, Num, Term, do_chain, situation_actions
from models.reports import step_text
from models.theory import TemporalBAT
from parsing.grammar import RCall, read_formula, read_narrative, read_term
from parsing.resolver import FORMULA, Resolver, SymbolTable


def parse_narrative(theory: TemporalBAT, text: str) -> Term:
    """
    Read a narrative into a ground situation term.

    Raises:
        ParseError: on syntax or symbol errors
        NarrativeError: when an argument or time is not ground or times decrease
    """
    table = SymbolTable.of(theory)
    actions: List[Action] = []
    for step in read_narrative(text):
        if step.action.name not in theory.actions:
            raise ParseError(f"unknown action {step.action.name}", step.line or None,
                             step.column or None, code="unknown-symbol")
        written = RCall(step.action.name, tuple(step.action.args) + (step.time,),
                        step.action.line, step.action.column)
        action = Resolver(table).term(written)
        action = simplify(action)
        if free_vars(action):
            raise NarrativeError(f"narrative step {action} is not ground")
        if not isinstance(action.time, Num):
            raise NarrativeError(f"time of {action} is not a number")
        actions.append(action)
    return do_chain(actions)


def format_narrative(sit: Term) -> str:
    """Inverse of parse_narrative for ground situations"""
    return "; ".join(step_text(action) for action in situation_actions(sit))


def parse_query(theory: TemporalBAT, text: str, sit: Optional[Term] = S0,
                free: Optional[Dict[str, Sort]] = None) -> Formula:
    """
    Read a query formula.

    Args:
        theory: Theory supplying the vocabulary
        text: Formula text
        sit: Situation appended to fluents written without one
        free: Variables allowed free, with their sorts (e.g. t for diagnosis)
    """
    resolver = Resolver(SymbolTable.of(theory), fixed=free, default_sit=sit)
    formula = resolver.resolve([(read_formula(text), FORMULA)])[0]
    stray = sorted(v.name for v in free_vars(formula) if free is None or v.name not in free)
    if stray:
        raise ParseError(f"free variable {', '.join(stray)} in query", code="unknown-symbol")
    return formula


def parse_term(theory: TemporalBAT, text: str, sit: Optional[Term] = S0,
               expected: Optional[Sort] = REAL) -> Term:
    return Resolver(SymbolTable.of(theory), default_sit=sit).term(read_term(text), expected)


def parse_batch_line(line: str) -> Tuple[str, str]:
    """Split `narrative | query` at the first bar"""
    narrative, bar, query = line.partition("|")
    if not bar:
        raise ParseError("batch lines have the form 'narrative | query'")
    return narrative.strip(), query.strip()
