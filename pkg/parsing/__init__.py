"""
Readers and printers for theories, automata, narratives and queries.
"""

from parsing.ha_parser import parse_automaton
from parsing.narrative import format_narrative, parse_batch_line, parse_narrative, parse_query, parse_term
from parsing.printer import print_compiled, print_theory
from parsing.theory_parser import parse_theory

__all__ = [
    "parse_automaton",
    "format_narrative",
    "parse_batch_line",
    "parse_narrative",
    "parse_query",
    "parse_term",
    "print_compiled",
    "print_theory",
    "parse_theory",
]
