"""
Exception hierarchy for the temporal action theory reasoner.

Library functions raise these; the CLI maps them to exit codes.
"""

from typing import Any, Optional


class ReasonerError(Exception):
    """Base class for all reasoner errors"""


class ParseError(ReasonerError):
    """Lexical or syntax error in a theory, automaton, narrative or query"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None,
                 code: str = "syntax"):
        self.line = line
        self.column = column
        self.code = code
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{location}")
        self.message = message


class SortError(ReasonerError):
    """Sort mismatch, unknown symbol or arity error"""


class NotRegressableError(ReasonerError):
    """Formula outside the regressable fragment"""


class StratificationError(ReasonerError):
    """Temporal fluents depend on each other cyclically"""


class UnsupportedFragmentError(ReasonerError):
    """Formula outside the decidable fragment handled by the engine"""


class NonlinearError(UnsupportedFragmentError):
    """Nonlinear occurrence of the time variable"""


class ConsistencyError(ReasonerError):
    """Ambiguous or missing value for a fluent; carries the offending grounding"""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class NarrativeError(ReasonerError):
    """Narrative not executable or not built from the theory's actions"""


class StepLimitExceeded(ReasonerError):
    """Regression exceeded the configured number of rewrite steps"""
