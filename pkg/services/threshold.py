"""
Earliest time in an interval at which a guard holds.
"""

import logging
from fractions import Fraction
from typing import Callable, Optional

from logic.formulas import Formula
from logic.intervals import IntervalSet
from logic.render import render
from logic.sorts import REAL
from logic.terms import Term, Var
from models.reports import ThresholdResult
from models.theory import TemporalBAT
from services.evaluator import InitialModel, World, evaluate_set

logger = logging.getLogger(__name__)

TIME = Var("t", REAL)


def solve_threshold(guard: Formula, lo: Fraction, hi: Optional[Fraction], var: Var = TIME,
                    model: Optional[InitialModel] = None,
                    worlds: Optional[Callable[[Term], World]] = None) -> Optional[ThresholdResult]:
    """
    Find the earliest instant of [lo, hi] satisfying a guard.

    Args:
        guard: Formula linear in var, otherwise closed
        lo: Interval start
        hi: Interval end; None for an unbounded interval
        var: The time variable
        model: Initial model for fluents and statics the guard mentions

    Returns:
        ThresholdResult with the infimum and whether it is attained, or None
        when no instant of the interval satisfies the guard

    Raises:
        NonlinearError: when var occurs nonlinearly
    """
    model = model or InitialModel(TemporalBAT())
    window = IntervalSet.closed(lo, hi)
    holds = evaluate_set(guard, var, model, worlds).intersection(window)
    found = holds.infimum()
    if found is None:
        logger.debug("threshold of %s on %s: none", render(guard), window)
        return None
    value, attained = found
    logger.debug("threshold of %s on %s: %s (attained: %s)", render(guard), window, value, attained)
    return ThresholdResult(value, attained)
