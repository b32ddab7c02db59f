"""
Attribution of a query's truth to an action of a narrative.

The query has one free time variable. For each prefix σ' of the narrative
the query is read at σ' and its truth set is computed over the interval
during which σ' is current: from start(σ') to the next action's time, or to
the horizon for the last prefix. The responsible action is the one starting
the earliest prefix after which the query holds without interruption up to
the horizon; the elapsed time runs from that action to the instant the query
starts holding for good.
"""

import logging
from fractions import Fraction
from typing import List, Optional

from exceptions import NarrativeError
from logic.formulas import Formula
from logic.intervals import IntervalSet
from logic.render import render
from logic.sorts import REAL
from logic.substitution import replace_term
from logic.terms import Term, Var, situation_actions, situation_prefixes
from models.reports import DiagnosisReport, DiagnosisStatus, PrefixVerdict
from models.theory import TemporalBAT
from services.evaluator import evaluate_set
from services.regression_engine import RegressionEngine
from services.simulator import Simulation
from utils.cache import format_rational

logger = logging.getLogger(__name__)

TIME = Var("t", REAL)


def prefix_verdicts(query: Formula, sigma: Term, engine: RegressionEngine,
                    horizon: Fraction, time_var: Var = TIME) -> List[PrefixVerdict]:
    """Truth of the query over the interval of every prefix of sigma"""
    prefixes = situation_prefixes(sigma)
    starts = [engine.model.initial_world.start] + [a.time.value for a in situation_actions(sigma)]
    verdicts = []
    for index, prefix in enumerate(prefixes):
        start = starts[index]
        end = starts[index + 1] if index + 1 < len(prefixes) else horizon
        local = replace_term(query, sigma, prefix)
        regressed = engine.regress(local).formula
        window = IntervalSet.closed(start, end)
        holds = evaluate_set(regressed, time_var, engine.model).intersection(window)
        at_end = holds.contains(end)
        verdicts.append(PrefixVerdict(index, prefix, start, end, holds, at_end))
        logger.debug("prefix %d %s: query holds on %s", index, render(prefix), holds)
    return verdicts


def diagnose(query: Formula, sigma: Term, theory: TemporalBAT, horizon: Optional[Fraction] = None,
             time_var: Var = TIME, engine: Optional[RegressionEngine] = None) -> DiagnosisReport:
    """
    Attribute the truth of a query at the end of a narrative.

    Args:
        query: Regressable formula about sigma with the free real variable time_var
        sigma: Ground narrative situation
        theory: Temporal theory
        horizon: Last instant considered; defaults to start(sigma)
        time_var: The query's time variable
        engine: Regression engine to reuse

    Returns:
        DiagnosisReport with the per-prefix verdicts

    Raises:
        NarrativeError: when the horizon precedes start(sigma)
    """
    engine = engine or RegressionEngine(theory)
    start = Simulation(engine.theory, engine.model).world(sigma).start
    horizon = start if horizon is None else Fraction(horizon)
    if horizon < start:
        raise NarrativeError(f"horizon {format_rational(horizon)} precedes start "
                             f"{format_rational(start)} of {render(sigma)}")

    verdicts = prefix_verdicts(query, sigma, engine, horizon, time_var)
    actions = situation_actions(sigma)
    prefixes = tuple(verdicts)

    if not any(v.somewhere for v in verdicts):
        return DiagnosisReport(DiagnosisStatus.NEVER_TRUE, prefixes)
    if not verdicts[-1].at_end:
        return DiagnosisReport(DiagnosisStatus.NOT_AT_HORIZON, prefixes)

    index = len(verdicts) - 1
    while index > 0 and verdicts[index].throughout:
        index -= 1
    current = verdicts[index]
    if index == 0 and current.throughout:
        report = DiagnosisReport(DiagnosisStatus.INITIALLY_TRUE, prefixes)
    elif not current.at_end:
        # false right before the next action, true from it on
        report = DiagnosisReport(DiagnosisStatus.ATTRIBUTED, prefixes, actions[index], index + 1,
                                 Fraction(0))
    else:
        final = current.holds.intervals[-1]
        responsible = actions[index - 1] if index > 0 else None
        report = DiagnosisReport(DiagnosisStatus.ATTRIBUTED, prefixes, responsible, index,
                                 final.lo - current.start, final.lo_closed)
    logger.info("diagnosis of %s: %s", render(query), report.summary)
    return report
