"""
Reasoning Service - one entry point for the command line and batch use.

Loads theories and automata from disk (memoized by path and content hash)
and runs the validation, compilation, query, diagnosis and hybrid automaton
pipelines over them.
"""

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

from config import Config
from exceptions import NarrativeError, ReasonerError
from logic.sorts import REAL
from logic.terms import situation_prefixes
from models.hybrid import HybridAutomaton, Trajectory, TrajectoryCheck
from models.reports import DiagnosisReport, QueryVerdict, RegressionResult
from models.theory import Diagnostic, TemporalBAT, error, has_errors
from parsing.ha_parser import parse_automaton
from parsing.narrative import format_narrative, parse_batch_line, parse_narrative, parse_query
from parsing.theory_parser import parse_theory
from services.consistency import check_consistency
from services.diagnosis import TIME, diagnose
from services.hybrid import build_trajectory, check_invariance, check_trajectory, ha_to_tbat, translate_automaton
from services.regression_engine import RegressionEngine
from services.sea_compiler import compile_theory, ensure_compiled
from services.simulator import Simulation, check_executable
from services.theory_validator import validate_theory
from utils.cache import ResultCache

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QueryOutcome:
    """Verdict of one query together with its regression and the narrative's executability"""
    verdict: QueryVerdict
    result: RegressionResult
    diagnostics: Tuple[Diagnostic, ...] = ()


class ReasoningService:
    """
    Facade over the parsing, compilation and reasoning services.

    Theories are cached per file path and content hash, so an edited file is
    re-read while repeated commands over the same file reuse the parse.
    Each theory also gets one compiled form and one regression memo, shared by
    every engine the service builds for it.
    """

    def __init__(self):
        """Initialize reasoning service"""
        self.theory_cache = ResultCache(maxsize=Config.CACHE_MAXSIZE, ttl=Config.THEORY_CACHE_TTL)

    # ==== LOADING ====

    def _read(self, path) -> Tuple[str, str]:
        """
        Read a source file.

        Raises:
            OSError: when the file cannot be read
        """
        text = Path(path).read_text(encoding="utf-8")
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        return text, digest

    def load_theory(self, path) -> TemporalBAT:
        """
        Parse a .tbat file.

        Raises:
            OSError: when the file cannot be read
            ParseError: on syntax or symbol errors
        """
        text, digest = self._read(path)
        key = self.theory_cache.make_key("theory", str(path), digest)
        cached = self.theory_cache.get(key)
        if cached is not None:
            return cached
        theory = parse_theory(text)
        self.theory_cache.set(key, theory)
        logger.info("loaded theory %s from %s", theory.name or "anonymous", path)
        return theory

    def load_automaton(self, path) -> HybridAutomaton:
        text, digest = self._read(path)
        key = self.theory_cache.make_key("automaton", str(path), digest)
        cached = self.theory_cache.get(key)
        if cached is not None:
            return cached
        automaton = parse_automaton(text)
        self.theory_cache.set(key, automaton)
        logger.info("loaded automaton %s from %s", automaton.name, path)
        return automaton

    def translated_theory(self, automaton: HybridAutomaton) -> TemporalBAT:
        """Compiled theory of an automaton, translated once per automaton"""
        key = self.theory_cache.make_key("translation", repr(automaton), str(hash(automaton)))
        cached = self.theory_cache.get(key)
        if cached is not None:
            return cached
        theory, _ = compile_theory(ha_to_tbat(automaton))
        self.theory_cache.set(key, theory)
        return theory

    # ==== THEORIES ====

    def check(self, theory: TemporalBAT) -> List[Diagnostic]:
        """Validation, then consistency of the compiled laws when validation found no errors"""
        diagnostics = validate_theory(theory)
        if not has_errors(diagnostics):
            diagnostics += check_consistency(theory)
        return diagnostics

    def compile(self, theory: TemporalBAT) -> Tuple[TemporalBAT, List[Diagnostic]]:
        """
        Validate and compile a theory.

        Returns:
            The compiled theory (the input when validation failed) and all diagnostics
        """
        diagnostics = validate_theory(theory)
        if has_errors(diagnostics):
            return theory, diagnostics
        compiled, found = compile_theory(theory)
        return compiled, diagnostics + list(found)

    def engine(self, theory: TemporalBAT, resolve_initial: bool = True) -> RegressionEngine:
        """
        A fresh regression engine over the theory's shared compiled form and memo.

        Entries are keyed by object identity; the theory is kept in its entry
        so the identity stays valid while the entry lives.
        """
        key = self.theory_cache.make_key("engine", id(theory))
        entry = self.theory_cache.get(key)
        if entry is None or entry[0] is not theory:
            compiled = ensure_compiled(theory)
            memo = ResultCache(maxsize=Config.CACHE_MAXSIZE, ttl=Config.REGRESSION_CACHE_TTL)
            entry = (theory, compiled, memo)
            self.theory_cache.set(key, entry)
            self.theory_cache.set(self.theory_cache.make_key("engine", id(compiled)), (compiled, compiled, memo))
            logger.debug("new regression memo for %s", theory.name or "anonymous theory")
        _, compiled, memo = entry
        return RegressionEngine(compiled, resolve_initial, cache=memo)

    # ==== QUERIES ====

    def query(self, theory: TemporalBAT, narrative: str, query: str, stop_at: Optional[int] = None,
              resolve_initial: bool = True, engine: Optional[RegressionEngine] = None) -> QueryOutcome:
        """
        Regress a query about a narrative and evaluate the result.

        Args:
            theory: Temporal theory
            narrative: Narrative text; empty for S0
            query: Formula text; fluents without a situation refer to the narrative
            stop_at: Regress only down to the prefix with this many actions
            resolve_initial: Resolve statics and S0 facts while simplifying
            engine: Regression engine to reuse; otherwise one over the shared memo

        Returns:
            QueryOutcome with the verdict, the regression result and any
            executability diagnostics of the narrative

        Raises:
            NarrativeError: when stop_at is not a prefix index of the narrative
        """
        engine = engine or self.engine(theory, resolve_initial)
        sigma = parse_narrative(engine.theory, narrative)
        phi = parse_query(engine.theory, query, sit=sigma)
        prefixes = situation_prefixes(sigma)
        if stop_at is not None and not 0 <= stop_at < len(prefixes):
            raise NarrativeError(f"--stop-at {stop_at} is not a prefix of a narrative "
                                 f"with {len(prefixes) - 1} actions")
        stop = prefixes[stop_at if stop_at is not None else 0]

        result = engine.regress(phi, stop)
        simulation = Simulation(engine.theory, engine.model)
        value = simulation.evaluator.truth(result.formula, {})
        report = check_executable(sigma, engine.theory)
        verdict = QueryVerdict(query, format_narrative(sigma), value, result.formula)
        logger.info("query %s at %s: %s", query, verdict.narrative or "S0", value)
        return QueryOutcome(verdict, result, report.diagnostics)

    def batch(self, theory: TemporalBAT, lines: Iterable[str], jobs: int = 1) -> List[dict]:
        """
        Evaluate `narrative | query` lines, concurrently when jobs > 1.

        Each line gets its own regression engine; the compiled theory and the
        regression memo are shared. Output order follows input order.

        Returns:
            One record per line: a verdict carrying the narrative's executability
            warnings under "diagnostics", or a diagnostic when the line failed
        """
        compiled = self.engine(theory).theory
        items = [(number, line.strip()) for number, line in enumerate(lines, start=1)
                 if line.strip() and not line.strip().startswith("//")]

        def run(item) -> dict:
            number, line = item
            try:
                narrative, query = parse_batch_line(line)
                outcome = self.query(compiled, narrative, query)
                record = outcome.verdict.to_record()
                record["diagnostics"] = [diagnostic.to_record() for diagnostic in outcome.diagnostics]
            except ReasonerError as exc:
                record = error(getattr(exc, "code", "query"), str(exc), witness=line).to_record()
            record["line"] = number
            return record

        if jobs <= 1:
            return [run(item) for item in items]
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(run, items))

    def diagnose(self, theory: TemporalBAT, narrative: str, query: str,
                 horizon: Optional[Fraction] = None) -> DiagnosisReport:
        """
        Attribute the truth of a query at the end of a narrative.

        The query may use the free real variable t for the current time.
        """
        engine = self.engine(theory)
        sigma = parse_narrative(engine.theory, narrative)
        phi = parse_query(engine.theory, query, sit=sigma, free={TIME.name: REAL})
        return diagnose(phi, sigma, engine.theory, horizon, TIME, engine)

    # ==== HYBRID AUTOMATA ====

    def translate(self, automaton: HybridAutomaton) -> str:
        return translate_automaton(automaton)

    def trajectory(self, automaton: HybridAutomaton, narrative: str,
                   tau: Fraction) -> Tuple[Trajectory, TrajectoryCheck]:
        """Trajectory induced by a narrative, and the verdict of checking it against the automaton"""
        theory = self.translated_theory(automaton)
        sigma = parse_narrative(theory, narrative)
        trajectory = build_trajectory(automaton, sigma, tau, theory)
        return trajectory, check_trajectory(automaton, trajectory)

    def invariance(self, automaton: HybridAutomaton, narrative: str, tau: Fraction) -> TrajectoryCheck:
        theory = self.translated_theory(automaton)
        sigma = parse_narrative(theory, narrative)
        return check_invariance(automaton, sigma, tau, theory)
