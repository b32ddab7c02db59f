"""
Results of queries, regression and diagnosis, with their structured records.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from logic.formulas import Formula
from logic.intervals import IntervalSet
from logic.render import render
from logic.terms import Action, Num, Term
from models.theory import Diagnostic
from utils.cache import format_rational

GroundKey = Tuple[str, Tuple[str, ...]]


def _key_text(key: GroundKey) -> str:
    functor, args = key
    return f"{functor}({', '.join(args)})"


def step_text(action: Term) -> str:
    """A(args)@t, the narrative notation of one action"""
    if isinstance(action, Action) and isinstance(action.time, Num):
        args = ", ".join(str(arg) for arg in action.args)
        return f"{action.functor}({args})@{format_rational(action.time.value)}"
    return str(action)


# ==== REGRESSION ====

REGRESSION_RULES = (
    "poss", "start-of-do", "relational-ssa", "functional-ssa", "init-ssa",
    "temporal-sea", "simplify",
)


@dataclass(frozen=True)
class RegressionStep:
    rule: str
    before: Formula
    after: Formula
    depth: int
    note: str = ""

    def to_record(self, index: int) -> dict:
        record = {
            "kind": "trace-step",
            "step": index,
            "rule": self.rule,
            "depth": self.depth,
            "before": render(self.before),
            "after": render(self.after),
        }
        if self.note:
            record["note"] = self.note
        return record


@dataclass
class RegressionTrace:
    """Rewrite steps in application order"""
    steps: List[RegressionStep] = field(default_factory=list)

    def record(self, rule: str, before: Formula, after: Formula, depth: int, note: str = "",
               at: Optional[int] = None) -> None:
        """Append a step, or insert it at index at when it opens steps already recorded"""
        if before == after:
            return
        step = RegressionStep(rule, before, after, depth, note)
        if at is None:
            self.steps.append(step)
        else:
            self.steps.insert(at, step)

    def rules(self) -> List[str]:
        return [step.rule for step in self.steps]

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


@dataclass(frozen=True)
class RegressionResult:
    query: Formula
    formula: Formula
    stop: Term
    trace: RegressionTrace


# ==== EVALUATION ====

@dataclass(frozen=True)
class ThresholdResult:
    """Earliest instant satisfying a guard; attained is False for an open infimum"""
    value: Fraction
    attained: bool

    def __str__(self):
        text = format_rational(self.value)
        return text if self.attained else f"{text} (infimum)"


@dataclass(frozen=True)
class TimedValuation:
    """Fluent values at one instant of a situation"""
    situation: Term
    time: Fraction
    temporal: Dict[GroundKey, Fraction] = field(default_factory=dict)
    initial: Dict[GroundKey, Fraction] = field(default_factory=dict)
    relational: Dict[GroundKey, bool] = field(default_factory=dict)
    functional: Dict[GroundKey, object] = field(default_factory=dict)

    def value(self, functor: str, *args: str):
        key = (functor, tuple(args))
        for table in (self.temporal, self.initial, self.functional, self.relational):
            if key in table:
                return table[key]
        raise KeyError(_key_text(key))

    def to_records(self) -> List[dict]:
        records = []
        for kind, table in (("temporal", self.temporal), ("init", self.initial),
                            ("functional", self.functional), ("relational", self.relational)):
            for key in sorted(table):
                value = table[key]
                if isinstance(value, bool):
                    shown = "true" if value else "false"
                elif isinstance(value, Fraction):
                    shown = format_rational(value)
                else:
                    shown = str(value)
                records.append({"kind": "value", "fluent": kind, "term": _key_text(key),
                                "time": format_rational(self.time), "value": shown})
        return records


@dataclass(frozen=True)
class ExecutabilityReport:
    executable: bool
    diagnostics: Tuple[Diagnostic, ...] = ()

    def __bool__(self):
        return self.executable


@dataclass(frozen=True)
class QueryVerdict:
    query: str
    narrative: str
    value: bool
    regressed: Optional[Formula] = None

    def to_record(self) -> dict:
        record = {"kind": "verdict", "query": self.query, "narrative": self.narrative,
                  "value": self.value}
        if self.regressed is not None:
            record["regressed"] = render(self.regressed)
        return record


# ==== DIAGNOSIS ====

class DiagnosisStatus(Enum):
    ATTRIBUTED = "attributed"
    INITIALLY_TRUE = "initially-true"
    NEVER_TRUE = "never-true"
    NOT_AT_HORIZON = "not-at-horizon"


@dataclass(frozen=True)
class PrefixVerdict:
    """Truth of the query over one prefix's interval [start, end]"""
    index: int
    situation: Term
    start: Fraction
    end: Fraction
    holds: IntervalSet
    at_end: bool

    @property
    def somewhere(self) -> bool:
        return not self.holds.is_empty

    @property
    def throughout(self) -> bool:
        return self.holds.covers(IntervalSet.closed(self.start, self.end))

    def to_record(self) -> dict:
        return {
            "kind": "prefix",
            "index": self.index,
            "situation": str(self.situation),
            "start": format_rational(self.start),
            "end": format_rational(self.end),
            "holds": str(self.holds),
            "at_end": self.at_end,
        }


@dataclass(frozen=True)
class DiagnosisReport:
    status: DiagnosisStatus
    prefixes: Tuple[PrefixVerdict, ...]
    responsible: Optional[Term] = None
    responsible_index: Optional[int] = None
    elapsed: Optional[Fraction] = None
    attained: bool = True

    @property
    def summary(self) -> str:
        if self.status is DiagnosisStatus.INITIALLY_TRUE:
            return "initially true"
        if self.status is DiagnosisStatus.NEVER_TRUE:
            return "false at all prefixes"
        if self.status is DiagnosisStatus.NOT_AT_HORIZON:
            return "false at the horizon"
        who = step_text(self.responsible) if self.responsible is not None else "initial situation"
        return f"responsible: {who}; elapsed: {format_rational(self.elapsed)}"

    def to_record(self) -> dict:
        record = {"kind": "diagnosis", "status": self.status.value}
        if self.responsible is not None:
            record["responsible"] = step_text(self.responsible)
            record["prefix"] = self.responsible_index
        if self.elapsed is not None:
            record["elapsed"] = format_rational(self.elapsed)
            record["attained"] = self.attained
        return record
