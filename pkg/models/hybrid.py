"""
Basic hybrid automata and their runs.

Continuous coordinates are real variables; a flow expresses each coordinate
after t time units in terms of the handoff point (the coordinate variables)
and the time variable t.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from logic.formulas import Formula, TRUE, conj
from logic.sorts import REAL
from logic.substitution import substitute_many
from logic.terms import Num, Term, Var
from models.theory import SourceLocation
from utils.cache import format_rational

TIME_VAR = Var("t", REAL)


def coordinate(name: str) -> Var:
    return Var(name, REAL)


@dataclass(frozen=True)
class Mode:
    """Discrete state with its flow and invariant"""
    name: str
    flows: Tuple[Tuple[str, Term], ...] = ()
    invariant: Tuple[Formula, ...] = ()
    location: Optional[SourceLocation] = field(default=None, compare=False)

    def flow(self, variable: str) -> Term:
        """Flow of one coordinate; coordinates without a flow stay constant"""
        for name, term in self.flows:
            if name == variable:
                return term
        return coordinate(variable)

    def invariant_formula(self) -> Formula:
        return conj(*self.invariant)


@dataclass(frozen=True)
class Transition:
    """Edge source -> target with a guard on the pre-state and deterministic resets"""
    source: str
    target: str
    guard: Formula = TRUE
    resets: Tuple[Tuple[str, Term], ...] = ()
    location: Optional[SourceLocation] = field(default=None, compare=False)

    def reset(self, variable: str) -> Term:
        for name, term in self.resets:
            if name == variable:
                return term
        return coordinate(variable)


@dataclass(frozen=True)
class InitialCondition:
    mode: str
    predicate: Formula = TRUE
    location: Optional[SourceLocation] = field(default=None, compare=False)


@dataclass(frozen=True)
class HybridAutomaton:
    name: str
    variables: Tuple[str, ...]
    modes: Tuple[Mode, ...]
    transitions: Tuple[Transition, ...] = ()
    init: Tuple[InitialCondition, ...] = ()

    def __repr__(self):
        return (f"HybridAutomaton({self.name}, vars={len(self.variables)}, "
                f"modes={len(self.modes)}, edges={len(self.transitions)})")

    @property
    def mode_names(self) -> Tuple[str, ...]:
        return tuple(mode.name for mode in self.modes)

    @property
    def coordinates(self) -> Tuple[Var, ...]:
        return tuple(coordinate(name) for name in self.variables)

    @property
    def dimension(self) -> int:
        return len(self.variables)

    def mode(self, name: str) -> Optional[Mode]:
        for mode in self.modes:
            if mode.name == name:
                return mode
        return None

    @property
    def edges(self) -> List[Tuple[str, str]]:
        seen: List[Tuple[str, str]] = []
        for transition in self.transitions:
            pair = (transition.source, transition.target)
            if pair not in seen:
                seen.append(pair)
        return seen

    def transitions_between(self, source: str, target: str) -> List[Transition]:
        return [tr for tr in self.transitions if tr.source == source and tr.target == target]

    def bind(self, point: Tuple[Fraction, ...]) -> Dict[Var, Term]:
        """Coordinate variables bound to the values of a point"""
        return {var: Num(value) for var, value in zip(self.coordinates, point)}

    def flow_at(self, mode: str, point: Tuple[Fraction, ...], elapsed) -> Tuple[Term, ...]:
        """Flow terms of every coordinate from point after elapsed time, unsimplified"""
        binding = self.bind(point)
        binding[TIME_VAR] = elapsed if isinstance(elapsed, Term) else Num(Fraction(elapsed))
        current = self.mode(mode)
        return tuple(substitute_many(current.flow(name), binding) for name in self.variables)


@dataclass(frozen=True)
class TrajectoryElement:
    """⟨Δ, q, ν⟩ with ν given by its initial point and the flow of q; duration None is ∞"""
    duration: Optional[Fraction]
    mode: str
    start: Tuple[Fraction, ...]

    @property
    def is_unbounded(self) -> bool:
        return self.duration is None

    def to_record(self, index: int, variables: Tuple[str, ...]) -> dict:
        return {
            "kind": "trajectory-element",
            "index": index,
            "duration": "inf" if self.duration is None else format_rational(self.duration),
            "mode": self.mode,
            "start": {name: format_rational(value) for name, value in zip(variables, self.start)},
        }


@dataclass(frozen=True)
class Trajectory:
    elements: Tuple[TrajectoryElement, ...]

    def __len__(self):
        return len(self.elements)

    @property
    def total_duration(self) -> Optional[Fraction]:
        total = Fraction(0)
        for element in self.elements:
            if element.duration is None:
                return None
            total += element.duration
        return total


@dataclass(frozen=True)
class TrajectoryCheck:
    """Outcome of checking a trajectory; condition is one of a..e when violated"""
    ok: bool
    condition: Optional[str] = None
    index: Optional[int] = None
    message: str = ""
    instant: Optional[str] = None

    def __bool__(self):
        return self.ok

    def to_record(self) -> dict:
        record = {"kind": "trajectory-check", "ok": self.ok}
        if not self.ok:
            record.update(condition=self.condition, index=self.index, message=self.message)
            if self.instant is not None:
                record["instant"] = self.instant
        return record
