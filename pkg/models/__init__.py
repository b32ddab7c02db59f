"""Domain models: theories, hybrid automata and reasoning results"""

from .hybrid import HybridAutomaton, Mode, Trajectory, TrajectoryElement, Transition
from .reports import DiagnosisReport, RegressionTrace, ThresholdResult, TimedValuation
from .theory import Diagnostic, Severity, TemporalBAT, TemporalChangeAxiom

__all__ = [
    'Diagnostic', 'DiagnosisReport', 'HybridAutomaton', 'Mode', 'RegressionTrace', 'Severity',
    'TemporalBAT', 'TemporalChangeAxiom', 'ThresholdResult', 'TimedValuation', 'Trajectory',
    'TrajectoryElement', 'Transition',
]
