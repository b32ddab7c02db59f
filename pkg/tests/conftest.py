"""
Shared fixtures: sample theories and automata, the CLI runner and a
generator of small random theories.
"""

import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Tuple

import pytest
from click.testing import CliRunner

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from parsing.ha_parser import parse_automaton  # noqa: E402
from parsing.theory_parser import parse_theory  # noqa: E402
from services.reasoning_service import ReasoningService  # noqa: E402
from services.sea_compiler import compile_theory  # noqa: E402
from utils.cache import format_rational  # noqa: E402

SAMPLES = project_root / "samples"


@pytest.fixture(scope="session")
def samples() -> Path:
    return SAMPLES


@pytest.fixture(scope="session")
def traffic_text() -> str:
    return (SAMPLES / "traffic.tbat").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def traffic(traffic_text):
    return parse_theory(traffic_text)


@pytest.fixture(scope="session")
def traffic_compiled(traffic):
    compiled, diagnostics = compile_theory(traffic)
    assert not any(d.is_error for d in diagnostics)
    return compiled


@pytest.fixture(scope="session")
def falling_ball_text() -> str:
    return (SAMPLES / "falling_ball.tbat").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def falling_ball(falling_ball_text):
    return parse_theory(falling_ball_text)


@pytest.fixture(scope="session")
def bounce():
    return parse_automaton((SAMPLES / "bounce.ha").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def traffic_light():
    return parse_automaton((SAMPLES / "traffic_light.ha").read_text(encoding="utf-8"))


@pytest.fixture
def service() -> ReasoningService:
    return ReasoningService()


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


# ==== RANDOM THEORIES ====

def _coefficient(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-6, 6), rng.choice((1, 2)))


def _scaled(value: Fraction, term: str) -> str:
    """` + c * term` with the sign pulled out of the coefficient"""
    sign = "-" if value < 0 else "+"
    magnitude = abs(value)
    shown = format_rational(magnitude) if magnitude.denominator == 1 else f"({format_rational(magnitude)})"
    return f" {sign} {shown} * {term}"


def random_theory_text(rng: random.Random, name: str = "generated") -> str:
    """
    A stratified theory over one object sort with linear laws.

    Up to three objects, two relational fluents toggled by up to four
    actions, and up to three temporal fluents; a temporal fluent may follow
    the change of the one declared before it.
    """
    objects = [f"o{i + 1}" for i in range(rng.randint(1, 3))]
    actions = [f"act{i + 1}" for i in range(rng.randint(1, 4))]
    temporal = [f"f{i + 1}" for i in range(rng.randint(1, 3))]

    ssas = []
    for fluent in ("P1", "P2"):
        on, off = rng.choice(actions), rng.choice(actions)
        if on == off:
            ssas.append(f"{fluent}(x, do(a, s)) <-> a = {on}(x, _) | {fluent}(x, s)")
        else:
            ssas.append(f"{fluent}(x, do(a, s)) <-> a = {on}(x, _) | {fluent}(x, s) & a != {off}(x, _)")

    effects, tcas = [], []
    for index, fluent in enumerate(temporal):
        if rng.random() < 0.6:
            effects.append(f"{fluent}(x): on {rng.choice(actions)}(x, _) -> {rng.randint(-5, 5)}")
        contexts = rng.choice((["P1(x, s)", "!P1(x, s) & P2(x, s)"], ["P1(x, s)"], ["P2(x, s)"],
                               ["P1(x, s) & P2(x, s)", "!P2(x, s)"]))
        for context in contexts:
            law = f"y = {fluent}_init(x, s)" + _scaled(_coefficient(rng), "(t - start(s))")
            if index > 0 and rng.random() < 0.5:
                lower = temporal[index - 1]
                law += _scaled(_coefficient(rng), f"({lower}(x, t, s) - {lower}(x, start(s), s))")
            tcas.append(f"{fluent}(x): {context} => {law}")

    facts = ["start(S0) = 0"]
    for obj in objects:
        for fluent in ("P1", "P2"):
            if rng.random() < 0.5:
                facts.append(f"{fluent}({obj}, S0)")
        for fluent in temporal:
            facts.append(f"{fluent}_init({obj}, S0) = {rng.randint(-10, 10)}")

    def section(title: str, items: List[str]) -> str:
        if not items:
            return ""
        return title + " {\n" + "".join(f"    {item};\n" for item in items) + "}\n\n"

    return (f"theory {name};\n\n"
            + section("sorts", [f"Obj = {{{', '.join(objects)}}}"])
            + section("actions", [f"{action}(Obj)" for action in actions])
            + section("fluents", ["P1(Obj)", "P2(Obj)"] + [f"temporal {f}(Obj)" for f in temporal])
            + section("poss", [f"{action}(x, t): start(s) <= t" for action in actions])
            + section("ssa", ssas)
            + section("init-ssa", effects)
            + section("tca", tcas)
            + section("init", facts))


def random_narrative(rng: random.Random, theory, length: int) -> Tuple[str, Fraction]:
    """Narrative text over the theory's actions and objects, and its last start"""
    objects = theory.sorts["Obj"]
    now = Fraction(0)
    steps = []
    for _ in range(length):
        now += rng.choice((Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)))
        action = rng.choice(sorted(theory.actions))
        steps.append(f"{action}({rng.choice(objects)})@{format_rational(now)}")
    return "; ".join(steps), now


@pytest.fixture
def random_theories():
    """Factory of (text, parsed, compiled) random theories for a seed"""
    def build(seed: int, count: int):
        rng = random.Random(seed)
        for index in range(count):
            text = random_theory_text(rng, f"generated_{index}")
            theory = parse_theory(text)
            compiled, _ = compile_theory(theory)
            yield rng, text, compiled
    return build


@pytest.fixture
def narrative_of():
    return random_narrative
