"""
Theories and compiled axioms printed back in .tbat syntax.

print_theory output re-parses to an equal TemporalBAT.
"""

from typing import List

from logic.formulas import TRUE, Iff
from logic.render import render
from logic.sorts import Sort
from logic.terms import Num
from models.theory import (
    EffectCase, Fact, FluentKind, InitSSA, StateEvolutionAxiom, TemporalBAT,
)

INDENT = "    "


def _sorts(sorts) -> str:
    return ", ".join(str(sort) for sort in sorts)


def _signature(name: str, sorts, result: Sort = None, modifier: str = "") -> str:
    text = f"{modifier} " if modifier else ""
    text += f"{name}({_sorts(sorts)})"
    return f"{text} : {result}" if result is not None else text


def _head(name: str, params) -> str:
    return f"{name}({', '.join(render(p) for p in params)})"


def format_section(name: str, items: List[str]) -> List[str]:
    if not items:
        return []
    return [f"{name} {{"] + [f"{INDENT}{item};" for item in items] + ["}", ""]


def format_fact(fact: Fact) -> str:
    args = ["_" if arg is None else render(arg) for arg in fact.args]
    if isinstance(fact.value, bool):
        return ("" if fact.value else "!") + f"{fact.functor}({', '.join(args)})"
    return f"{fact.functor}({', '.join(args)}) = {render(fact.value)}"


def _initial_fact(theory: TemporalBAT, fact: Fact) -> str:
    """Facts about fluents carry the S0 argument"""
    if fact.functor in theory.fluents:
        args = ["_" if arg is None else render(arg) for arg in fact.args] + ["S0"]
        call = f"{fact.functor}({', '.join(args)})"
        if isinstance(fact.value, bool):
            return call if fact.value else f"!{call}"
        return f"{call} = {render(fact.value)}"
    return format_fact(fact)


def format_effect(fluent: str, params, case: EffectCase) -> str:
    text = f"{_head(fluent, params)}: on {render(case.pattern)}"
    if case.guard != TRUE:
        text += f" when ({render(case.guard)})"
    return f"{text} -> {render(case.value)}"


def print_theory(theory: TemporalBAT) -> str:
    """Source text of a parsed theory; compiled axioms are not included"""
    lines: List[str] = []
    if theory.name:
        lines += [f"theory {theory.name};", ""]
    lines += format_section("sorts", [f"{name} = {{{', '.join(constants)}}}"
                                for name, constants in theory.sorts.items()])

    statics = [_signature(decl.name, decl.arg_sorts, decl.result_sort)
               for decl in theory.statics.values()]
    for clauses in theory.static_clauses.values():
        statics += [f"{_head(c.functor, c.params)} := {render(c.body)}" for c in clauses]
    lines += format_section("statics", statics)

    lines += format_section("actions", [_signature(decl.functor, decl.arg_sorts,
                                             modifier="natural" if decl.natural else "")
                                  for decl in theory.actions.values()])
    fluents = []
    for decl in theory.fluents.values():
        if decl.kind is FluentKind.INIT:
            continue
        if decl.kind is FluentKind.TEMPORAL:
            fluents.append(_signature(decl.name, decl.arg_sorts, modifier="temporal"))
        else:
            fluents.append(_signature(decl.name, decl.arg_sorts, decl.result_sort))
    lines += format_section("fluents", fluents)

    lines += format_section("poss", [
        f"{_head(axiom.action.functor, axiom.action.args + (axiom.action.time,))}: "
        f"{render(axiom.body)}"
        for axiom in theory.poss.values()])
    lines += format_section("ssa", [render(Iff(axiom.head(), axiom.body))
                              for axiom in theory.ssas.values()])
    effects = []
    for spec in theory.effects.values():
        effects += [format_effect(spec.fluent, spec.params, case) for case in spec.cases]
    lines += format_section("init-ssa", effects)
    tcas = []
    for group in theory.tcas.values():
        tcas += [f"{_head(tca.fluent, tca.params)}: {render(tca.context)} => {render(tca.law)}"
                 for tca in group]
    lines += format_section("tca", tcas)

    initial = []
    if theory.initial.start is not None:
        initial.append(f"start(S0) = {render(Num(theory.initial.start))}")
    initial += [_initial_fact(theory, fact) for fact in theory.initial.facts]
    lines += format_section("init", initial)
    lines += format_section("constraints", [render(c.formula) for c in theory.constraints])
    return "\n".join(lines).rstrip() + "\n"


def format_sea(sea: StateEvolutionAxiom) -> str:
    """Compiled SEA, one disjunct per line, frame branch last"""
    branches = [f"({render(branch)})" for branch in sea.branch_formulas()]
    return f"{render(sea.head())} <->\n{INDENT}" + f"\n{INDENT}| ".join(branches)


def format_init_ssa(axiom: InitSSA) -> str:
    ssa = axiom.as_successor_state_axiom()
    branches = [f"({render(part)})" for part in
                [axiom.case_formula(case) for case in axiom.cases] + [axiom.default_formula()]]
    return f"{render(ssa.head())} <->\n{INDENT}" + f"\n{INDENT}| ".join(branches)


def print_compiled(theory: TemporalBAT) -> str:
    """State evolution axioms and init-SSAs of a compiled theory"""
    blocks = []
    for name, sea in theory.seas.items():
        blocks.append(f"// state evolution axiom for {name}\n{format_sea(sea)};")
    for name, axiom in theory.init_ssas.items():
        blocks.append(f"// successor state axiom for {name}\n{format_init_ssa(axiom)};")
    return "\n\n".join(blocks) + ("\n" if blocks else "")
