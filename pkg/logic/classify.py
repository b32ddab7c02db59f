"""
Uniformity and regressability of formulas.
"""

from typing import Iterable, List, Optional

from logic.formulas import (
    ATOMS, QUANTIFIERS, Eq, Formula, Poss, RelAtom, SitPrec, atom_terms, formula_children,
    iter_atoms,
)
from logic.sorts import SITUATION
from logic.substitution import mentions
from logic.terms import (
    Action, Do, Fluent, InitSit, Start, TFluent, Term, Var, is_ground_term, term_children,
)


def situation_terms(node) -> List[Term]:
    """Maximal situation terms, in order of occurrence"""
    found: List[Term] = []
    _collect_situations(node, found)
    return found


def _collect_situations(node, found: List[Term]) -> None:
    if isinstance(node, Term):
        if node.sort == SITUATION:
            found.append(node)
            return
        for child in term_children(node):
            _collect_situations(child, found)
        return
    if isinstance(node, ATOMS):
        for term in atom_terms(node):
            _collect_situations(term, found)
        return
    for child in formula_children(node):
        _collect_situations(child, found)


def _has_situation_structure(phi: Formula) -> bool:
    """Poss, ordering, situation equality or a situation quantifier"""
    if isinstance(phi, (Poss, SitPrec)):
        return True
    if isinstance(phi, Eq) and phi.left.sort == SITUATION:
        return True
    if isinstance(phi, QUANTIFIERS) and phi.var.sort == SITUATION:
        return True
    return any(_has_situation_structure(child) for child in formula_children(phi))


def is_uniform_in(phi, sit: Term) -> bool:
    """
    True iff phi mentions no Poss, no situation ordering or equality, no
    situation quantifier, and no situation term other than sit.
    """
    if isinstance(phi, Formula) and _has_situation_structure(phi):
        return False
    return all(term == sit for term in situation_terms(phi))


def is_ground_situation(sit: Term) -> bool:
    """A do-chain of ground actions rooted at S0"""
    while isinstance(sit, Do):
        if not isinstance(sit.action, Action) or not is_ground_term(sit.action):
            return False
        sit = sit.sit
    return isinstance(sit, InitSit)


def is_regressable(phi: Formula, actions: Optional[Iterable[str]] = None) -> bool:
    """
    True iff every situation term is a ground do-chain rooted at S0, no
    situation ordering, equality or quantifier occurs, and every Poss atom
    is applied to an action term with a known functor.
    """
    known = set(actions) if actions is not None else None
    if not _regressable_structure(phi, known):
        return False
    return all(is_ground_situation(term) for term in situation_terms(phi))


def _regressable_structure(phi: Formula, known) -> bool:
    if isinstance(phi, SitPrec):
        return False
    if isinstance(phi, Eq) and phi.left.sort == SITUATION:
        return False
    if isinstance(phi, QUANTIFIERS) and phi.var.sort == SITUATION:
        return False
    if isinstance(phi, Poss):
        if not isinstance(phi.action, Action):
            return False
        if known is not None and phi.action.functor not in known:
            return False
    return all(_regressable_structure(child, known) for child in formula_children(phi))


def mentions_temporal_fluent(node) -> bool:
    return mentions(node, lambda sub: isinstance(sub, TFluent))


def mentions_fluent(node) -> bool:
    if mentions(node, lambda sub: isinstance(sub, (Fluent, TFluent))):
        return True
    return isinstance(node, Formula) and any(isinstance(a, RelAtom) for a in iter_atoms(node))


def mentions_start_of_do(node) -> bool:
    return mentions(node, lambda sub: isinstance(sub, Start) and isinstance(sub.sit, Do))


def free_situation_variables(phi) -> List[Var]:
    return [term for term in situation_terms(phi) if isinstance(term, Var)]
