"""
Free variables, capture-avoiding substitution and term replacement.
"""

from typing import Dict, FrozenSet, Iterable, Mapping, Set, Union

from exceptions import SortError
from logic.formulas import (
    ATOMS, QUANTIFIERS, And, Exists, Forall, Formula, Iff, Implies, Not, Or,
    atom_terms, rebuild_atom,
)
from logic.terms import Term, Var, iter_subterms, rebuild_term, term_children

Node = Union[Term, Formula]


def free_vars(node: Node) -> FrozenSet[Var]:
    if isinstance(node, Term):
        return frozenset(sub for sub in iter_subterms(node) if isinstance(sub, Var))
    if isinstance(node, ATOMS):
        found = set()
        for term in atom_terms(node):
            found |= free_vars(term)
        return frozenset(found)
    if isinstance(node, QUANTIFIERS):
        return free_vars(node.body) - {node.var}
    found = set()
    for child in _children(node):
        found |= free_vars(child)
    return frozenset(found)


def var_names(node: Node) -> Set[str]:
    """Names of all variables, free or bound"""
    if isinstance(node, Term):
        return {sub.name for sub in iter_subterms(node) if isinstance(sub, Var)}
    if isinstance(node, ATOMS):
        names = set()
        for term in atom_terms(node):
            names |= var_names(term)
        return names
    names = {node.var.name} if isinstance(node, QUANTIFIERS) else set()
    for child in _children(node):
        names |= var_names(child)
    return names


def fresh_var(base: Var, avoid: Iterable[str]) -> Var:
    """base with primes appended until the name is unused"""
    avoid = set(avoid)
    name = base.name
    while name in avoid:
        name += "'"
    return Var(name, base.sort)


def substitute(phi: Node, var: Var, term: Term) -> Node:
    """Capture-avoiding replacement of every free occurrence of var by term"""
    if var.sort != term.sort:
        raise SortError(f"cannot substitute {term} ({term.sort}) for {var.name} ({var.sort})")
    return substitute_many(phi, {var: term})


def substitute_many(phi: Node, mapping: Mapping[Var, Term]) -> Node:
    for var, term in mapping.items():
        if var.sort != term.sort:
            raise SortError(f"cannot substitute {term} ({term.sort}) for {var.name} ({var.sort})")
    if not mapping:
        return phi
    return _subst(phi, dict(mapping))


def _subst(node: Node, mapping: Dict[Var, Term]) -> Node:
    if isinstance(node, Term):
        if isinstance(node, Var):
            return mapping.get(node, node)
        children = term_children(node)
        if not children:
            return node
        return rebuild_term(node, (_subst(child, mapping) for child in children))
    if isinstance(node, ATOMS):
        terms = atom_terms(node)
        return rebuild_atom(node, (_subst(term, mapping) for term in terms)) if terms else node
    if isinstance(node, QUANTIFIERS):
        inner = {v: t for v, t in mapping.items() if v != node.var}
        if not inner:
            return node
        body_free = free_vars(node.body)
        inner = {v: t for v, t in inner.items() if v in body_free}
        if not inner:
            return node
        incoming = set()
        for term in inner.values():
            incoming |= {v.name for v in free_vars(term)}
        var = node.var
        body = node.body
        if var.name in incoming:
            avoid = incoming | var_names(body) | {v.name for v in inner}
            renamed = fresh_var(var, avoid)
            body = _subst(body, {var: renamed})
            var = renamed
        return type(node)(var, _subst(body, inner))
    return _rebuild(node, (_subst(child, mapping) for child in _children(node)))


def replace_term(phi: Node, old: Term, new: Term) -> Node:
    """
    Replace every occurrence of the term old by new (written A|^old_new).

    Occurrences under a binder of one of old's variables are left alone;
    binders that would capture a variable of new are renamed.
    """
    if old == new:
        return phi
    return _replace(phi, old, new, free_vars(old), free_vars(new))


def _replace(node: Node, old: Term, new: Term, old_vars, new_vars) -> Node:
    if isinstance(node, Term):
        if node == old:
            return new
        children = term_children(node)
        if not children:
            return node
        return rebuild_term(node, (_replace(c, old, new, old_vars, new_vars) for c in children))
    if isinstance(node, ATOMS):
        terms = atom_terms(node)
        if not terms:
            return node
        return rebuild_atom(node, (_replace(t, old, new, old_vars, new_vars) for t in terms))
    if isinstance(node, QUANTIFIERS):
        if node.var in old_vars:
            return node
        var = node.var
        body = node.body
        if var in new_vars:
            renamed = fresh_var(var, var_names(body) | {v.name for v in new_vars} | {v.name for v in old_vars})
            body = _subst(body, {var: renamed})
            var = renamed
        return type(node)(var, _replace(body, old, new, old_vars, new_vars))
    return _rebuild(node, (_replace(c, old, new, old_vars, new_vars) for c in _children(node)))


def rename_bound(phi: Formula, avoid: Iterable[str]) -> Formula:
    """Rename every bound variable away from avoid and from each other"""
    used = set(avoid)
    return _rename(phi, used)


def _rename(node: Formula, used: Set[str]) -> Formula:
    if isinstance(node, ATOMS):
        return node
    if isinstance(node, QUANTIFIERS):
        var = node.var
        body = node.body
        if var.name in used:
            renamed = fresh_var(var, used | var_names(body))
            body = _subst(body, {var: renamed})
            var = renamed
        used.add(var.name)
        return type(node)(var, _rename(body, used))
    return _rebuild(node, (_rename(child, used) for child in _children(node)))


def _children(phi: Formula):
    if isinstance(phi, Not):
        return (phi.body,)
    if isinstance(phi, (And, Or)):
        return phi.parts
    if isinstance(phi, (Implies, Iff)):
        return (phi.left, phi.right)
    return ()


def _rebuild(phi: Formula, children) -> Formula:
    children = tuple(children)
    if isinstance(phi, Not):
        return Not(children[0])
    if isinstance(phi, (And, Or)):
        return type(phi)(children)
    if isinstance(phi, (Implies, Iff)):
        return type(phi)(children[0], children[1])
    return phi


def map_formula(phi: Formula, fn) -> Formula:
    """Rebuild phi bottom-up with fn applied to every atom"""
    if isinstance(phi, ATOMS):
        return fn(phi)
    if isinstance(phi, QUANTIFIERS):
        return type(phi)(phi.var, map_formula(phi.body, fn))
    return _rebuild(phi, (map_formula(child, fn) for child in _children(phi)))


def mentions(node: Node, predicate) -> bool:
    """True iff some subterm satisfies predicate"""
    if isinstance(node, Term):
        return any(predicate(sub) for sub in iter_subterms(node))
    if isinstance(node, ATOMS):
        return any(mentions(term, predicate) for term in atom_terms(node))
    if isinstance(node, QUANTIFIERS):
        return mentions(node.body, predicate)
    return any(mentions(child, predicate) for child in _children(node))
