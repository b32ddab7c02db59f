"""Sorted terms and formulas of the temporal situation calculus"""

from .classify import is_regressable, is_uniform_in
from .formulas import Formula
from .render import render
from .simplify import UnaContext, simplify
from .sorts import ACTION, REAL, SITUATION, Sort
from .substitution import free_vars, substitute
from .terms import S0, Term

__all__ = [
    'ACTION', 'REAL', 'SITUATION', 'S0', 'Formula', 'Sort', 'Term', 'UnaContext',
    'free_vars', 'is_regressable', 'is_uniform_in', 'render', 'simplify', 'substitute',
]
