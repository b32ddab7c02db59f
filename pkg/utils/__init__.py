"""Utility functions and classes"""

from .cache import ResultCache, format_rational

__all__ = ['ResultCache', 'format_rational']
