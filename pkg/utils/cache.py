from cachetools import TTLCache
from fractions import Fraction
from typing import Any, Optional
import hashlib
import json
import threading


def format_rational(value: Fraction) -> str:
    """
    Format an exact rational for output.

    Args:
        value: Rational value to format

    Returns:
        Integer or p/q string, never a decimal

    Examples:
        format_rational(Fraction(70)) -> "70"
        format_rational(Fraction(1, 2)) -> "1/2"
        format_rational(Fraction(-3, 2)) -> "-3/2"
    """
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class ResultCache:
    """
    Bounded TTL store shared by the service and its regression engines.

    Holds parsed theories, compiled theories with their regression memo, and
    the memo entries themselves. Guarded by a lock since batch workers share
    one memo per theory.
    """

    def __init__(self, maxsize: int = 1000, ttl: int = 600):
        self.cache = TTLCache(maxsize=maxsize, ttl=ttl)
        self._lock = threading.Lock()

    def get(self, key: str) -> Optional[Any]:
        with self._lock:
            return self.cache.get(key)

    def set(self, key: str, value: Any) -> None:
        with self._lock:
            self.cache[key] = value

    def make_key(self, *args) -> str:
        """
        Digest of the arguments, rendered with str when not JSON-native.

        Examples:
            make_key("term", "que(I, in1, 3, S0)", "S0", True)
        """
        key_str = json.dumps(args, sort_keys=True, default=str)
        return hashlib.md5(key_str.encode()).hexdigest()

    def __len__(self) -> int:
        with self._lock:
            return len(self.cache)
