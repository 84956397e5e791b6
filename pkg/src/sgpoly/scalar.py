"""Scalar backends: exact rationals or fixed-precision binary floats.

Every numerical routine takes a :class:`Backend` and only ever combines
values produced by that backend, so the same code path runs in exact
arithmetic (``gmpy2.mpq``) or in extended precision (``mpmath`` contexts,
one per precision, so precision is never global state).  A precision of 53
bits maps onto the builtin ``float``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import gmpy2
import mpmath
from mpmath.libmp import from_rational

from .errors import DomainError

EXACT = "exact"
FLOAT = "float"
DEFAULT_PRECISION = 256


@functools.lru_cache(maxsize=None)
def _mp_context(precision: int) -> mpmath.MPContext:
    ctx = mpmath.MPContext()
    ctx.prec = precision
    return ctx


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"``, a decimal string or an int into an exact Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot parse {text!r} as a rational number") from exc


@dataclass(frozen=True)
class Backend:
    kind: str = EXACT
    precision: int = DEFAULT_PRECISION

    def __post_init__(self) -> None:
        if self.kind not in (EXACT, FLOAT):
            raise ValueError(f"unknown backend {self.kind!r}")
        if self.precision < 2:
            raise ValueError("precision must be at least 2 bits")

    @property
    def exact(self) -> bool:
        return self.kind == EXACT

    @property
    def native(self) -> bool:
        return self.kind == FLOAT and self.precision == 53

    @property
    def context(self) -> mpmath.MPContext:
        return _mp_context(self.precision)

    def __str__(self) -> str:
        return EXACT if self.exact else f"float{self.precision}"

    def __call__(self, value: Any) -> Any:
        """Convert ``value`` into this backend.

        Exact inputs (int, Fraction, mpq, "p/q" strings) are accepted by
        both backends; binary floats may only enter the float backend.
        """
        if isinstance(value, str):
            value = parse_rational(value)
        if self.exact:
            if isinstance(value, (float, mpmath.mpf)) or type(value).__name__ == "mpf":
                raise TypeError("float to exact conversion is not allowed")
            if isinstance(value, type(gmpy2.mpq())):
                return value
            if isinstance(value, (int, Fraction)) or hasattr(value, "denominator"):
                return gmpy2.mpq(value)
            raise TypeError(f"cannot convert {type(value).__name__} to an exact scalar")
        num, den = _as_ratio(value)
        if num is None:
            if self.native:
                return float(value)
            return self.context.mpf(value)
        if self.native:
            return float(Fraction(num, den))
        return self.context.make_mpf(from_rational(num, den, self.precision, "n"))

    @property
    def zero(self) -> Any:
        return self(0)

    @property
    def one(self) -> Any:
        return self(1)

    def sqrt(self, x: Any) -> Any:
        if self.exact:
            raise TypeError("sqrt is not available in the exact backend")
        if self.native:
            return float(mpmath.sqrt(x))
        return self.context.sqrt(x)

    def to_float(self, x: Any) -> float:
        return float(x)

    def is_zero(self, x: Any) -> bool:
        return x == 0

    def format(self, x: Any) -> str:
        """Render a scalar: ``p/q`` when exact, shortest round-trip decimal otherwise."""
        if self.exact:
            q = gmpy2.mpq(x)
            return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
        if self.native:
            return repr(float(x))
        return shortest_decimal(x, self.context)


def _as_ratio(value: Any) -> tuple[int | None, int]:
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, int):
        return value, 1
    if isinstance(value, Fraction):
        return value.numerator, value.denominator
    if isinstance(value, type(gmpy2.mpq())):
        return int(value.numerator), int(value.denominator)
    return None, 1


def pack(value: Any) -> Any:
    """Make scalars from per-precision mpmath contexts picklable; lists and tuples recurse."""
    if isinstance(value, (list, tuple)):
        return type(value)(pack(v) for v in value)
    if type(value).__name__ == "mpf":
        return ("__mpf__", value._mpf_, value.context.prec)
    return value


def unpack(value: Any) -> Any:
    if isinstance(value, tuple) and len(value) == 3 and value[0] == "__mpf__":
        return _mp_context(value[2]).make_mpf(value[1])
    if isinstance(value, (list, tuple)):
        return type(value)(unpack(v) for v in value)
    return value


def shortest_decimal(x: Any, ctx: mpmath.MPContext) -> str:
    """Fewest significant digits that round-trip back to ``x`` at ``ctx.prec``."""
    x = ctx.mpf(x)
    if x == 0:
        return "0"
    if not ctx.isfinite(x):
        return str(x)
    limit = int(ctx.prec * 0.30103) + 3
    for digits in range(1, limit + 1):
        text = mpmath.libmp.to_str(x._mpf_, digits, strip_zeros=True)
        if ctx.mpf(text) == x:
            return text
    return mpmath.libmp.to_str(x._mpf_, limit)


EXACT_BACKEND = Backend(EXACT)
