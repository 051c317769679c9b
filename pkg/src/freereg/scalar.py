"""Exact complex-rational scalars.

A :class:`Scalar` is ``re + i*im`` with both parts held as
:class:`fractions.Fraction`.  Arithmetic with another ``Scalar`` (or an
``int``/``Fraction``) stays exact; mixing with ``float``/``complex`` degrades
to a Python ``complex``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

__all__ = ["Scalar", "ONE", "ZERO", "I", "as_scalar", "parse_fraction", "format_fraction"]


def parse_fraction(text: str) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or a decimal literal into a Fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational literal: {text!r}") from exc


def format_fraction(x: Fraction) -> str:
    # always "p/q", also for integers, so serialized files have one shape
    return f"{x.numerator}/{x.denominator}"


class Scalar:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    # construction helpers ---------------------------------------------------
    @classmethod
    def from_strings(cls, re: str, im: str = "0") -> "Scalar":
        return cls(parse_fraction(re), parse_fraction(im))

    @classmethod
    def nearest(cls, z: complex, max_denominator: int = 10**6) -> "Scalar":
        """Closest rational pair to a float complex, denominators bounded."""
        z = complex(z)
        return cls(
            Fraction(z.real).limit_denominator(max_denominator),
            Fraction(z.imag).limit_denominator(max_denominator),
        )

    # predicates -------------------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    @property
    def is_real(self) -> bool:
        return self.im == 0

    # arithmetic -------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Scalar):
            return other
        if isinstance(other, (int, Rational)):
            return Scalar(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) + other
            return NotImplemented
        return Scalar(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) - other
            return NotImplemented
        return Scalar(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return other - complex(self)
            return NotImplemented
        return Scalar(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) * other
            return NotImplemented
        if not self.im and not o.im:
            return Scalar(self.re * o.re)
        return Scalar(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (float, complex)):
                return complex(self) / other
            return NotImplemented
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("Scalar division by zero")
        return Scalar(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out, base = ONE, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __neg__(self):
        return Scalar(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    def __abs__(self) -> float:
        return math.hypot(float(self.re), float(self.im))

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # comparison / hashing ---------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, Scalar):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Rational)):
            return self.im == 0 and self.re == other
        if isinstance(other, (float, complex)):
            return complex(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    # conversion -------------------------------------------------------------
    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __float__(self) -> float:
        if self.im:
            raise TypeError(f"Scalar {self} is not real")
        return float(self.re)

    def __repr__(self) -> str:
        return f"Scalar({self})"

    def __str__(self) -> str:
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}*i"


ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)


def as_scalar(x) -> Scalar | complex:
    """Normalize a coefficient: exact inputs become Scalar, floats become complex."""
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Rational)):
        return Scalar(x)
    if isinstance(x, (float, complex)):
        return complex(x)
    raise TypeError(f"unsupported coefficient type: {type(x).__name__}")
