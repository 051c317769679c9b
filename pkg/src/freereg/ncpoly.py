"""Noncommutative polynomials with exact complex-rational coefficients.

A polynomial in ``n`` self-adjoint indeterminates ``X_1..X_n`` is stored as a
map from words (tuples of 1-based letter indices) to coefficients.  Terms are
kept in canonical order: by degree, then lexicographically on the letters.
Values are immutable; every operation returns a new polynomial.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Iterator, Mapping

from .scalar import ONE, ZERO, Scalar, as_scalar, format_fraction, parse_fraction

__all__ = [
    "Word",
    "NEG_INF",
    "NcPoly",
    "VariableCountMismatch",
    "word_key",
    "add",
    "mul",
    "adjoint",
    "degree",
    "degree_in",
    "homogeneous_part",
    "norm_R",
    "is_self_adjoint",
]

Word = tuple[int, ...]

#: degree of the zero polynomial
NEG_INF = -math.inf


class VariableCountMismatch(ValueError):
    pass


def word_key(w: Word) -> tuple[int, Word]:
    return (len(w), w)


def _check_word(w, n: int) -> Word:
    w = tuple(int(x) for x in w)
    for letter in w:
        if not 1 <= letter <= n:
            raise ValueError(f"letter {letter} outside 1..{n} in word {w}")
    return w


class NcPoly:
    """Element of C<X_1, ..., X_n>.

    Coefficients are :class:`Scalar` (exact) or ``complex`` (float path, e.g.
    the output of ``phi_t``).
    """

    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, n: int, terms: Mapping[Iterable[int], object] | None = None):
        if n < 1:
            raise ValueError(f"variable count must be >= 1, got {n}")
        acc: dict[Word, object] = {}
        for w, c in (terms or {}).items():
            w = _check_word(w, n)
            c = as_scalar(c)
            acc[w] = acc[w] + c if w in acc else c
        self.n = n
        self._terms = _canonical(acc)
        self._hash = None

    @classmethod
    def _from_accum(cls, n: int, acc: dict) -> "NcPoly":
        # trusted fast path: words already validated, coefficients normalized
        p = object.__new__(cls)
        p.n = n
        p._terms = _canonical(acc)
        p._hash = None
        return p

    # constructors -----------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "NcPoly":
        return cls(n)

    @classmethod
    def const(cls, c, n: int) -> "NcPoly":
        return cls(n, {(): c})

    @classmethod
    def one(cls, n: int) -> "NcPoly":
        return cls(n, {(): ONE})

    @classmethod
    def var(cls, i: int, n: int) -> "NcPoly":
        return cls(n, {(i,): ONE})

    @classmethod
    def monomial(cls, word: Iterable[int], n: int, c=ONE) -> "NcPoly":
        return cls(n, {tuple(word): c})

    # access -----------------------------------------------------------------
    def terms(self) -> Iterator[tuple[Word, object]]:
        return iter(self._terms.items())

    def words(self) -> Iterator[Word]:
        return iter(self._terms)

    def coeff(self, word: Iterable[int]):
        return self._terms.get(tuple(word), ZERO)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, Scalar) for c in self._terms.values())

    def is_constant(self) -> bool:
        return all(not w for w in self._terms)

    # ring structure ---------------------------------------------------------
    def _check(self, other: "NcPoly") -> None:
        if self.n != other.n:
            raise VariableCountMismatch(f"variable counts differ: {self.n} vs {other.n}")

    def _lift(self, other) -> "NcPoly | None":
        if isinstance(other, NcPoly):
            self._check(other)
            return other
        try:
            return NcPoly.const(other, self.n)
        except TypeError:
            return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        acc = dict(self._terms)
        for w, c in o._terms.items():
            acc[w] = acc[w] + c if w in acc else c
        return NcPoly._from_accum(self.n, acc)

    __radd__ = __add__

    def __neg__(self) -> "NcPoly":
        return NcPoly._from_accum(self.n, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def scale(self, c) -> "NcPoly":
        c = as_scalar(c)
        return NcPoly._from_accum(self.n, {w: c * a for w, a in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, NcPoly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self._check(other)
        acc: dict[Word, object] = {}
        for w1, c1 in self._terms.items():
            for w2, c2 in other._terms.items():
                w = w1 + w2
                c = c1 * c2
                acc[w] = acc[w] + c if w in acc else c
        return NcPoly._from_accum(self.n, acc)

    def __rmul__(self, other):
        try:
            c = as_scalar(other)
        except TypeError:
            return NotImplemented
        return NcPoly._from_accum(self.n, {w: c * a for w, a in self._terms.items()})

    def __pow__(self, k: int) -> "NcPoly":
        if not isinstance(k, int) or k < 0:
            raise ValueError(f"exponent must be a nonnegative integer, got {k!r}")
        out = NcPoly.one(self.n)
        for _ in range(k):
            out = out * self
        return out

    # structure --------------------------------------------------------------
    def adjoint(self) -> "NcPoly":
        return NcPoly._from_accum(
            self.n, {w[::-1]: c.conjugate() for w, c in self._terms.items()}
        )

    def is_self_adjoint(self) -> bool:
        return self.adjoint() == self

    def degree(self) -> int | float:
        if not self._terms:
            return NEG_INF
        # canonical order puts the longest word last
        return len(next(reversed(self._terms)))

    def degree_in(self, i: int) -> int | float:
        if not 1 <= i <= self.n:
            raise IndexError(f"variable index {i} outside 1..{self.n}")
        if not self._terms:
            return NEG_INF
        return max(w.count(i) for w in self._terms)

    def letters(self) -> set[int]:
        return {x for w in self._terms for x in w}

    def homogeneous_part(self, m: int) -> "NcPoly":
        if m < 0:
            raise ValueError(f"degree must be >= 0, got {m}")
        return NcPoly._from_accum(
            self.n, {w: c for w, c in self._terms.items() if len(w) == m}
        )

    def norm_R(self, R: float) -> float:
        if not R > 0:
            raise ValueError(f"R must be positive, got {R}")
        return math.fsum(abs(c) * R ** len(w) for w, c in self._terms.items())

    def map_coefficients(self, f) -> "NcPoly":
        return NcPoly._from_accum(
            self.n, {w: as_scalar(f(w, c)) for w, c in self._terms.items()}
        )

    def with_n(self, n: int) -> "NcPoly":
        """Same polynomial viewed in a ring with ``n`` variables."""
        return NcPoly(n, self._terms)

    # equality ---------------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, NcPoly):
            return self.n == other.n and self._terms == other._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, tuple(self._terms.items())))
        return self._hash

    def allclose(self, other: "NcPoly", tol: float = 1e-12) -> bool:
        """Coefficientwise comparison with absolute tolerance (float path)."""
        self._check(other)
        keys = set(self._terms) | set(other._terms)
        return all(
            abs(complex(self._terms.get(w, 0)) - complex(other._terms.get(w, 0))) <= tol
            for w in keys
        )

    def round_exact(self, tol: float = 1e-9, max_denominator: int = 10**6) -> "NcPoly":
        """Snap float coefficients to nearby rationals.

        Raises ``ArithmeticError`` when a coefficient is further than ``tol``
        from every rational with denominator ``<= max_denominator``.
        """
        acc = {}
        for w, c in self._terms.items():
            if isinstance(c, Scalar):
                acc[w] = c
                continue
            s = Scalar.nearest(c, max_denominator)
            if abs(complex(s) - c) > tol:
                raise ArithmeticError(
                    f"coefficient {c!r} of word {w} is not within {tol} of a rational"
                )
            if abs(c) <= tol and s:
                s = ZERO
            acc[w] = s
        return NcPoly._from_accum(self.n, acc)

    # serialization ----------------------------------------------------------
    def to_dict(self) -> dict:
        return {"n": self.n, "terms": [_term_dict({"word": list(w)}, c) for w, c in self.terms()]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "NcPoly":
        terms: dict[Word, object] = {}
        for t in d["terms"]:
            w = tuple(t["word"])
            if w in terms:
                raise ValueError(f"duplicate word {w} in serialized polynomial")
            terms[w] = _term_coeff(t)
        return cls(int(d["n"]), terms)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "NcPoly":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        from .parser import format_poly

        return f"NcPoly(n={self.n}, {format_poly(self)!r})"

    def __str__(self) -> str:
        from .parser import format_poly

        return format_poly(self)


def _canonical(acc: dict) -> dict:
    return {w: acc[w] for w in sorted(acc, key=word_key) if acc[w] != 0}


def _term_dict(base: dict, c) -> dict:
    if isinstance(c, Scalar):
        base["re"] = format_fraction(c.re)
        base["im"] = format_fraction(c.im)
    else:
        base["re"] = c.real
        base["im"] = c.imag
    return base


def _term_coeff(t: Mapping):
    re, im = t.get("re", "0"), t.get("im", "0")
    if isinstance(re, str) and isinstance(im, str):
        return Scalar(parse_fraction(re), parse_fraction(im))
    if isinstance(re, int) and isinstance(im, int):
        return Scalar(re, im)
    return complex(float(re), float(im))


# functional spellings -------------------------------------------------------

def add(P: NcPoly, Q: NcPoly) -> NcPoly:
    P._check(Q)
    return P + Q


def mul(P: NcPoly, Q: NcPoly) -> NcPoly:
    P._check(Q)
    return P * Q


def adjoint(P: NcPoly) -> NcPoly:
    return P.adjoint()


def degree(P: NcPoly) -> int | float:
    return P.degree()


def degree_in(P: NcPoly, i: int) -> int | float:
    return P.degree_in(i)


def homogeneous_part(P: NcPoly, m: int) -> NcPoly:
    return P.homogeneous_part(m)


def norm_R(P: NcPoly, R: float) -> float:
    return P.norm_R(R)


def is_self_adjoint(P: NcPoly) -> bool:
    return P.is_self_adjoint()
