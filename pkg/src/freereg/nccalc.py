"""Difference-quotient calculus on noncommutative polynomials.

``diff(P, j)`` is the derivation into the tensor square determined by
``diff(X_i, j) = [i == j] 1 (x) 1``.  The tensor square carries the bimodule
structure ``(u (x) v) # (a (x) b) = ua (x) bv`` and acts on the algebra by
``(a (x) b) # Q = a Q b``.
"""

from __future__ import annotations

import cmath
import json
import math
from typing import Iterator, Mapping

from .ncpoly import NEG_INF, NcPoly, VariableCountMismatch, Word, _check_word, _term_coeff, _term_dict
from .scalar import ZERO, as_scalar

__all__ = [
    "TensorPoly",
    "diff",
    "sharp",
    "flip",
    "number_op",
    "number_op_i",
    "phi_t",
    "fourier_extract",
    "hochschild_defect",
    "delta_reduce",
    "leibniz_defect",
]

Pair = tuple[Word, Word]


def _pair_key(p: Pair):
    a, b = p
    return (len(a) + len(b), a, b)


def _canonical(acc: dict) -> dict:
    return {p: acc[p] for p in sorted(acc, key=_pair_key) if acc[p] != 0}


def _accumulate(acc: dict, key, c) -> None:
    if key in acc:
        acc[key] = acc[key] + c
    else:
        acc[key] = c


class TensorPoly:
    """Element of C<X> (x) C<X>: coefficients on pairs of words."""

    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, n: int, terms: Mapping[tuple, object] | None = None):
        if n < 1:
            raise ValueError(f"variable count must be >= 1, got {n}")
        acc: dict[Pair, object] = {}
        for (a, b), c in (terms or {}).items():
            _accumulate(acc, (_check_word(a, n), _check_word(b, n)), as_scalar(c))
        self.n = n
        self._terms = _canonical(acc)
        self._hash = None

    @classmethod
    def _from_accum(cls, n: int, acc: dict) -> "TensorPoly":
        t = object.__new__(cls)
        t.n = n
        t._terms = _canonical(acc)
        t._hash = None
        return t

    @classmethod
    def zero(cls, n: int) -> "TensorPoly":
        return cls(n)

    @classmethod
    def simple(cls, a: NcPoly, b: NcPoly) -> "TensorPoly":
        """The elementary tensor ``a (x) b``."""
        if a.n != b.n:
            raise VariableCountMismatch(f"variable counts differ: {a.n} vs {b.n}")
        acc: dict[Pair, object] = {}
        for wa, ca in a.terms():
            for wb, cb in b.terms():
                _accumulate(acc, (wa, wb), ca * cb)
        return cls._from_accum(a.n, acc)

    def terms(self) -> Iterator[tuple[Pair, object]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def coeff(self, left, right):
        return self._terms.get((tuple(left), tuple(right)), ZERO)

    def _check(self, other) -> None:
        if self.n != other.n:
            raise VariableCountMismatch(f"variable counts differ: {self.n} vs {other.n}")

    def __add__(self, other: "TensorPoly") -> "TensorPoly":
        if not isinstance(other, TensorPoly):
            return NotImplemented
        self._check(other)
        acc = dict(self._terms)
        for p, c in other._terms.items():
            _accumulate(acc, p, c)
        return TensorPoly._from_accum(self.n, acc)

    def __neg__(self) -> "TensorPoly":
        return TensorPoly._from_accum(self.n, {p: -c for p, c in self._terms.items()})

    def __sub__(self, other: "TensorPoly") -> "TensorPoly":
        if not isinstance(other, TensorPoly):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "TensorPoly":
        c = as_scalar(c)
        return TensorPoly._from_accum(self.n, {p: c * a for p, a in self._terms.items()})

    def bimodule(self, u: NcPoly, v: NcPoly) -> "TensorPoly":
        """``(u (x) v) # self``, i.e. ``sum u a (x) b v``."""
        self._check(u)
        self._check(v)
        acc: dict[Pair, object] = {}
        for (a, b), c in self._terms.items():
            for wu, cu in u.terms():
                for wv, cv in v.terms():
                    _accumulate(acc, (wu + a, b + wv), cu * c * cv)
        return TensorPoly._from_accum(self.n, acc)

    def left_mul(self, P: NcPoly) -> "TensorPoly":
        """``(P (x) 1) . self``."""
        return self.bimodule(P, NcPoly.one(self.n))

    def right_mul(self, Q: NcPoly) -> "TensorPoly":
        """``self . (1 (x) Q)``."""
        return self.bimodule(NcPoly.one(self.n), Q)

    def __eq__(self, other) -> bool:
        if isinstance(other, TensorPoly):
            return self.n == other.n and self._terms == other._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, tuple(self._terms.items())))
        return self._hash

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                _term_dict({"word_left": list(a), "word_right": list(b)}, c)
                for (a, b), c in self.terms()
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TensorPoly":
        terms: dict = {}
        for t in d["terms"]:
            key = (tuple(t["word_left"]), tuple(t["word_right"]))
            if key in terms:
                raise ValueError(f"duplicate pair {key} in serialized tensor")
            terms[key] = _term_coeff(t)
        return cls(int(d["n"]), terms)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "TensorPoly":
        return cls.from_dict(json.loads(text))

    def __str__(self) -> str:
        from .parser import format_tensor

        return format_tensor(self)

    def __repr__(self) -> str:
        return f"TensorPoly(n={self.n}, {str(self)!r})"


def _check_index(j: int, n: int) -> None:
    if not 1 <= j <= n:
        raise IndexError(f"variable index {j} outside 1..{n}")


def diff(P: NcPoly, j: int) -> TensorPoly:
    _check_index(j, P.n)
    acc: dict[Pair, object] = {}
    for w, c in P.terms():
        for pos, letter in enumerate(w):
            if letter == j:
                _accumulate(acc, (w[:pos], w[pos + 1:]), c)
    return TensorPoly._from_accum(P.n, acc)


def sharp(T: TensorPoly, Q: NcPoly) -> NcPoly:
    """``T # Q`` with ``(a (x) b) # Q = a Q b``."""
    if T.n != Q.n:
        raise VariableCountMismatch(f"variable counts differ: {T.n} vs {Q.n}")
    acc: dict[Word, object] = {}
    for (a, b), c in T.terms():
        for wq, cq in Q.terms():
            _accumulate(acc, a + wq + b, c * cq)
    return NcPoly._from_accum(T.n, acc)


def flip(T: TensorPoly) -> TensorPoly:
    return TensorPoly._from_accum(T.n, {(b, a): c for (a, b), c in T.terms()})


def number_op(P: NcPoly) -> NcPoly:
    """Scale each monomial by its degree."""
    return NcPoly._from_accum(P.n, {w: c * len(w) for w, c in P.terms()})


def number_op_i(P: NcPoly, i: int) -> NcPoly:
    """Scale each monomial by the number of occurrences of ``X_i``."""
    _check_index(i, P.n)
    return NcPoly._from_accum(P.n, {w: c * w.count(i) for w, c in P.terms()})


def phi_t(P: NcPoly, t: float) -> NcPoly:
    """Degree-grading automorphism: a degree-d monomial gets ``exp(2 pi i t d)``.

    Output coefficients are float complex.
    """
    acc = {}
    for w, c in P.terms():
        acc[w] = complex(c) * cmath.exp(2j * math.pi * t * len(w))
    return NcPoly._from_accum(P.n, acc)


def fourier_extract(P: NcPoly, m: int, tol: float = 1e-9) -> NcPoly:
    """Recover the degree-m part of P by averaging ``phi_t`` over roots of unity.

    The integral over t in [0, 1) is replaced by the mean over ``D + 1``
    equispaced nodes, D = degree(P), which is exact for degrees <= D.  The float
    result is snapped back to rationals; ``ArithmeticError`` if that fails.
    """
    if m < 0:
        raise ValueError(f"degree must be >= 0, got {m}")
    D = P.degree()
    if D == NEG_INF or m > D:
        return NcPoly.zero(P.n)
    K = int(D) + 1
    acc: dict[Word, complex] = {}
    for k in range(K):
        t = k / K
        weight = cmath.exp(-2j * math.pi * m * t) / K
        for w, c in phi_t(P, t).terms():
            acc[w] = acc.get(w, 0j) + weight * c
    out = NcPoly._from_accum(P.n, {w: c for w, c in acc.items() if abs(c) > tol})
    return out.round_exact(tol=tol)


def hochschild_defect(P: NcPoly) -> TensorPoly:
    """``sum_i diff(P,i) . (X_i (x) 1 - 1 (x) X_i) - (P (x) 1 - 1 (x) P)``.

    Here ``(a (x) b) . (X_i (x) 1 - 1 (x) X_i) = a X_i (x) b - a (x) X_i b``.
    The calculus is consistent exactly when this vanishes for every P.
    """
    acc: dict[Pair, object] = {}
    for i in range(1, P.n + 1):
        for (a, b), c in diff(P, i).terms():
            _accumulate(acc, (a + (i,), b), c)
            _accumulate(acc, (a, (i,) + b), -c)
    for w, c in P.terms():
        _accumulate(acc, (w, ()), -c)
        _accumulate(acc, ((), w), c)
    return TensorPoly._from_accum(P.n, acc)


def leibniz_defect(P: NcPoly, Q: NcPoly, j: int) -> TensorPoly:
    """``diff(PQ) - diff(P).(1 (x) Q) - (P (x) 1).diff(Q)``; zero for a derivation."""
    return diff(P * Q, j) - diff(P, j).right_mul(Q) - diff(Q, j).left_mul(P)


def delta_reduce(P: NcPoly, j: int, tr) -> NcPoly:
    """``(tau (x) 1)(diff(P, j))``: for ``diff(P,j) = sum a (x) b`` return ``sum tau(a) b``.

    ``tr`` is any callable Word -> Scalar (see :mod:`freereg.freetrace`).  For
    non-constant P the result has strictly smaller degree.
    """
    acc: dict[Word, object] = {}
    cache: dict[Word, object] = {}
    for (a, b), c in diff(P, j).terms():
        if a not in cache:
            cache[a] = tr(a)
        ta = cache[a]
        if ta != 0:
            _accumulate(acc, b, c * ta)
    return NcPoly._from_accum(P.n, acc)
