"""Trace of a free semicircular family, computed by counting non-crossing pairings.

For standard free semicirculars ``tau(X_{l_1} ... X_{l_k})`` is the number of
non-crossing pair partitions of ``{1..k}`` in which every block joins two equal
letters.  User-supplied trace tables are supported for other models.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from threading import Lock
from typing import Callable, Iterator, Mapping

from .ncpoly import NcPoly, Word
from .scalar import ONE, ZERO, Scalar, parse_fraction

__all__ = [
    "Pairing",
    "TraceFunctional",
    "TraceUndefined",
    "BudgetExceeded",
    "noncrossing_pairings",
    "count_semicircular_pairings",
    "semicircular_trace",
    "SEMICIRCULAR",
    "trace_poly",
    "moments",
    "catalan",
]

DEFAULT_TERM_BUDGET = 2_000_000


class TraceUndefined(KeyError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Pairing:
    """Pair partition of positions ``1..k`` (stored 1-based, sorted)."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = sorted(x for p in self.pairs for x in p)
        k = len(seen)
        if seen != list(range(1, k + 1)):
            raise ValueError(f"pairs do not partition 1..{k}: {self.pairs}")
        if any(a >= b for a, b in self.pairs):
            raise ValueError("each pair must be written (smaller, larger)")

    @property
    def size(self) -> int:
        return 2 * len(self.pairs)

    def is_noncrossing(self) -> bool:
        for a, b in self.pairs:
            for c, d in self.pairs:
                if a < c < b < d:
                    return False
        return True


def noncrossing_pairings(k: int) -> Iterator[Pairing]:
    """All non-crossing pair partitions of ``{1..k}`` (none for odd k)."""

    def rec(lo: int, hi: int) -> Iterator[list[tuple[int, int]]]:
        # positions lo..hi inclusive
        if lo > hi:
            yield []
            return
        for partner in range(lo + 1, hi + 1, 2):
            for inner in rec(lo + 1, partner - 1):
                for outer in rec(partner + 1, hi):
                    yield [(lo, partner)] + inner + outer

    if k % 2:
        return
    for pairs in rec(1, k):
        yield Pairing(tuple(sorted(pairs)))


@lru_cache(maxsize=1 << 16)
def count_semicircular_pairings(w: Word) -> int:
    """Number of non-crossing pairings of ``w`` joining only equal letters.

    The first letter is matched with every admissible partner; the segments
    strictly inside and after the matched pair are counted independently.
    """
    k = len(w)
    if k == 0:
        return 1
    if k % 2:
        return 0
    first = w[0]
    total = 0
    for p in range(1, k, 2):
        if w[p] != first:
            continue
        inner = count_semicircular_pairings(w[1:p])
        if inner:
            total += inner * count_semicircular_pairings(w[p + 1:])
    return total


def semicircular_trace(w: Word) -> Scalar:
    return Scalar(count_semicircular_pairings(tuple(w)))


@dataclass(frozen=True)
class TraceFunctional:
    """Unital linear functional on words.

    ``kind`` is ``"semicircular"`` or ``"user-table"``.
    """

    evaluator: Callable[[Word], Scalar]
    kind: str = "semicircular"

    def __call__(self, w) -> Scalar:
        w = tuple(w)
        if not w:
            return ONE
        return self.evaluator(w)

    @classmethod
    def from_table(cls, table: Mapping[Word, Scalar]) -> "TraceFunctional":
        data = {tuple(k): v for k, v in table.items()}
        if () in data and data[()] != 1:
            raise ValueError("trace table must be unital: tau(empty word) = 1")
        lock = Lock()

        def evaluate(w: Word) -> Scalar:
            with lock:
                try:
                    return data[w]
                except KeyError:
                    raise TraceUndefined(f"trace table has no entry for word {list(w)}") from None

        return cls(evaluate, "user-table")

    @classmethod
    def from_json(cls, source: str | Path) -> "TraceFunctional":
        """Load ``[{"word": [...], "value": "p/q", "im": "p/q"?}, ...]``.

        ``source`` is a path or a JSON string.
        """
        text = str(source)
        if not text.lstrip().startswith("["):
            text = Path(source).read_text()
        table: dict[Word, Scalar] = {}
        for entry in json.loads(text):
            w = tuple(int(x) for x in entry["word"])
            if w in table:
                raise ValueError(f"duplicate trace entry for word {list(w)}")
            table[w] = Scalar(
                parse_fraction(str(entry["value"])), parse_fraction(str(entry.get("im", "0")))
            )
        return cls.from_table(table)


SEMICIRCULAR = TraceFunctional(semicircular_trace, "semicircular")


def trace_poly(P: NcPoly, tr: Callable[[Word], Scalar] = SEMICIRCULAR) -> Scalar:
    total = ZERO
    for w, c in P.terms():
        t = tr(w)
        if t != 0:
            total = total + c * t
    return total


def moments(
    P: NcPoly,
    k: int,
    tr: Callable[[Word], Scalar] = SEMICIRCULAR,
    budget: int = DEFAULT_TERM_BUDGET,
) -> list[Scalar]:
    """``[tr(P^j) for j = 1..k]`` by iterated exact multiplication.

    ``budget`` caps the number of terms of any intermediate power.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    out = []
    power = NcPoly.one(P.n)
    for j in range(1, k + 1):
        if len(power) * len(P) > budget:
            raise BudgetExceeded(
                f"P^{j} may need up to {len(power) * len(P)} terms (budget {budget})"
            )
        power = power * P
        out.append(trace_poly(power, tr))
    return out


def catalan(k: int) -> int:
    from math import comb

    return comb(2 * k, k) // (k + 1)
