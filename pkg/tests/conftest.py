import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from freereg.ncpoly import NcPoly
from freereg.scalar import Scalar


def random_poly(rng: random.Random, n: int, max_deg: int, max_terms: int = 6, complex_coeffs: bool = True) -> NcPoly:
    terms = {}
    for _ in range(rng.randint(0, max_terms)):
        d = rng.randint(0, max_deg)
        w = tuple(rng.randint(1, n) for _ in range(d))
        re = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
        im = Fraction(rng.randint(-3, 3), rng.randint(1, 3)) if complex_coeffs and rng.random() < 0.3 else 0
        terms[w] = Scalar(re, im)
    return NcPoly(n, terms)


_frac = st.fractions(min_value=-5, max_value=5, max_denominator=6)
scalars = st.builds(Scalar, _frac, st.one_of(st.just(Fraction(0)), _frac))


@st.composite
def polys(draw, n: int = 3, max_deg: int = 4, max_terms: int = 5):
    words = st.lists(st.integers(1, n), max_size=max_deg).map(tuple)
    terms = draw(st.dictionaries(words, scalars, max_size=max_terms))
    return NcPoly(n, terms)


@pytest.fixture
def rng():
    return random.Random(1234)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
