import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import polys, scalars
from freereg.ncpoly import NEG_INF, NcPoly, VariableCountMismatch
from freereg.scalar import I, ONE, Scalar, format_fraction

x1, x2, x3 = (NcPoly.var(i, 3) for i in (1, 2, 3))


def test_scalar_arithmetic_is_exact():
    a = Scalar(Fraction(1, 3), 2)
    b = Scalar(-1, Fraction(1, 2))
    assert a * b == Scalar(Fraction(-1, 3) - 1, Fraction(1, 6) - 2)
    assert (a / b) * b == a
    assert I * I == Scalar(-1)
    assert a.conjugate().conjugate() == a
    assert Scalar(3) == 3 and hash(Scalar(3)) == hash(Fraction(3))
    assert format_fraction(Fraction(3)) == "3/1"


def test_scalar_mixed_with_float_goes_complex():
    assert isinstance(Scalar(1, 1) * 0.5, complex)
    assert Scalar.nearest(0.3333333333 + 0.5j) == Scalar(Fraction(1, 3), Fraction(1, 2))


@given(scalars, scalars, scalars)
def test_scalar_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()
    assert (a * a.conjugate()).im == 0


def test_canonical_order_and_zero_dropping():
    P = NcPoly(3, {(2, 1): 1, (): 5, (1,): 0, (1, 2): 2, (3,): 1})
    assert list(P.words()) == [(), (3,), (1, 2), (2, 1)]
    assert P.coeff((1,)) == 0


def test_multiplication_concatenates_words():
    assert (x1 * x2).coeff((1, 2)) == 1
    assert x1 * x2 != x2 * x1
    assert (x1 + x2) ** 2 == x1 * x1 + x1 * x2 + x2 * x1 + x2 * x2
    assert x1 ** 0 == NcPoly.one(3)


def test_degree_conventions():
    assert NcPoly.zero(2).degree() == NEG_INF
    assert NcPoly.const(4, 2).degree() == 0
    P = x1 * x2 * x1 + x3
    assert P.degree() == 3
    assert P.degree_in(1) == 2 and P.degree_in(3) == 1


def test_adjoint_reverses_words_and_conjugates():
    P = NcPoly(2, {(1, 2): Scalar(1, 2)})
    assert P.adjoint() == NcPoly(2, {(2, 1): Scalar(1, -2)})
    assert (x1 * x2 + x2 * x1).is_self_adjoint()
    assert not (x1 * x2).is_self_adjoint()


def test_variable_count_mismatch():
    with pytest.raises(VariableCountMismatch):
        NcPoly.var(1, 2) + NcPoly.var(1, 3)
    with pytest.raises(ValueError):
        NcPoly(2, {(3,): 1})


def test_norm_R():
    P = NcPoly(2, {(1, 2): Scalar(3, 4), (): -2})
    assert math.isclose(P.norm_R(2.0), 5 * 4 + 2)


def test_homogeneous_parts_sum_back():
    P = x1 * x2 * x3 + 2 * x1 - 7
    parts = [P.homogeneous_part(m) for m in range(4)]
    assert sum(parts[1:], parts[0]) == P
    assert parts[2] == NcPoly.zero(3)


def test_json_round_trip_uses_rational_strings():
    P = NcPoly(2, {(1, 2): Scalar(Fraction(1, 3), -1)})
    d = json.loads(P.to_json())
    assert d == {"n": 2, "terms": [{"word": [1, 2], "re": "1/3", "im": "-1/1"}]}
    assert NcPoly.from_dict(d) == P


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_ring_axioms(P, Q, R):
    assert (P * Q) * R == P * (Q * R)
    assert P * (Q + R) == P * Q + P * R
    assert (P * Q).adjoint() == Q.adjoint() * P.adjoint()
    assert P - P == NcPoly.zero(3)
    if P and Q:
        assert (P * Q).degree() == P.degree() + Q.degree()


@settings(max_examples=60, deadline=None)
@given(polys())
def test_json_round_trip_property(P):
    assert NcPoly.from_dict(json.loads(P.to_json())) == P


def test_round_exact():
    P = NcPoly(1, {(1,): 0.5 + 1e-12j, (): 1 / 3})
    assert P.round_exact() == NcPoly(1, {(1,): Fraction(1, 2), (): Fraction(1, 3)})
    with pytest.raises(ArithmeticError):
        NcPoly(1, {(): math.pi}).round_exact(max_denominator=10)
