import json
import random

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import polys, random_poly
from freereg.freetrace import SEMICIRCULAR, trace_poly
from freereg.matrix_model import MatrixTuple, eval_poly, sample_gue_tuple, trial_rng
from freereg.nccalc import (
    TensorPoly,
    delta_reduce,
    diff,
    flip,
    fourier_extract,
    hochschild_defect,
    leibniz_defect,
    number_op,
    number_op_i,
    phi_t,
    sharp,
)
from freereg.ncpoly import NcPoly
from freereg.parser import parse_poly

n3 = 3
x1, x2, x3 = (NcPoly.var(i, n3) for i in (1, 2, 3))


def test_diff_of_generators():
    one = NcPoly.one(n3)
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            expected = TensorPoly.simple(one, one) if i == j else TensorPoly.zero(n3)
            assert diff(NcPoly.var(i, n3), j) == expected


def test_diff_of_constant_is_zero():
    assert not diff(NcPoly.const(3, 2), 1)


def test_diff_leibniz_example():
    T = diff(parse_poly("x1*x2*x1"), 1)
    assert str(T) == "1⊗x2*x1 + x1*x2⊗1"


def test_diff_bad_index():
    with pytest.raises(IndexError):
        diff(x1, 4)


def test_diff_matches_finite_difference():
    # d/ds P(Y + s H e_j) at s=0 equals sum c a(Y) H b(Y)
    rnd = random.Random(3)
    rng = trial_rng(11, 0)
    Y = sample_gue_tuple(3, 6, rng)
    G = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    H = G + G.conj().T
    for _ in range(10):
        P = random_poly(rnd, 3, 4)
        for j in (1, 2, 3):
            h = 1e-6
            Yp = [Y[k] + (h * H if k == j else 0) for k in (1, 2, 3)]
            Ym = [Y[k] - (h * H if k == j else 0) for k in (1, 2, 3)]
            fd = (eval_poly(P, MatrixTuple(tuple(Yp))) - eval_poly(P, MatrixTuple(tuple(Ym)))) / (2 * h)
            exact = np.zeros((6, 6), dtype=complex)
            for (a, b), c in diff(P, j).terms():
                A = eval_poly(NcPoly.monomial(a, 3), Y)
                B = eval_poly(NcPoly.monomial(b, 3), Y)
                exact += complex(c) * A @ H @ B
            assert np.allclose(fd, exact, atol=1e-5 * (1 + np.abs(exact).max()))


def test_sharp_and_flip():
    T = TensorPoly.simple(x1, x2 * x3)
    assert sharp(T, x3) == x1 * x3 * x2 * x3
    assert flip(T) == TensorPoly.simple(x2 * x3, x1)
    assert flip(flip(T)) == T


def test_number_operator_counts_degree():
    P = 2 * x1 * x2 - x3 + 5
    assert number_op(P) == 4 * x1 * x2 - x3
    assert number_op_i(P, 1) == 2 * x1 * x2


def test_phi_t_scales_by_degree():
    P = x1 * x2 + 1
    Q = phi_t(P, 0.25)
    assert Q.coeff((1, 2)) == pytest.approx(-1)
    assert Q.coeff(()) == pytest.approx(1)
    assert phi_t(P, 1.0).round_exact() == P


def test_tensor_json_round_trip():
    T = diff(x1 * x2 * x1 - 3 * x1, 1)
    d = json.loads(T.to_json())
    assert "word_left" in d["terms"][0]
    assert TensorPoly.from_dict(d) == T


def test_delta_reduce_example():
    # diff_1(x1 x1 x2 x1) = 1 (x) x1x2x1 + x1 (x) x2x1 + x1x1x2 (x) 1
    R = delta_reduce(x1 * x1 * x2 * x1, 1, SEMICIRCULAR)
    assert R == x1 * x2 * x1
    assert delta_reduce(x1 * x1, 1, SEMICIRCULAR) == x1


@settings(max_examples=80, deadline=None)
@given(polys(), polys())
def test_leibniz_property(P, Q):
    for j in (1, 2, 3):
        assert not leibniz_defect(P, Q, j)


@settings(max_examples=80, deadline=None)
@given(polys())
def test_euler_identity_property(P):
    acc = NcPoly.zero(3)
    for j in (1, 2, 3):
        acc = acc + sharp(diff(P, j), NcPoly.var(j, 3))
    assert acc == number_op(P)


@settings(max_examples=80, deadline=None)
@given(polys())
def test_hochschild_defect_vanishes_property(P):
    assert not hochschild_defect(P)


@settings(max_examples=50, deadline=None)
@given(polys(), polys())
def test_phi_multiplicative_property(P, Q):
    for t in (0.1, 1 / 3):
        assert (phi_t(P, t) * phi_t(Q, t)).allclose(phi_t(P * Q, t), 1e-9)


@settings(max_examples=50, deadline=None)
@given(polys())
def test_fourier_extract_is_grading_property(P):
    top = 0 if not P else int(P.degree())
    for m in range(top + 2):
        assert fourier_extract(P, m) == P.homogeneous_part(m)


@settings(max_examples=60, deadline=None)
@given(polys())
def test_schwinger_dyson_property(P):
    # for free semicirculars tau(X_j P) = (tau (x) tau)(diff_j P)
    for j in (1, 2, 3):
        lhs = trace_poly(NcPoly.var(j, 3) * P)
        assert trace_poly(delta_reduce(P, j, SEMICIRCULAR)) == lhs
