import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from freereg.matrix_model import EmpiricalMeasure
from freereg.spectral import (
    ENTROPY_CONSTANT,
    SparseMass,
    decay_exponent,
    geometric_grid,
    histogram,
    ks_distance,
    log_energy,
    max_window_mass,
    reference_free_poisson,
    reference_semicircle,
)

SC = reference_semicircle()
FP = reference_free_poisson()


def semicircle_density(x):
    return math.sqrt(max(4 - x * x, 0.0)) / (2 * math.pi)


def _semicircle_quantiles(q):
    # G(2 sin th) = 1/2 + (th + sin th cos th) / pi is smooth and increasing in th
    th = np.linspace(-math.pi / 2, math.pi / 2, 200001)
    G = 0.5 + (th + np.sin(th) * np.cos(th)) / math.pi
    return 2 * np.sin(np.interp(q, G, th))


def quantile_measure(ref, m):
    q = (np.arange(m) + 0.5) / m
    if ref is FP:
        return EmpiricalMeasure(_semicircle_quantiles((1 + q) / 2) ** 2)
    return EmpiricalMeasure(_semicircle_quantiles(q))


def test_semicircle_log_energy_oracle():
    # inner integral split at the log singularity s = t
    def inner(t):
        f = lambda s: math.log(abs(s - t)) * semicircle_density(s) if s != t else 0.0
        a, _ = integrate.quad(f, -2, t, limit=200)
        b, _ = integrate.quad(f, t, 2, limit=200)
        return (a + b) * semicircle_density(t)

    val, _ = integrate.quad(inner, -2, 2, limit=200)
    assert val == pytest.approx(-0.25, abs=1e-6)


def test_entropy_constant():
    assert ENTROPY_CONSTANT == pytest.approx(0.75 + 0.5 * math.log(2 * math.pi))


def test_log_energy_on_semicircle_quantiles():
    # dropping the diagonal on a deterministic grid leaves an O(log m / m) bias
    coarse = log_energy(quantile_measure(SC, 1000)).log_energy
    est = log_energy(quantile_measure(SC, 6000))
    assert abs(est.log_energy + 0.25) < abs(coarse + 0.25)
    assert est.log_energy == pytest.approx(-0.25, abs=2e-3)
    assert est.chi == pytest.approx(est.log_energy + ENTROPY_CONSTANT)
    assert est.diagonal_excluded and not est.atom_warning


def test_log_energy_brute_force_agrees():
    rng = np.random.default_rng(0)
    pts = rng.standard_normal(300)
    d = np.abs(pts[:, None] - pts[None, :])
    brute = np.log(d[~np.eye(300, dtype=bool)]).mean()
    assert log_energy(EmpiricalMeasure(pts), chunk=37).log_energy == pytest.approx(brute, rel=1e-12)


def test_log_energy_atoms():
    est = log_energy(EmpiricalMeasure(np.array([0.0, 1.0, 1.0, 2.0])))
    assert est.log_energy == -math.inf and est.atom_warning
    est = log_energy(EmpiricalMeasure(np.zeros(5)))
    assert est.log_energy == -math.inf and est.atom_warning
    assert json.loads(est.to_json())["log_energy"] is None
    with pytest.raises(ValueError):
        log_energy(EmpiricalMeasure(np.array([1.0])))


@pytest.mark.parametrize("ref", [SC, FP, reference_semicircle(2.5)])
def test_closed_form_cdfs_match_quadrature(ref):
    xs = np.linspace(ref.lo - 0.5, ref.hi + 0.5, 57)
    assert np.allclose(ref(xs), ref.exact(xs), atol=1e-9)
    for q in (0.1, 0.5, 0.9):
        assert float(ref.exact(ref.quantile(q))) == pytest.approx(q, abs=1e-10)


def test_free_poisson_is_square_of_semicircle():
    for x in (0.01, 0.5, 1.0, 3.9):
        r = math.sqrt(x)
        assert FP.exact(x) == pytest.approx(SC.exact(r) - SC.exact(-r), abs=1e-12)


def test_ks_distance_matches_scipy():
    rng = np.random.default_rng(4)
    pts = rng.uniform(-2, 2, 500)
    mu = EmpiricalMeasure(pts)
    ref = stats.kstest(pts, SC.exact).statistic
    assert ks_distance(mu, SC) == pytest.approx(ref, abs=1e-9)


def test_ks_distance_between_measures():
    a = EmpiricalMeasure(np.array([0.0, 1.0]))
    b = EmpiricalMeasure(np.array([0.5, 1.5]))
    assert ks_distance(a, b) == 0.5
    assert ks_distance(a, a) == 0.0
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=80), rng.normal(size=120)
    assert ks_distance(EmpiricalMeasure(x), EmpiricalMeasure(y)) == pytest.approx(stats.ks_2samp(x, y).statistic)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-40, 40), min_size=1, max_size=60), st.sampled_from([0.05, 0.1, 0.3]))
def test_window_mass_matches_brute_force(raw, eps):
    pts = np.array(raw, dtype=float) / 20
    mu = EmpiricalMeasure(pts)
    brute = max(np.mean((pts >= x) & (pts <= x + eps)) for x in pts)
    rep = max_window_mass(mu, eps)
    assert rep.max_mass == pytest.approx(brute)
    assert rep.window[1] - rep.window[0] == pytest.approx(eps)


def test_atom_flag_threshold():
    mu = EmpiricalMeasure(np.concatenate([np.full(50, 1.0), np.linspace(-2, 0, 50)]))
    rep = max_window_mass(mu, 0.05)
    assert rep.atom_suspected and rep.location == 1.0 and rep.max_mass == 0.5
    assert rep.threshold == pytest.approx(0.05**0.4)
    assert not max_window_mass(quantile_measure(SC, 2000), 0.05).atom_suspected
    with pytest.raises(ValueError):
        max_window_mass(mu, 0.0)


def test_decay_exponent_on_quantile_grids():
    grid = geometric_grid(0.4, 0.7, 8)
    # bounded positive density: alpha = 1; hard edge of free Poisson: alpha = 1/2
    assert decay_exponent(quantile_measure(SC, 20000), 0.0, grid).alpha == pytest.approx(1.0, abs=0.05)
    assert decay_exponent(quantile_measure(FP, 20000), 0.0, grid).alpha == pytest.approx(0.5, abs=0.05)
    # at the soft edge of the semicircle the one-sided mass scales like eps^(3/2)
    edge = decay_exponent(quantile_measure(SC, 50000), -2.0, geometric_grid(0.1, 0.7, 6), one_sided=True)
    assert edge.alpha == pytest.approx(1.5, abs=0.1)


def test_decay_validation():
    mu = quantile_measure(SC, 500)
    with pytest.raises(ValueError, match="geometric"):
        decay_exponent(mu, 0.0, [0.4, 0.3, 0.1, 0.05])
    with pytest.raises(ValueError, match=">= 4"):
        decay_exponent(mu, 0.0, [0.4, 0.2, 0.1])
    with pytest.raises(ValueError, match="diameter"):
        decay_exponent(mu, 0.0, geometric_grid(8.0, 0.5, 5))
    with pytest.raises(SparseMass):
        decay_exponent(mu, 3.5, geometric_grid(0.4, 0.7, 8))
    with pytest.raises(ValueError):
        geometric_grid(0.4, 1.2, 8)


def test_histogram():
    mu = quantile_measure(SC, 1000)
    h = histogram(mu, 20)
    assert h.masses.sum() == pytest.approx(1.0)
    assert np.allclose(h.density * np.diff(h.edges), h.masses)
    one = histogram(EmpiricalMeasure(np.array([2.0, 2.0])), 4)
    assert one.edges[0] == 1.5 and one.masses.sum() == 1.0
    assert h.to_csv().splitlines()[1] == "bin_left,bin_right,mass"
