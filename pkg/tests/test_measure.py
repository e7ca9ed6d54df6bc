import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma

from genou import functions as F
from genou.measure import (
    IntervalFamily,
    LambdaMeasure,
    build_grid,
    distribution,
    h_distribution,
    h_function,
    hl_maximal,
    integrate,
    integrate_panels,
    lambda_mass,
    log_h,
)
from genou.specfun import OutOfRangeError, hermite_coeffs, hermite_norm_sq
from genou.verify import h_distribution_trend, natanson_inequality_gap

mus = st.floats(min_value=-0.45, max_value=4.0)
ends = st.floats(min_value=-8.0, max_value=8.0)


def mp_half(mu, lo, hi):
    """int_lo^hi u^(2mu) e^(-u^2) du, 0 <= lo <= hi, after t = u^(2mu+1) removes the singularity."""
    k = 2 * mu + 1
    g = lambda t: mp.e ** (-(t ** (2 / k))) / k  # noqa: E731
    return mp.quad(g, [mp.mpf(lo) ** k, mp.mpf(hi) ** k])


def mp_mass(mu, a, b):
    mp.mp.dps = 30
    pos = mp_half(mu, max(a, 0.0), max(b, 0.0)) if b > 0 else 0
    neg = mp_half(mu, max(-b, 0.0), max(-a, 0.0)) if a < 0 else 0
    return float(pos + neg)


# ---------------------------------------------------------------- lambda_mass


def test_mass_examples():
    for mu in (-0.4, 0.0, 0.5, 2.0):
        assert lambda_mass(mu, 1.3, 1.3) == 0.0
        assert lambda_mass(mu, -np.inf, np.inf) == pytest.approx(gamma(mu + 0.5), rel=1e-12)
    assert lambda_mass(0.0, 0.0, np.inf) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)


@pytest.mark.parametrize("mu", [-0.45, -0.25, 0.0, 0.5, 3.0])
def test_mass_mpmath(mu):
    for a, b in ((-2.0, 1.0), (0.0, 0.3), (1.0, 2.0), (-5.0, -4.0), (6.0, 9.0), (-0.01, 0.02)):
        assert lambda_mass(mu, a, b) == pytest.approx(mp_mass(mu, a, b), rel=1e-10)


def test_mass_tail_relative_accuracy():
    mp.mp.dps = 40
    ref = float(mp.quad(lambda y: y * mp.e ** (-y * y), [20, mp.inf]))
    assert lambda_mass(0.5, 20.0, np.inf) == pytest.approx(ref, rel=1e-10)


def test_mass_rejects_reversed():
    with pytest.raises(ValueError):
        lambda_mass(0.5, 2.0, 1.0)


@given(mus, ends, ends, ends)
def test_mass_additive(mu, a, b, c):
    a, b, c = sorted((a, b, c))
    total = lambda_mass(mu, a, c)
    assert lambda_mass(mu, a, b) + lambda_mass(mu, b, c) == pytest.approx(total, rel=1e-9, abs=1e-300)


@given(mus, ends, ends)
def test_mass_symmetric(mu, a, b):
    a, b = sorted((a, b))
    assert lambda_mass(mu, a, b) == pytest.approx(lambda_mass(mu, -b, -a), rel=1e-12, abs=1e-300)


def test_measure_self_test():
    m = LambdaMeasure(0.5)
    assert m.total_mass == pytest.approx(1.0)
    with pytest.raises(ValueError):
        LambdaMeasure(-0.6)


# ---------------------------------------------------------------- grids


@pytest.mark.parametrize("mu", [-0.25, 0.0, 0.5, 2.0])
def test_grid_examples(mu):
    g = build_grid(mu, (-10, 10), tol=1e-12)
    assert np.all(g.weights > 0)
    assert integrate(lambda y: np.ones_like(y), g) == pytest.approx(gamma(mu + 0.5), rel=1e-12)
    h1, h2, h3 = (hermite_coeffs(mu, n) for n in (1, 2, 3))
    assert abs(integrate(lambda y: h1(y) * h2(y), g)) <= 1e-12
    assert integrate(lambda y: h3(y) ** 2, g) == pytest.approx(hermite_norm_sq(mu, 3), rel=1e-7)


def test_integrate_linear_and_checks_finiteness():
    g = build_grid(0.3)
    f = lambda y: np.cos(y) + y**2  # noqa: E731
    assert integrate(lambda y: 2 * f(y), g) == pytest.approx(2 * integrate(f, g), rel=1e-14)
    with pytest.raises(FloatingPointError, match="node"):
        integrate(lambda y: np.where(y > 1, np.nan, 1.0), g)


def test_integrate_panels_mass():
    edges = [-3.0, -1.0, 0.0, 0.5, 2.0]
    seg = integrate_panels(-0.25, lambda y: np.ones_like(y), edges)
    ref = [lambda_mass(-0.25, a, b) for a, b in zip(edges[:-1], edges[1:])]
    assert np.allclose(seg, ref, rtol=1e-12)


# ---------------------------------------------------------------- distribution


def test_distribution_examples():
    x = np.linspace(-5, 5, 2048)
    assert distribution(0.5, F.constant(0.0), 0.3, x).mass == 0.0
    assert distribution(0.5, F.constant(1.0), 0.5, x).mass == pytest.approx(1.0, rel=1e-12)
    est = distribution(0.5, F.indicator(1.0, 2.0).scaled(2.0), 1.0, x)
    assert est.mass == pytest.approx(lambda_mass(0.5, 1.0, 2.0), abs=1e-6)
    assert est.mass <= LambdaMeasure(0.5).total_mass


def test_distribution_smooth_level_set():
    # {cos(y) > 1/2} on (-pi/3, pi/3) within the grid
    g = lambda y: np.cos(y)  # noqa: E731
    est = distribution(0.0, g, 0.5, np.linspace(-3, 3, 2048))
    assert est.mass == pytest.approx(lambda_mass(0.0, -math.pi / 3, math.pi / 3), abs=1e-8)


@given(st.sampled_from([-0.25, 0.0, 2.0]), st.floats(0.01, 3.0), st.floats(0.01, 3.0))
def test_distribution_monotone(mu, e1, e2):
    g = F.triangular_bump(0.4, 1.5, 3.0)
    x = np.linspace(-3, 3, 2048)
    lo, hi = sorted((e1, e2))
    assert distribution(mu, g, hi, x).mass <= distribution(mu, g, lo, x).mass + 1e-12


# ---------------------------------------------------------------- Hardy-Littlewood


def test_hl_constant():
    for mu in (-0.25, 0.5, 2.0):
        for x in (-1.0, 0.0, 2.5):
            assert hl_maximal(mu, F.constant(3.0), x) == pytest.approx(3.0, rel=1e-12)


def test_hl_abs_h1_symmetric_scan():
    mu = 0.5
    h1 = F.hermite(mu, 1)
    a = np.geomspace(1e-3, 16, 4000)
    oracle = np.max([
        integrate_panels(mu, lambda y: np.abs(y), [-ai, 0.0, ai]).sum() / lambda_mass(mu, -ai, ai) for ai in a[::40]
    ])
    fam = IntervalFamily.geometric()
    sym = IntervalFamily(fam.right, fam.right)
    got = hl_maximal(mu, h1, 0.0, sym)
    assert got >= oracle * (1 - 1e-9)
    # the symmetric scan value equals the analytic average over [-a, a]:
    # int |y|^{2} e^{-y^2} / int |y| e^{-y^2} on [0, a]
    fine = max(lambda_mass(mu + 0.5, 0, ai) / lambda_mass(mu, 0, ai) / (mu + 0.5) for ai in sym.right if ai > 0)
    assert got == pytest.approx(fine, rel=1e-9)


def test_hl_refinement_monotone():
    f = F.clipped_sine().absolute()
    fam = IntervalFamily.geometric(24)
    for x in (-1.7, 0.4, 2.2):
        # a superset of intervals, up to summation-order rounding
        coarse = hl_maximal(-0.25, f, x, fam)
        assert hl_maximal(-0.25, f, x, fam.refine()) >= coarse * (1 - 1e-13)


def test_hl_empty_family():
    with pytest.raises(ValueError):
        hl_maximal(0.5, F.constant(1.0), 0.0, IntervalFamily(np.array([]), np.array([])))


def test_hl_returns_interval_containing_x():
    val, (a, b) = hl_maximal(0.5, F.indicator(1.0, 2.0), 0.5, return_interval=True)
    assert a <= 0.5 <= b
    assert val == pytest.approx(lambda_mass(0.5, 1.0, min(b, 2.0)) / lambda_mass(0.5, a, b), rel=1e-10)


def test_natanson_inequality_random():
    assert natanson_inequality_gap(200, seed=42) <= 1e-6


# ---------------------------------------------------------------- h


def test_h_examples():
    assert h_function(0.0, 1.0) == pytest.approx(math.e, rel=1e-14)
    assert h_function(0.5, 2.0) == pytest.approx(math.exp(4), rel=1e-14)
    with pytest.raises(ValueError):
        h_function(0.5, 0.0)
    with pytest.raises(OutOfRangeError):
        h_function(0.5, 40.0)
    assert np.isfinite(log_h(0.5, 40.0))


@given(mus, st.floats(min_value=1e-3, max_value=20))
def test_h_even(mu, x):
    assert log_h(mu, x) == log_h(mu, -x)


def test_h_distribution_bounded():
    for mu in (-0.25, 0.0, 0.5, 2.0):
        sup, slope, _ = h_distribution_trend(mu)
        assert np.isfinite(sup)
        assert slope <= 0.05


def test_h_distribution_matches_direct():
    # mu = 0: h(x) = max(1/|x|,|x|) e^{x^2}/|x|^0; for eta = e^9, {h > eta} = {|x| > x1} U {|x| < x0}
    est = h_distribution(0.0, [math.exp(9.0)])[0]
    from scipy.optimize import brentq

    x1 = brentq(lambda x: math.log(x) + x * x - 9.0, 1.0, 4.0)
    x0 = brentq(lambda x: -math.log(x) + x * x - 9.0, 1e-9, 1.0)
    ref = 2 * (lambda_mass(0.0, x1, np.inf) + lambda_mass(0.0, 0.0, x0))
    assert est.eta == pytest.approx(math.exp(9.0))
    assert est.mass == pytest.approx(ref, rel=1e-6)
