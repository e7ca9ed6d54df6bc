import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gammaln

from genou import functions as F
from genou.maximal import l1_norm
from genou.quadrature import QuadratureError
from genou.semigroup import (
    SemigroupParams,
    apply_quadrature,
    apply_spectral,
    half_line_values,
    l_mu_apply,
    negativity_example,
    ode_residual,
    semigroup_values,
    spectral_coeffs,
)
from genou.specfun import PolyCoeffs, hermite_coeffs, hermite_gen
from genou.verify import eigen_errors, quad_vs_spectral

MU_GRID = (-0.25, 0.0, 0.5, 2.0)
X = np.linspace(-4, 4, 41)


def test_params():
    p = SemigroupParams(0.5, 1.0)
    assert p.r == pytest.approx(math.exp(-1))
    assert SemigroupParams.from_r(0.5, p.r).t == pytest.approx(1.0)
    with pytest.raises(ValueError):
        SemigroupParams(0.5, 0.0)
    with pytest.raises(ValueError):
        SemigroupParams(0.5, 1e-12)
    with pytest.raises(ValueError):
        SemigroupParams(-0.5, 1.0)


@pytest.mark.parametrize("mu", [0.0, 0.5, 2.0])
def test_conservation(mu):
    for t in (0.05, 0.5, 2.0, 10.0):
        assert np.max(np.abs(semigroup_values(mu, F.constant(1.0), X, math.exp(-t)) - 1)) <= 1e-6


def test_conservation_signed_kernel():
    for t in (0.05, 0.5, 2.0, 10.0):
        q = semigroup_values(-0.25, F.constant(1.0), X, math.exp(-t))
        s = spectral_coeffs(-0.25, F.constant(1.0), 4).evaluate(t, X)
        assert np.max(np.abs(q - 1)) <= 1e-4
        assert np.max(np.abs(s - 1)) <= 1e-6


def test_h1_eigen_example():
    x = np.linspace(-3, 3, 31)
    for t in (0.1, 1.0, 3.0):
        v = semigroup_values(0.5, F.hermite(0.5, 1), x, math.exp(-t))
        assert np.allclose(v, math.exp(-t) * x, rtol=1e-6, atol=1e-15)


def test_eigen_relation_all():
    assert eigen_errors() <= 1e-6


def test_large_time_limit():
    for mu in MU_GRID:
        f = F.triangular_bump(0.7, 0.5, 2.0)
        mean = l1_norm(mu, f) / math.exp(gammaln(mu + 0.5))
        assert apply_quadrature(SemigroupParams(mu, 30.0), f, 1.3) == pytest.approx(mean, abs=1e-6)


@pytest.mark.parametrize("mu", [-0.25, 0.5])
def test_quadrature_mpmath_oracle(mu):
    """Direct 30-digit quadrature of the kernel integral for a bump."""
    mp.mp.dps = 30
    f = F.triangular_bump(0.8, 0.6, 1.5)
    r, x = 0.6, -1.1
    om = 1 - r * r

    def emu(z):
        return mp.gamma(mu + 0.5) * (
            mp.nsum(lambda k: (z / 2) ** (2 * k) / (mp.factorial(k) * mp.gamma(k + mu + 0.5)), [0, mp.inf])
            + (z / 2) * mp.nsum(lambda k: (z / 2) ** (2 * k) / (mp.factorial(k) * mp.gamma(k + mu + 1.5)), [0, mp.inf]))

    def integrand(y):
        k = om ** (-(mu + 0.5)) / mp.gamma(mu + 0.5) * mp.e ** (-(x * x + y * y) * r * r / om) * emu(2 * x * y * r / om)
        return k * float(f(float(y))) * abs(y) ** (2 * mu) * mp.e ** (-y * y)

    ref = mp.quad(integrand, [0.2, 0.8, 1.4])
    assert float(semigroup_values(mu, f, x, r)) == pytest.approx(float(ref), rel=1e-9)


def test_quadrature_vs_spectral():
    assert quad_vs_spectral() <= 1e-5


def test_quadrature_error_reporting():
    v, e = semigroup_values(0.5, F.clipped_sine(), X, 0.7, return_error=True)
    assert np.all(e >= 0) and np.all(e <= 1e-8)
    with pytest.raises(ValueError):
        semigroup_values(0.5, F.constant(1.0), 0.0, 1.0)
    with pytest.raises(ValueError):
        semigroup_values(0.5, F.constant(1.0), 0.0, 1 - 1e-12)


def test_nonconvergence_is_explicit():
    # millions of undeclared jumps cannot be resolved by panel doubling
    bad = F.SampledFunction(lambda y: np.sign(np.sin(1e7 * y)), name="undeclared jumps")
    with pytest.raises(QuadratureError) as ei:
        semigroup_values(0.5, bad, 0.3, 0.5, tol=1e-12)
    assert ei.value.achieved > 0


@pytest.mark.parametrize("mu", [0.0, 0.5, 2.0])
def test_positivity(mu):
    for f in (F.indicator(-1, 0.5), F.triangular_bump(2.0, 0.3), F.clipped_sine().absolute()):
        for t in (0.05, 1.0, 4.0):
            assert np.min(semigroup_values(mu, f, X, math.exp(-t))) >= -1e-10


def test_negativity_for_negative_mu():
    f, t, x, v = negativity_example(-0.25)
    assert np.min(f(np.linspace(-5, 5, 1001))) >= 0
    assert v < 0
    assert float(semigroup_values(-0.25, f, x, math.exp(-t))) == v
    assert negativity_example(0.5) is None


def test_half_line_operator():
    # the half-line operator only sees f on y > 0
    f = F.indicator(-2.0, -1.0)
    assert np.all(half_line_values(0.5, f, np.array([0.5, 1.0]), 0.5) == 0)


@given(st.sampled_from(MU_GRID), st.floats(0.05, 3.0), st.floats(0.05, 3.0))
def test_semigroup_property_spectral(mu, t1, t2):
    rng = np.random.default_rng(int(1e3 * t1))
    p = F.polynomial(PolyCoeffs(rng.uniform(-1, 1, 5)))
    sc = spectral_coeffs(mu, p, 8)
    mid = F.polynomial(sc.poly(t2))
    x = np.linspace(-3, 3, 13)
    assert np.max(np.abs(spectral_coeffs(mu, mid, 8).evaluate(t1, x) - sc.evaluate(t1 + t2, x))) <= 1e-5


def test_semigroup_property_quadrature():
    f = F.triangular_bump(0.5, 1.0)
    x = np.linspace(-2, 2, 9)
    r1, r2 = 0.6, 0.8
    inner = lambda y: semigroup_values(0.5, f, np.ravel(y), r2).reshape(np.shape(y))  # noqa: E731
    g = F.SampledFunction(inner, name="T f")
    lhs = semigroup_values(0.5, g, x, r1, tol=1e-9)
    rhs = semigroup_values(0.5, f, x, r1 * r2)
    assert np.max(np.abs(lhs - rhs)) <= 1e-7


def test_spectral_examples():
    for mu in MU_GRID:
        for k in (0, 3, 6):
            sc = spectral_coeffs(mu, F.hermite(mu, k), 8)
            c = sc.coeffs.copy()
            assert c[k] == pytest.approx(1.0, abs=1e-8)
            c[k] = 0
            assert np.max(np.abs(c)) <= 1e-8
        assert apply_spectral(mu, 0.7, F.constant(1.0), 1.3) == pytest.approx(1.0, abs=1e-12)
    x = np.linspace(-2, 2, 5)
    assert np.allclose(apply_spectral(0.5, 1.0, F.hermite(0.5, 2), x), math.exp(-2) * hermite_gen(0.5, 2, x))


def test_spectral_evolve():
    sc = spectral_coeffs(0.5, F.polynomial([1.0, -2.0, 0.5, 0.25]), 6)
    x = np.linspace(-2, 2, 7)
    assert np.allclose(sc.evolve(0.4).evaluate(0.6, x), sc.evaluate(1.0, x), rtol=1e-13)


# ---------------------------------------------------------------- generator and ODE


def test_generator_examples():
    for mu in (-0.25, 0.5, 2.0):
        assert np.all(l_mu_apply(mu, PolyCoeffs([1.0])).coeffs == 0)
        out = l_mu_apply(mu, PolyCoeffs([0.0, 1.0])).coeffs
        assert np.allclose(out[:2], [0.0, -1.0], atol=1e-15)


@pytest.mark.parametrize("mu", [-0.25, 0.5, 2.0])
def test_generator_eigen(mu):
    for n in range(13):
        p = hermite_coeffs(mu, n)
        assert (l_mu_apply(mu, p) + p * n).norm() <= 1e-9 * p.norm()


@given(st.sampled_from([-0.25, 0.5, 2.0]),
       st.lists(st.floats(-2, 2), min_size=1, max_size=8),
       st.floats(0.1, 3.0))
def test_generator_against_definition(mu, coeffs, x):
    """Compare with f''/2 + (mu/x - x) f' - mu (f(x) - f(-x)) / (2 x^2) at a nonzero point."""
    p = PolyCoeffs(coeffs)
    direct = (0.5 * p.deriv(2)(x) + (mu / x - x) * p.deriv()(x) - mu * (p(x) - p(-x)) / (2 * x * x))
    assert l_mu_apply(mu, p)(x) == pytest.approx(direct, rel=1e-9, abs=1e-9 * (1 + p.abs_scale(x)) * (1 + 1 / x**2))


def test_ode_residual():
    g = np.concatenate([-np.geomspace(1e-3, 6, 200), np.geomspace(1e-3, 6, 200)])
    for mu in MU_GRID:
        assert ode_residual(mu, 0, g) == 0.0
        assert ode_residual(mu, 1, g) <= 1e-12
        for n in range(13):
            assert ode_residual(mu, n, g) <= 1e-8


def test_commutation():
    rng = np.random.default_rng(4)
    x = np.linspace(-4, 4, 41)
    h = 1e-4
    for mu in MU_GRID:
        sc = spectral_coeffs(mu, F.polynomial(PolyCoeffs(rng.uniform(-1, 1, 5))), 8)
        for t in (0.2, 1.0):
            fd = (sc.poly(t + h)(x) - sc.poly(t - h)(x)) / (2 * h)
            gen = l_mu_apply(mu, sc.poly(t))(x)
            assert np.max(np.abs(fd - gen)) <= 1e-5 * np.max(np.abs(gen))
