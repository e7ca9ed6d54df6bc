import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from genou import functions as F
from genou.maximal import (
    R_MAX,
    R_MIN,
    RGrid,
    bump_family,
    l1_norm,
    linf_check,
    lp_experiment,
    majorant_sweep,
    maximal_fn,
    maximal_values,
    normalized_bump,
    halfline_majorant_check,
    symmetrization_gap,
    weak_type_experiment,
)
from genou.measure import LambdaMeasure
from genou.specfun import hermite_gen

MU_GRID = (-0.25, 0.0, 0.5, 2.0)


# ---------------------------------------------------------------- grid


@given(st.integers(2, 200))
def test_rgrid_default(n):
    g = RGrid.default(n)
    assert len(g) == n
    assert g.values[0] == R_MIN and g.values[-1] == R_MAX
    assert np.all(np.diff(g.values) > 0)


def test_rgrid_refine_is_superset():
    g = RGrid.default(10)
    h = g.refine()
    assert len(h) == 19
    assert set(g.values) <= set(h.values)


def test_rgrid_validation():
    with pytest.raises(ValueError):
        RGrid(np.array([]))
    with pytest.raises(ValueError):
        RGrid(np.array([0.5, 0.4]))
    with pytest.raises(ValueError):
        RGrid(np.array([0.5, 1.0]))
    with pytest.raises(ValueError):
        RGrid(np.array([0.0, 0.5]))
    g = RGrid.default(5)
    with pytest.raises(ValueError):
        g.values[0] = 0.2


# ---------------------------------------------------------------- T*f


@pytest.mark.parametrize("mu", MU_GRID)
def test_maximal_of_first_hermite(mu):
    rg = RGrid.default(16)
    for x in (-2.0, 0.5, 3.0):
        v, r = maximal_fn(mu, F.hermite(mu, 1), x, rg)
        assert r == R_MAX
        assert v == pytest.approx(abs(float(hermite_gen(mu, 1, x))) * R_MAX, rel=1e-7)


@pytest.mark.parametrize("mu", [0.0, 0.5, 2.0])
def test_maximal_of_constant(mu):
    v, _ = maximal_values(mu, F.constant(1.0), np.linspace(-3, 3, 7), RGrid.default(12))
    assert np.max(np.abs(v - 1)) <= 1e-8


def test_refinement_is_monotone():
    f = F.triangular_bump(1.0, 0.1)
    x = np.array([-1.5, 0.2, 1.0, 2.5])
    g = RGrid.default(12)
    a, _ = maximal_values(0.5, f, x, g)
    b, _ = maximal_values(0.5, f, x, g.refine())
    assert np.all(b >= a)


def test_bump_normalization():
    for mu in MU_GRID:
        for _, _, f in bump_family(mu, centers=(0.5, 3.0), widths=(0.2, 0.0125)):
            assert l1_norm(mu, f) == pytest.approx(1.0, rel=1e-12)
    f = normalized_bump(0.5, 1.0, 0.2)
    assert l1_norm(0.5, f.scaled(3.0)) == pytest.approx(3.0, rel=1e-12)


# ---------------------------------------------------------------- experiments


def test_weak_type_small():
    etas = np.geomspace(0.05, 50, 8)
    rep = weak_type_experiment(0.5, bumps=[(1.0, 0.2)], etas=etas, rg=RGrid.default(24), workers=1)
    masses = [row[3] for row in rep.rows]
    assert all(b <= a for a, b in zip(masses, masses[1:]))
    top = rep.bumps[0].tstar_max
    assert all(row[3] == 0 for row in rep.rows if row[2] > top)
    # no superlevel set can exceed the whole line
    total = LambdaMeasure(0.5).total_mass
    assert all(row[3] <= total * (1 + 1e-12) for row in rep.rows)
    assert 0 < rep.sup_ratio < 10
    assert rep.grids["n_r"] == 24 and rep.grids["n_eta"] == 8
    assert rep.sup_by_width() == {0.2: rep.sup_ratio}
    assert rep.sup_by_width(eta_min=1.0)[0.2] <= rep.sup_ratio


@pytest.mark.parametrize("mu", [0.0, 0.5, 2.0])
def test_linf_quick(mu):
    sup, recs = linf_check(mu, f_family=[F.constant(1.0), F.indicator(0.0, 1.0), F.clipped_sine()],
                           x_grid=np.linspace(-3, 3, 25), rg=RGrid.default(24))
    assert len(recs) == 3
    assert abs(sup - 1) <= 1e-6


def test_linf_requires_sup_norm():
    with pytest.raises(ValueError):
        linf_check(0.5, f_family=[F.polynomial([1.0, 1.0])], x_grid=[0.0], rg=RGrid.default(4))


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_lp_bounded(p):
    sup, out = lp_experiment(0.5, p, f_family=[F.constant(1.0), F.triangular_bump(0.5, 1.0)],
                             rg=RGrid.default(12), half_range=4.0, panel_width=0.5)
    assert out[0][1] == pytest.approx(1.0, abs=1e-6)
    assert 1.0 <= out[1][1] < 20


def test_lp_rejects_p_le_1():
    with pytest.raises(ValueError):
        lp_experiment(0.5, 1.0)


def test_majorant_zero_function():
    rec = halfline_majorant_check(0.5, F.constant(0.0), 1.0, 0.5)
    assert rec.ratio == 0.0


def test_majorant_scale_invariant():
    f = F.triangular_bump(1.0, 0.3)
    a = halfline_majorant_check(0.5, f, 1.2, 0.7)
    b = halfline_majorant_check(0.5, f.scaled(5.0), 1.2, 0.7)
    assert b.ratio == pytest.approx(a.ratio, rel=1e-9)
    with pytest.raises(ValueError):
        halfline_majorant_check(0.5, f, 0.0, 0.5)


def test_majorant_sweep_bounded():
    sup, recs = majorant_sweep(0.5, normalized_bump(0.5, 1.0, 0.2), np.linspace(0.25, 4, 6), RGrid.default(8))
    assert len(recs) == 48
    assert 0 < sup < 1e3


@pytest.mark.parametrize("mu", [0.0, 0.5, 2.0])
def test_symmetrization(mu):
    f = F.triangular_bump(-0.8, 0.4).scaled(2.0)
    gap = symmetrization_gap(mu, f, np.linspace(-3, 3, 13), RGrid.default(16))
    assert gap <= 1e-6


def test_symmetrization_signed_function():
    f = F.clipped_sine(1.3, 2.0, 1.0)
    assert symmetrization_gap(0.5, f, np.linspace(-2, 2, 9), RGrid.default(12)) <= 1e-6


def test_tstar_is_lower_bound_via_dense_grid():
    # the logit grid misses sup values by a small, decreasing amount
    f = normalized_bump(0.5, 2.0, 0.05)
    x = np.array([0.5, 1.0, 1.5])
    a, _ = maximal_values(0.5, f, x, RGrid.default(36))
    b, _ = maximal_values(0.5, f, x, RGrid.default(36).refine().refine())
    assert np.all(b >= a) and np.max((b - a) / b) < 0.2
    assert math.isfinite(float(np.max(b)))
