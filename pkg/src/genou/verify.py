"""Invariant check suites behind ``genou verify``.

Each check returns a CheckResult with the measured quantity and the threshold
it is held to; a check that raises is reported as a failure with the error text.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from . import functions as F
from .kernel import (
    KernelPoint,
    kernel_upper_bound,
    log_kernel,
    mehler_closed_form,
    mehler_kernel,
    mehler_series,
    natanson_l1,
    natanson_reference,
    prefactor_bound_gap,
    bound_exponent_gap,
)
from .measure import (
    IntervalFamily,
    LambdaMeasure,
    build_grid,
    distribution,
    h_distribution,
    hl_maximal,
    integrate,
    lambda_mass,
)
from .semigroup import (
    SemigroupParams,
    apply_quadrature,
    l_mu_apply,
    negativity_example,
    ode_residual,
    semigroup_values,
    spectral_coeffs,
)
from .specfun import (
    PolyCoeffs,
    _asymptotic_coeffs,
    _asymptotic_sum,
    _bessel_series_scaled,
    emu,
    emu_negativity_witness,
    emu_scaled,
    gen_factorial,
    hermite_coeffs,
    hermite_gen,
    hermite_norm_sq,
)

MU_GRID = (-0.25, 0.0, 0.5, 2.0)
EMU_MU_GRID = (-0.4, -0.25, 0.25, 0.5, 1.0, 3.0)


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        s = f"[{tag}] {self.suite}: {self.name}  measured={self.measured:.3e}  threshold={self.threshold:.3e}"
        if self.detail:
            s += f"  ({self.detail})"
        return s


def _run(suite: str, name: str, threshold: float, fn: Callable[[], tuple]) -> CheckResult:
    """fn returns (measured, passed[, detail])."""
    t0 = time.perf_counter()
    try:
        out = fn()
        measured, passed = float(out[0]), bool(out[1])
        detail = out[2] if len(out) > 2 else ""
    except Exception as exc:  # a crashing check is a failing check
        measured, passed, detail = math.nan, False, f"{type(exc).__name__}: {exc}"
    return CheckResult(suite, name, passed, measured, threshold, detail, time.perf_counter() - t0)


def _le(v, thr):
    return v, v <= thr


# --------------------------------------------------------------------------- specfun


def hermite_gram_errors(mus=MU_GRID, n_max: int = 12):
    """(max normalized off-diagonal inner product, max relative diagonal error) over the mu grid."""
    off = diag = 0.0
    for mu in mus:
        g = build_grid(mu, tol=1e-13)
        H = np.array([hermite_gen(mu, n, g.nodes) for n in range(n_max + 1)])
        gram = (H * g.weights) @ H.T
        norms = np.array([hermite_norm_sq(mu, n) for n in range(n_max + 1)])
        scale = np.sqrt(np.outer(norms, norms))
        rel = np.abs(gram) / scale
        np.fill_diagonal(rel, 0.0)
        off = max(off, float(rel.max()))
        diag = max(diag, float(np.max(np.abs(np.diag(gram) / norms - 1))))
    return off, diag


def emu_agreement(mus=EMU_MU_GRID, x=None):
    """Max pairwise relative discrepancy among the series, Bessel and integral forms."""
    x = np.linspace(-20, 20, 401) if x is None else x
    worst = 0.0
    for mu in mus:
        for xv in x:
            vals = [emu(mu, xv, m, scaled=True).value for m in ("series", "bessel", "integral")]
            for i in range(3):
                for j in range(i):
                    d = abs(vals[i] - vals[j]) / max(abs(vals[i]), abs(vals[j]), 1e-300)
                    worst = max(worst, d)
    return worst


def specfun_checks():
    S = "specfun"
    out = []

    def factorials():
        e1 = max(abs(gen_factorial(0.0, n) - math.factorial(n)) / math.factorial(n) for n in range(21))
        e2 = max(abs(gen_factorial(mu, 1) - (2 * mu + 1)) / abs(2 * mu + 1) for mu in (-0.4, 0.3, 2.0))
        return _le(max(e1, e2), 1e-13)

    out.append(_run(S, "gamma_0(n) = n!, gamma_mu(1) = 2mu+1", 1e-13, factorials))

    gram = {}

    def ortho():
        gram["v"] = hermite_gram_errors()
        return _le(gram["v"][0], 1e-8)

    out.append(_run(S, "orthogonality n<m<=12, mu in {-0.25,0,0.5,2}", 1e-8, ortho))
    out.append(_run(S, "norm identity ||H_n||^2", 1e-7, lambda: _le(gram["v"][1], 1e-7) if "v" in gram else (math.nan, False)))

    def parity():
        bad = 0
        for mu in MU_GRID:
            for n in range(65):
                c = hermite_coeffs(mu, n).coeffs
                bad += int(np.count_nonzero(c[(n + 1) % 2::2]))
        return bad, bad == 0

    out.append(_run(S, "parity: wrong-parity coefficient slots vanish (n<=64)", 0, parity))

    def coeff_eval():
        x = np.linspace(-5, 5, 201)
        worst = 0.0
        for mu in MU_GRID:
            for n in range(65):
                p = hermite_coeffs(mu, n)
                d = np.abs(p(x) - hermite_gen(mu, n, x)) / np.maximum(p.abs_scale(x), 1e-300)
                worst = max(worst, float(d.max()))
        return _le(worst, 1e-9) + ("relative to sum |c_k||x|^k",)

    out.append(_run(S, "hermite_coeffs vs hermite_gen, |x|<=5, n<=64", 1e-9, coeff_eval))

    def horner():
        x = np.linspace(-10, 10, 401)
        worst = 0.0
        for mu in MU_GRID:
            for n in range(0, 65, 4):
                p = hermite_coeffs(mu, n)
                worst = max(worst, float(np.max(np.abs(p(x) - p.eval_terms(x)) / np.maximum(p.abs_scale(x), 1e-300))))
        return _le(worst, 1e-12)

    out.append(_run(S, "Horner vs term-by-term, |x|<=10", 1e-12, horner))

    def bessel():
        half = max(
            abs(float(_bessel_series_scaled(-0.5, np.array([1.0]))[0]) * math.e - math.sqrt(2 / math.pi) * math.cosh(1))
            / (math.sqrt(2 / math.pi) * math.cosh(1)),
            abs(float(_bessel_series_scaled(0.5, np.array([1.0]))[0]) * math.e - math.sqrt(2 / math.pi) * math.sinh(1))
            / (math.sqrt(2 / math.pi) * math.sinh(1)),
        )
        sw = 0.0
        for nu in (-0.9, -0.5, 0.0, 0.75, 1.5, 3.5):
            x = np.array([30.0])
            a = _bessel_series_scaled(nu, x)[0]
            b = _asymptotic_sum(_asymptotic_coeffs(nu, 80), x)[0] / math.sqrt(2 * math.pi * 30.0)
            sw = max(sw, abs(a - b) / abs(a))
        return max(half, sw), half <= 1e-14 and sw <= 1e-10, f"half-integer {half:.1e}, switch {sw:.1e}"

    out.append(_run(S, "I_nu half-integer closed forms; branch agreement at x=30", 1e-10, bessel))
    out.append(_run(S, "e_mu series/Bessel/integral agreement on [-20,20]", 1e-8, lambda: _le(emu_agreement(), 1e-8)))

    def e0():
        x = np.linspace(-20, 20, 401)
        worst = max(abs(emu(0.0, v, m).value - math.exp(v)) / math.exp(v) for v in x
                    for m in ("series", "bessel", "integral"))
        return _le(worst, 1e-12)

    out.append(_run(S, "e_0(x) = exp(x)", 1e-12, e0))

    def bound23():
        x = np.linspace(0, 700, 7001)
        cs, domin = [], 0.0
        for mu in EMU_MU_GRID:
            c = emu_scaled(mu, x) * (1 + x) ** mu
            cs.append(float(c.max()))
            # settling: the tail value matches the value halfway out
            if abs(c[-1] - c[len(c) // 2]) > 0.01 * c[-1]:
                return math.inf, False, f"no plateau for mu={mu}"
            xs = np.linspace(-20, 20, 401)
            domin = max(domin, float(np.max(np.abs(emu_scaled(mu, xs)) - emu_scaled(mu, np.abs(xs)))))
        return max(cs), domin <= 1e-15 and all(np.isfinite(cs)), f"C per mu {np.round(cs, 4).tolist()}"

    out.append(_run(S, "e_mu(|x|) <= C (1+|x|)^-mu e^|x|; |e_mu(x)| <= e_mu(|x|)", math.inf, bound23))

    def ineq19():
        x = np.linspace(0, 6, 600001)
        worst = 0.0
        for k in range(9):
            num = float(np.max(x**k * np.exp(-x * x / 2)))
            exact = (k / math.e) ** (k / 2) if k else 1.0
            worst = max(worst, abs(num - exact) / exact)
        return _le(worst, 1e-6)

    out.append(_run(S, "sup |x|^k e^-x^2 / e^-x^2/2 = (k/e)^(k/2), k<=8", 1e-6, ineq19))

    for mu in (-0.4, -0.25, -0.1):
        def wit(mu=mu):
            x = emu_negativity_witness(mu)
            v, far = emu(mu, x).value, emu(mu, 2 * x).value
            return far, v < 0 and far < 0, f"x*={x:.6g}, e_mu(x*)={v:.2e}"
        out.append(_run(S, f"e_mu negativity witness, mu={mu}", 0.0, wit))
    return out


# --------------------------------------------------------------------------- measure


def h_distribution_trend(mu: float, n_eta: int = 49):
    """(sup eta * lambda{h > eta}, last-decade log-log slope) on eta in [e, 1e6]."""
    etas = np.geomspace(math.e, 1e6, n_eta)
    est = h_distribution(mu, etas)
    prod = np.array([e.eta * e.mass for e in est])
    last = etas >= 1e5
    slope = np.polyfit(np.log(etas[last]), np.log(prod[last]), 1)[0]
    return float(prod.max()), float(slope), prod


def natanson_inequality_gap(n_triples: int = 200, seed: int = 42, mu_choices=MU_GRID):
    """max over random (g, f, x) of (int g f dlambda - ||g||_1 M f(x)) / (||g||_1 M f(x))."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    fam = IntervalFamily.geometric().refine()
    for _ in range(n_triples):
        mu = float(rng.choice(mu_choices))
        x = float(rng.uniform(-3, 3))
        # unimodal g: piecewise linear, increasing up to x and decreasing after
        left = np.sort(rng.uniform(0.05, 2.0, 3))[::-1]
        right = np.sort(rng.uniform(0.05, 2.0, 3))
        kn = np.concatenate([x - left, [x], x + right])
        up = np.sort(rng.uniform(0, 1, 3))
        down = np.sort(rng.uniform(0, 1, 3))[::-1]
        vals = np.concatenate([[0.0], up[1:], [1.0 + rng.uniform()], down[:-1], [0.0]])
        g = F.piecewise_linear(kn, vals)
        fk = np.sort(rng.uniform(-4, 4, 6))
        f = F.piecewise_linear(fk, np.concatenate([[0.0], rng.uniform(0, 3, 4), [0.0]]))
        from .maximal import l1_norm

        edges = np.unique(np.concatenate([kn, fk, [0.0]]))
        from .measure import integrate_panels

        lhs = float(integrate_panels(mu, lambda y: g(y) * f(y), edges).sum())
        rhs = l1_norm(mu, g) * hl_maximal(mu, f, x, fam)
        if rhs > 0:
            worst = max(worst, (lhs - rhs) / rhs)
    return worst


def measure_checks(seed: int = 42):
    S = "measure"
    out = []

    def masses():
        errs = []
        for mu in (-0.4, -0.25, 0.0, 0.5, 2.0, 7.5):
            errs.append(abs(lambda_mass(mu, -np.inf, np.inf) / math.exp(gammaln(mu + 0.5)) - 1))
        errs.append(abs(lambda_mass(0.0, 0, np.inf) / (math.sqrt(math.pi) / 2) - 1))
        errs.append(abs(lambda_mass(0.3, 1.0, 1.0)))
        return _le(max(errs), 1e-10)

    out.append(_run(S, "lambda_mass totals and half-line Gaussian", 1e-10, masses))

    def self_test():
        for mu in (-0.45, -0.25, 0.0, 0.5, 2.0, 10.0):
            LambdaMeasure(mu)
        return 0.0, True

    out.append(_run(S, "LambdaMeasure total-mass self test", 1e-10, self_test))

    def grid_examples():
        worst = 0.0
        for mu in MU_GRID:
            g = build_grid(mu, (-10, 10), tol=1e-12)
            worst = max(worst, abs(integrate(lambda y: np.ones_like(y), g) / lambda_mass(mu, -10, 10) - 1))
            p3 = hermite_coeffs(mu, 3)
            worst = max(worst, abs(integrate(lambda y: p3(y) ** 2, g) / hermite_norm_sq(mu, 3) - 1))
            p1, p2 = hermite_coeffs(mu, 1), hermite_coeffs(mu, 2)
            worst = max(worst, abs(integrate(lambda y: p1(y) * p2(y), g)))
        return _le(worst, 1e-7)

    out.append(_run(S, "build_grid: mass, H_1 H_2 = 0, ||H_3||^2", 1e-7, grid_examples))

    def dist_examples():
        x = np.linspace(-5, 5, 2048)
        e1 = abs(distribution(0.5, F.indicator(1.0, 2.0).scaled(2.0), 1.0, x).mass - lambda_mass(0.5, 1.0, 2.0))
        e2 = abs(distribution(0.5, F.constant(1.0), 0.5, x).mass - 1.0)
        e3 = distribution(0.5, F.constant(0.0), 0.1, x).mass
        tri = F.triangular_bump(0.3, 1.0, 4.0)
        masses = [distribution(-0.25, tri, eta, x).mass for eta in np.geomspace(0.01, 5, 30)]
        mono = float(np.max(np.diff(masses), initial=0.0))
        return max(e1, e2, e3, mono), max(e1, e2, e3) <= 1e-6 and mono <= 0

    out.append(_run(S, "distribution examples and monotonicity in eta", 1e-6, dist_examples))

    def prop24():
        sups, slopes = [], []
        for mu in MU_GRID:
            s, sl, _ = h_distribution_trend(mu)
            sups.append(s)
            slopes.append(sl)
        return max(slopes), all(np.isfinite(sups)) and max(slopes) <= 0.05, f"sup eta*mass {np.round(sups, 4).tolist()}"

    out.append(_run(S, "eta * lambda{h > eta} bounded, last-decade slope", 0.05, prop24))

    def hl():
        fam = IntervalFamily.geometric()
        c = max(abs(hl_maximal(mu, F.constant(2.5), x, fam) - 2.5) for mu in MU_GRID for x in (-1.0, 0.0, 2.0))
        f = F.clipped_sine()
        dec = 0.0
        for x in (-1.3, 0.2, 2.2):
            a = hl_maximal(0.5, f.absolute(), x, fam)
            b = hl_maximal(0.5, f.absolute(), x, fam.refine())
            dec = max(dec, (a - b) / a)
        # refinement is a superset of intervals; allow summation-order rounding only
        return max(c / 2.5, dec), c / 2.5 <= 1e-10 and dec <= 1e-13

    out.append(_run(S, "M_lambda of constants; refinement never decreases", 1e-10, hl))

    def natanson():
        gap = natanson_inequality_gap(200, seed)
        return _le(gap, 1e-6)

    out.append(_run(S, f"Natanson inequality, 200 random triples (seed {seed})", 1e-6, natanson))
    return out


# --------------------------------------------------------------------------- kernel


def mehler_errors(mus=MU_GRID, n_terms: int = 60, zs=(0.1, 0.3, 0.5, 0.7), npts: int = 13):
    """Max relative error of the n-term series against the closed form, split by sign of xyz."""
    pos = neg = 0.0
    grid = np.linspace(-3, 3, npts)
    for mu in mus:
        for z in zs:
            for zz in (z, -z):
                for x in grid:
                    for y in grid:
                        s = mehler_series(mu, zz, x, y, n_terms).value
                        c = mehler_closed_form(mu, zz, x, y).to_float()
                        rel = abs(s - c) / abs(c)
                        if x * y * zz >= 0:
                            pos = max(pos, rel)
                        else:
                            neg = max(neg, rel)
    return pos, neg


def natanson_ratio_sup(mus=(-0.25, 0.0, 1.0), nx: int = 40, nr: int = 40):
    xs = np.linspace(0.1, 6, nx)
    one_m = np.geomspace(0.45, 0.001, nr)
    sup = 0.0
    for mu in mus:
        for x in xs:
            for om in one_m:
                r = 1 - om
                sup = max(sup, natanson_l1(mu, r, x) / natanson_reference(mu, r, x))
    return sup


def kernel_checks():
    S = "kernel"
    out = []

    def symmetry():
        rng = np.random.default_rng(0)
        x, y = rng.uniform(-50, 50, (2, 2000))
        r = 1 - 10 ** rng.uniform(-12, -0.01, 2000)
        worst = 0.0
        for mu in MU_GRID:
            a = log_kernel(mu, r, x, y)
            b = log_kernel(mu, r, y, x)
            same = a[1] == b[1]  # also covers matching -inf from exact zeros of e_mu
            d = np.where(same, 0.0, np.abs(a[1] - b[1]) / np.maximum(1.0, np.abs(a[1])))
            worst = max(worst, float(np.max(d)), float(np.max(np.abs(a[0] - b[0]))))
        return _le(worst, 1e-12)

    out.append(_run(S, "K_r(x,y) = K_r(y,x) in log space", 1e-12, symmetry))

    def small_r():
        worst = max(abs(mehler_kernel(KernelPoint(mu, 1e-8, x, y)).to_float() * math.exp(gammaln(mu + 0.5)) - 1)
                    for mu in MU_GRID for x in (-2, 0.5, 3) for y in (-1, 2))
        return _le(worst, 1e-6)

    out.append(_run(S, "K_r -> 1/Gamma(mu+1/2) as r -> 0", 1e-6, small_r))

    def mu0_closed():
        worst = 0.0
        for r in (0.1, 0.5, 0.9, 0.999):
            for x in (-2.0, 0.3, 3.0):
                for y in (-1.0, 2.5):
                    om = 1 - r * r
                    exact = -0.5 * math.log(om) + (-(x * x + y * y) * r * r + 2 * x * y * r) / om - 0.5 * math.log(math.pi)
                    worst = max(worst, abs(mehler_kernel(KernelPoint(0.0, r, x, y)).log_abs - exact) / max(1, abs(exact)))
        return _le(worst, 1e-12)

    out.append(_run(S, "mu = 0 closed form", 1e-12, mu0_closed))

    def majorization():
        g = np.linspace(-4, 4, 33)
        X, Y = np.meshgrid(g, g)
        worst = -math.inf
        for mu in MU_GRID:
            for r in (0.1, 0.5, 0.9, 0.99):
                a = log_kernel(mu, r, X, Y)
                b = log_kernel(mu, r, np.abs(X), np.abs(Y))
                pos = a[0] > 0
                worst = max(worst, float(np.max(np.where(pos, a[1] - b[1], -np.inf))))
        return _le(worst, 1e-12)

    out.append(_run(S, "K_r(x,y) <= K_r(|x|,|y|)", 1e-12, majorization))

    def positivity():
        g = np.linspace(-6, 6, 41)
        X, Y = np.meshgrid(g, g)
        neg = 0
        for mu in (0.0, 0.5, 2.0):
            for r in (0.1, 0.5, 0.9):
                neg += int(np.sum(log_kernel(mu, r, X, Y)[0] <= 0))
        return neg, neg == 0

    out.append(_run(S, "kernel sign = +1 for mu >= 0", 0, positivity))

    merr = {}

    def mehler60():
        merr["v"] = mehler_errors()
        return max(merr["v"]), max(merr["v"]) <= 1e-8, f"xyz>=0: {merr['v'][0]:.2e}, xyz<0: {merr['v'][1]:.2e}"

    out.append(_run(S, "Mehler 60-term series vs closed form, |z|<=0.7, |x|,|y|<=3", 1e-8, mehler60))

    def mehler_conv():
        worst = 0.0
        for mu in MU_GRID:
            for z in (0.3, 0.5):
                for x in np.linspace(0, 3, 7):
                    for y in np.linspace(0, 3, 7):
                        s = mehler_series(mu, z, x, y, 120).value
                        c = mehler_closed_form(mu, z, x, y).to_float()
                        worst = max(worst, abs(s - c) / abs(c))
        return _le(worst, 1e-8)

    out.append(_run(S, "Mehler 120-term series vs closed form, z<=0.5, x,y>=0", 1e-8, mehler_conv))

    def exponent():
        rng = np.random.default_rng(1)
        r = rng.uniform(0.01, 0.99, 1000)
        x, y = rng.uniform(0, 6, (2, 1000))
        gap = np.abs(bound_exponent_gap(r, x, y)) / np.maximum(1, np.abs(x * x))
        return _le(float(gap.max()), 1e-10)

    out.append(_run(S, "kernel exponent identity at 1000 random points", 1e-10, exponent))

    def domination():
        g = np.linspace(0, 6, 25)
        c = 0.0
        eq = 0.0
        for mu in (0.0, 0.5, 2.0):
            for r in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99):
                for x in g:
                    for y in g:
                        p = KernelPoint(mu, r, x, y)
                        d = mehler_kernel(p).log_abs + gammaln(mu + 0.5) - kernel_upper_bound(p).log_abs
                        c = max(c, d)
                        if mu == 0.0:
                            eq = max(eq, abs(d))
        return math.exp(c), eq <= 1e-12, f"C = {math.exp(c):.4f}; mu=0 equality {eq:.1e}"

    out.append(_run(S, "Gamma K_r <= C * majorant (mu >= 0)", math.inf, domination))

    def prefactor():
        sups = []
        for n in (30, 60):
            worst = -math.inf
            for mu in (-0.25, 0.5):
                for r in np.linspace(0.5, 0.999, n):
                    for x in np.geomspace(0.05, 8, n):
                        y = np.linspace(x / (2 * r), 4 * x / r, n)
                        worst = max(worst, float(np.max(1 - prefactor_bound_gap(mu, r, x, y))))
            sups.append(worst)
        stable = abs(sups[1] - sups[0]) <= 0.05 * sups[0]
        return sups[1], np.isfinite(sups[1]) and stable, f"LHS/RHS sup {sups[0]:.4f} -> {sups[1]:.4f} on doubling"

    out.append(_run(S, "prefactor bound on [x/2r, 4x/r]: finite stable constant", math.inf, prefactor))

    def nat():
        a = natanson_ratio_sup(nx=20, nr=20)
        b = natanson_ratio_sup(nx=40, nr=40)
        return b, abs(b - a) <= 0.05 * a, f"sup {a:.4f} -> {b:.4f} on doubling"

    out.append(_run(S, "Natanson kernel L1 ratio bounded, stable on doubling", 0.05, nat))

    def nat_slope():
        om = np.geomspace(1e-3, 1e-6, 8)
        v = [natanson_l1(0.5, 1 - o, 1.0) for o in om]
        s = np.polyfit(np.log(1 - (1 - om) ** 2), np.log(v), 1)[0]
        return abs(s - 0.5), abs(s - 0.5) <= 0.05, f"slope {s:.4f}"

    out.append(_run(S, "Natanson L1 ~ (1-r^2)^(1/2) as r -> 1", 0.05, nat_slope))
    return out


# --------------------------------------------------------------------------- semigroup


def eigen_errors(mus=MU_GRID, ts=(0.1, 1.0, 3.0), n_max: int = 8, x=None, tol: float = 1e-15):
    """max over (mu, t, n) of sup_x |T^t H_n - e^{-nt} H_n| / sup_x |e^{-nt} H_n|.

    At n = 8, t = 3 the answer is e^24 times smaller than the integral of the
    absolute integrand, so the quadrature runs at its rounding floor.
    """
    x = np.linspace(-3, 3, 61) if x is None else x
    worst = 0.0
    for mu in mus:
        for t in ts:
            for n in range(n_max + 1):
                v = semigroup_values(mu, F.hermite(mu, n), x, math.exp(-t), tol=tol)
                ex = math.exp(-n * t) * hermite_gen(mu, n, x)
                worst = max(worst, float(np.max(np.abs(v - ex)) / np.max(np.abs(ex))))
    return worst


def quad_vs_spectral(mus=MU_GRID, ts=(0.1, 1.0, 3.0), seed: int = 7):
    rng = np.random.default_rng(seed)
    x = np.linspace(-3, 3, 25)
    worst = 0.0
    for mu in mus:
        for deg in range(7):
            p = F.polynomial(PolyCoeffs(rng.uniform(-1, 1, deg + 1)))
            sc = spectral_coeffs(mu, p, 8)
            for t in ts:
                a = semigroup_values(mu, p, x, math.exp(-t))
                b = sc.evaluate(t, x)
                worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def semigroup_checks():
    S = "semigroup"
    out = []
    x = np.linspace(-4, 4, 41)

    def conservation():
        worst = 0.0
        for mu in (0.0, 0.5, 2.0):
            for t in (0.05, 0.5, 2.0, 10.0):
                worst = max(worst, float(np.max(np.abs(semigroup_values(mu, F.constant(1.0), x, math.exp(-t)) - 1))))
        return _le(worst, 1e-6)

    out.append(_run(S, "T^t 1 = 1 (quadrature, mu >= 0)", 1e-6, conservation))

    def conservation_neg():
        q = max(float(np.max(np.abs(semigroup_values(-0.25, F.constant(1.0), x, math.exp(-t)) - 1)))
                for t in (0.05, 0.5, 2.0, 10.0))
        s = max(float(np.max(np.abs(spectral_coeffs(-0.25, F.constant(1.0), 4).evaluate(t, x) - 1)))
                for t in (0.05, 0.5, 2.0, 10.0))
        return max(q / 1e-4, s / 1e-6), q <= 1e-4 and s <= 1e-6, f"quadrature {q:.1e}, spectral {s:.1e}"

    out.append(_run(S, "T^t 1 = 1 for mu = -0.25 (quadrature 1e-4, spectral 1e-6)", 1.0, conservation_neg))
    out.append(_run(S, "T^t H_n = e^-nt H_n, n<=8, t in {0.1,1,3} (sup-relative)", 1e-6, lambda: _le(eigen_errors(), 1e-6)))
    out.append(_run(S, "quadrature vs spectral, polynomials deg<=6", 1e-5, lambda: _le(quad_vs_spectral(), 1e-5)))

    def t_large():
        worst = 0.0
        for mu in MU_GRID:
            f = F.triangular_bump(0.7, 0.5, 2.0)
            from .maximal import l1_norm

            mean = l1_norm(mu, f) / math.exp(gammaln(mu + 0.5))
            worst = max(worst, abs(apply_quadrature(SemigroupParams(mu, 30.0), f, 1.3) - mean))
        return _le(worst, 1e-6)

    out.append(_run(S, "t = 30: T^t f -> lambda-mean of f", 1e-6, t_large))

    def generator():
        worst = 0.0
        for mu in (-0.25, 0.5, 2.0):
            for n in range(13):
                p = hermite_coeffs(mu, n)
                worst = max(worst, (l_mu_apply(mu, p) + p * n).norm() / p.norm())
        return _le(worst, 1e-9)

    out.append(_run(S, "L_mu H_n = -n H_n (coefficients)", 1e-9, generator))

    def ode():
        g = np.concatenate([-np.geomspace(1e-3, 6, 300), np.geomspace(1e-3, 6, 300)])
        worst = max(ode_residual(mu, n, g) for mu in (-0.25, 0.0, 0.5, 2.0) for n in range(13))
        return _le(worst, 1e-8)

    out.append(_run(S, "Hermite ODE residual, n<=12", 1e-8, ode))

    def semigroup_property():
        rng = np.random.default_rng(3)
        worst = 0.0
        for mu in MU_GRID:
            p = F.polynomial(PolyCoeffs(rng.uniform(-1, 1, 5)))
            sc = spectral_coeffs(mu, p, 8)
            t1, t2 = 0.3, 0.9
            mid = F.polynomial(sc.poly(t2))
            a = spectral_coeffs(mu, mid, 8).evaluate(t1, x)
            b = sc.evaluate(t1 + t2, x)
            worst = max(worst, float(np.max(np.abs(a - b))))
        return _le(worst, 1e-5)

    out.append(_run(S, "T^t1 T^t2 = T^(t1+t2) (spectral)", 1e-5, semigroup_property))

    def commutation():
        rng = np.random.default_rng(4)
        worst = 0.0
        h = 1e-4
        for mu in MU_GRID:
            p = F.polynomial(PolyCoeffs(rng.uniform(-1, 1, 5)))
            sc = spectral_coeffs(mu, p, 8)
            for t in (0.2, 1.0):
                fd = (sc.poly(t + h)(x) - sc.poly(t - h)(x)) / (2 * h)
                gen = l_mu_apply(mu, sc.poly(t))(x)
                worst = max(worst, float(np.max(np.abs(fd - gen)) / np.max(np.abs(gen))))
        return _le(worst, 1e-5) + ("centered step 1e-4, relative to sup |L T f|",)

    out.append(_run(S, "d/dt T^t f = L_mu T^t f", 1e-5, commutation))

    def positivity():
        worst = 0.0
        fams = [F.indicator(-1, 0.5), F.triangular_bump(2.0, 0.3), F.clipped_sine().absolute()]
        for mu in (0.0, 0.5, 2.0):
            for f in fams:
                for t in (0.05, 1.0, 4.0):
                    worst = min(worst, float(np.min(semigroup_values(mu, f, x, math.exp(-t)))))
        return -worst, worst >= -1e-10

    out.append(_run(S, "T^t f >= 0 for f >= 0 (mu >= 0)", 1e-10, positivity))

    def negativity():
        ex = negativity_example(-0.25)
        if ex is None:
            return 0.0, False, "no negative value found"
        f, t, xv, v = ex
        return v, v < 0, f"f={f.name}, t={t:.4g}, x={xv:g}"

    out.append(_run(S, "mu = -0.25: some f >= 0 with T^t f(x) < 0", 0.0, negativity))
    return out


SUITES = {
    "specfun": specfun_checks,
    "measure": measure_checks,
    "kernel": kernel_checks,
    "semigroup": semigroup_checks,
}


def run_suite(name: str, seed: int = 42):
    if name == "all":
        out = []
        for k in SUITES:
            out.extend(run_suite(k, seed))
        return out
    if name not in SUITES:
        raise KeyError(name)
    if name == "measure":
        return measure_checks(seed)
    return SUITES[name]()
