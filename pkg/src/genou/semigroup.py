"""The generalized Ornstein-Uhlenbeck semigroup T^t = exp(t L_mu).

Two independent evaluation paths:

* quadrature of  T^t f(x) = int K_r(x, y) f(y) dlambda(y),  r = e^-t, for general f;
* the spectral sum  sum_n c_n e^(-nt) H_n(x),  c_n = <f, H_n> / ||H_n||^2, for
  polynomial-like f.

Plus the generator L_mu acting on polynomials and the Hermite differential equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .functions import SampledFunction
from .measure import panel_rule, split_panels
from .quadrature import QuadratureError
from .specfun import (
    EPS,
    HERMITE_COEFF_CAP,
    MuLike,
    PolyCoeffs,
    as_mu,
    emu_scaled,
    hermite_coeffs,
    hermite_gen,
    hermite_norm_sq,
)

T_MIN = 1e-10
WINDOW = 7.0  # y-window half width in units of sqrt(1 - r^2); the Gaussian is e^-49 at its edge
PANEL_ORDER = 16
MAX_SUBPANELS = 4096
CHUNK = 2048


@dataclass(frozen=True)
class SemigroupParams:
    mu: float
    t: float

    def __post_init__(self):
        object.__setattr__(self, "mu", as_mu(self.mu))
        t = float(self.t)
        if not t >= T_MIN:
            raise ValueError(f"t must be >= {T_MIN:g} (the kernel degenerates to a delta at t = 0), got {self.t!r}")
        object.__setattr__(self, "t", t)

    @property
    def r(self) -> float:
        return math.exp(-self.t)

    @classmethod
    def from_r(cls, mu: MuLike, r: float) -> "SemigroupParams":
        if not 0 < r < 1:
            raise ValueError("r must lie in (0, 1)")
        return cls(mu, -math.log(r))


def as_sampled(f) -> SampledFunction:
    if isinstance(f, SampledFunction):
        return f
    if callable(f):
        return SampledFunction(f)
    raise TypeError("expected a SampledFunction or a callable")


# --------------------------------------------------------------------------- quadrature path


def _kernel_density(mu, x, r, y):
    """K_r(x, y) e^(-y^2) without the |y|^(2 mu) factor.

    Equal to exp(-(|y| - r|x|)^2/(1-r^2)) (1-r^2)^-(mu+1/2) / Gamma(mu+1/2) * e^-|z| e_mu(z),
    z = 2xyr/(1-r^2): a Gaussian bump in |y| centred at r|x|.
    """
    one_m = (1.0 - r) * (1.0 + r)
    z = 2.0 * x * y * r / one_m
    logk = -gammaln(mu + 0.5) - (mu + 0.5) * np.log(one_m) - (np.abs(y) - r * np.abs(x)) ** 2 / one_m
    return np.exp(logk) * emu_scaled(mu, z)


def _pieces(mu, f: SampledFunction, x, r, positive_only):
    """Integration pieces (a, b, pair index): the window around |y| = r|x| on each side,
    cut to the support of f and split at its breakpoints and 0."""
    s = np.sqrt((1.0 - r) * (1.0 + r))
    c = r * np.abs(x)
    # polynomial growth of f |y|^(2mu) pushes the negligible tail further out
    w = WINDOW + math.sqrt(f.growth + 2 * max(mu, 0.0))
    lo_abs = np.maximum(c - w * s, 0.0)
    hi_abs = c + w * s
    slo, shi = f.support
    cuts = np.asarray(f.cuts(), dtype=float)
    out_a, out_b, out_p = [], [], []
    for side in ((1.0,) if positive_only else (1.0, -1.0)):
        a = lo_abs if side > 0 else -hi_abs
        b = hi_abs if side > 0 else -lo_abs
        a = np.maximum(a, slo)
        b = np.minimum(b, shi)
        if positive_only:
            a = np.maximum(a, 0.0)
        ok = a < b
        if not np.any(ok):
            continue
        a, b = a[ok], b[ok]
        pidx = np.flatnonzero(ok)
        e = np.sort(np.column_stack([a, np.clip(cuts[None, :], a[:, None], b[:, None]), b]), axis=1)
        pa, pb = e[:, :-1], e[:, 1:]
        keep = pb > pa
        out_a.append(pa[keep])
        out_b.append(pb[keep])
        out_p.append(np.broadcast_to(pidx[:, None], pa.shape)[keep])
    if not out_a:
        return np.zeros(0), np.zeros(0), np.zeros(0, dtype=int)
    return np.concatenate(out_a), np.concatenate(out_b), np.concatenate(out_p)


def _eval_pieces(mu, f, x, r, pa, pb, pp, m):
    """Composite rule with m[i] equal sub-panels on piece i; returns (integral, abs integral)."""
    n_sub = int(m.sum())
    piece_of = np.repeat(np.arange(pa.size), m)
    start = np.cumsum(m) - m
    k = np.arange(n_sub) - start[piece_of]
    h = (pb - pa)[piece_of] / m[piece_of]
    # neighbouring sub-panels share bit-identical endpoints, so no sliver is lost or counted twice
    sa = pa[piece_of] + k * h
    sb = np.where(k == m[piece_of] - 1, pb[piece_of], pa[piece_of] + (k + 1) * h)
    y, w = panel_rule(mu, sa, sb, PANEL_ORDER, gaussian=False)
    pair = pp[piece_of][:, None]
    vals = w * _kernel_density(mu, x[pair], r[pair], y) * f(y)
    sub = vals.sum(axis=1)
    sub_abs = np.abs(vals).sum(axis=1)
    tot = np.zeros(pa.size)
    tot_abs = np.zeros(pa.size)
    np.add.at(tot, piece_of, sub)
    np.add.at(tot_abs, piece_of, sub_abs)
    return tot, tot_abs


def _core(mu, f, x, r, tol, positive_only):
    pa, pb, pp = _pieces(mu, f, x, r, positive_only)
    out = np.zeros(x.size)
    if pa.size == 0:
        return out, np.zeros(x.size)
    s = np.sqrt((1.0 - r) * (1.0 + r))[pp]
    m = np.maximum(1, np.ceil((pb - pa) / np.minimum(3.0 * s, 1.0))).astype(int)
    coarse, abs_c = _eval_pieces(mu, f, x, r, pa, pb, pp, m)
    scale = np.zeros(x.size)
    np.add.at(scale, pp, abs_c)
    n_pieces = np.bincount(pp, minlength=x.size)
    # the absolute floor keeps denormal-sized pieces from chasing rounding noise
    budget = np.maximum(np.maximum(tol, 8 * EPS) * scale[pp] / n_pieces[pp], 1e-290)
    err_tot = np.zeros(x.size)
    last_err = np.full(pa.size, np.inf)
    active = np.arange(pa.size)
    while active.size:
        m[active] *= 2
        if np.max(m[active]) > MAX_SUBPANELS:
            worst = active[np.argmax(m[active])]
            raise QuadratureError(
                f"semigroup quadrature did not converge at x={x[pp[worst]]!r}, r={r[pp[worst]]!r}",
                estimate=float(coarse[worst]),
                achieved=float(last_err[worst]),
            )
        fine, _ = _eval_pieces(mu, f, x, r, pa[active], pb[active], pp[active], m[active])
        err = np.abs(fine - coarse[active])
        coarse[active] = fine
        last_err[active] = err
        done = (err <= budget[active]) | (err == 0)
        np.add.at(err_tot, pp[active[done]], err[done])
        active = active[~done]
    np.add.at(out, pp, coarse)
    return out, err_tot


def semigroup_values(mu: MuLike, f, x, r, tol: float = 1e-10, positive_only: bool = False,
                     return_error: bool = False):
    """T^t f(x) with r = e^-t by quadrature, vectorized over broadcast (x, r).

    The integrand K_r(x, y) f(y) dlambda(y) is a Gaussian bump of width
    sqrt(1 - r^2) around |y| = r|x| (on both signs of y), so each side is
    integrated over a window of WINDOW widths, split at the breakpoints of f,
    with Gauss-Jacobi panels at y = 0 and Gauss-Legendre elsewhere. Sub-panels
    are doubled until successive results agree to ``tol`` relative to the
    integral of the absolute integrand.

    With ``positive_only`` only y > 0 contributes (the half-line operator
    applied at x, meant for x >= 0).
    """
    mu = as_mu(mu)
    f = as_sampled(f)
    if tol <= 0:
        raise ValueError("tol must be positive")
    x, r = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(r, dtype=float))
    shape = x.shape
    x, r = x.ravel(), r.ravel()
    if np.any((r <= 0) | (r >= 1)):
        raise ValueError("r must lie in (0, 1)")
    if np.any(1.0 - r < T_MIN * (1 - 1e-6)):
        raise ValueError(f"1 - r must be >= {T_MIN:g}")
    out = np.empty(x.size)
    err = np.empty(x.size)
    for i in range(0, x.size, CHUNK):
        sl = slice(i, i + CHUNK)
        out[sl], err[sl] = _core(mu, f, x[sl], r[sl], tol, positive_only)
    out, err = out.reshape(shape), err.reshape(shape)
    if return_error:
        return out, err
    return out[()] if out.ndim == 0 else out


def apply_quadrature(p: SemigroupParams, f, x: float, tol: float = 1e-10) -> float:
    """T^t f(x) by quadrature against the Mehler kernel."""
    return float(semigroup_values(p.mu, f, x, p.r, tol))


def half_line_values(mu: MuLike, f, x, r, tol: float = 1e-10):
    """int_0^inf K_r(x, y) f(y) dlambda(y): the semigroup restricted to y > 0."""
    return semigroup_values(mu, f, x, r, tol, positive_only=True)


# --------------------------------------------------------------------------- spectral path

SPECTRAL_HALF_WIDTH = 16.0


@dataclass(frozen=True, eq=False)
class SpectralCoeffs:
    """c_n = <f, H_n> / ||H_n||^2 for n = 0..N with the norms used."""

    mu: float
    coeffs: np.ndarray
    norm_sq: np.ndarray

    def __post_init__(self):
        if len(self.coeffs) != len(self.norm_sq):
            raise ValueError("coeffs and norm_sq must have equal length")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("spectral coefficients must be finite")

    @property
    def n_max(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, t: float, x):
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for n, c in enumerate(self.coeffs):
            if c != 0.0:
                acc = acc + c * math.exp(-n * t) * hermite_gen(self.mu, n, x)
        return acc

    def poly(self, t: float = 0.0) -> PolyCoeffs:
        """Monomial form of sum_n c_n e^(-nt) H_n."""
        acc = PolyCoeffs([0.0])
        for n, c in enumerate(self.coeffs):
            if c != 0.0:
                acc = acc + hermite_coeffs(self.mu, n) * (c * math.exp(-n * t))
        return acc

    def evolve(self, t: float) -> "SpectralCoeffs":
        """Coefficients of T^t f."""
        n = np.arange(len(self.coeffs))
        return SpectralCoeffs(self.mu, self.coeffs * np.exp(-n * t), self.norm_sq)


def spectral_coeffs(mu: MuLike, f, n_max: int, order: int = 24) -> SpectralCoeffs:
    """Hermite coefficients of f up to degree n_max by panel quadrature on [-16, 16].

    The panels are split at the breakpoints of f. Beyond |y| = 16 the weight
    e^(-y^2) makes every y^k dlambda tail with k <= 2 * 64 negligible.
    """
    mu = as_mu(mu)
    f = as_sampled(f)
    if not 0 <= n_max <= HERMITE_COEFF_CAP:
        raise ValueError(f"n_max must be in [0, {HERMITE_COEFF_CAP}]")
    L = SPECTRAL_HALF_WIDTH
    lo, hi = max(-L, f.support[0]), min(L, f.support[1])
    if not lo < hi:
        return SpectralCoeffs(mu, np.zeros(n_max + 1), np.array([hermite_norm_sq(mu, n) for n in range(n_max + 1)]))
    edges = [lo, hi] + [c for c in f.cuts() if lo < c < hi]
    pa, pb = split_panels(edges, max_width=0.5)
    y, w = panel_rule(mu, pa, pb, order)
    y, w = y.ravel(), w.ravel()
    fw = w * f(y)
    coeffs = np.empty(n_max + 1)
    norms = np.empty(n_max + 1)
    for n in range(n_max + 1):
        norms[n] = hermite_norm_sq(mu, n)
        coeffs[n] = np.dot(fw, hermite_gen(mu, n, y)) / norms[n]
    if not np.all(np.isfinite(coeffs)):
        bad = int(np.flatnonzero(~np.isfinite(coeffs))[0])
        raise QuadratureError(f"spectral coefficient c_{bad} is not finite", estimate=float("nan"), achieved=float("inf"))
    return SpectralCoeffs(mu, coeffs, norms)


def apply_spectral(mu: MuLike, t: float, f, x, n_max: int = 32):
    """T^t f(x) = sum_{n <= n_max} c_n e^(-nt) H_n(x)."""
    SemigroupParams(mu, t)
    out = spectral_coeffs(mu, f, n_max).evaluate(t, x)
    return out[()] if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------- generator and ODE


def l_mu_apply(mu: MuLike, p: PolyCoeffs) -> PolyCoeffs:
    """L_mu p = p''/2 + (mu/x - x) p' - mu (p(x) - p(-x)) / (2 x^2) on coefficients.

    On x^k the singular terms combine to mu (k - [k odd]) x^(k-2), so

        L_mu x^k = (k(k-1)/2 + mu (k - [k odd])) x^(k-2) - k x^k,

    a polynomial; the reflection term never divides by x numerically.
    """
    mu = as_mu(mu)
    c = p.coeffs
    out = np.zeros(len(c))
    for k, ck in enumerate(c):
        if ck == 0.0:
            continue
        out[k] -= k * ck
        if k >= 2:
            out[k - 2] += (0.5 * k * (k - 1) + mu * (k - (k & 1))) * ck
    return PolyCoeffs(out)


def ode_residual(mu: MuLike, n: int, x_grid) -> float:
    """max over x of |H'' + 2(mu/x - x) H' + 2(n - mu [n odd]/x^2) H| / (1 + |H| (n + x^2)).

    Derivatives come from exact differentiation of the coefficient vector.
    """
    mu = as_mu(mu)
    x = np.asarray(x_grid, dtype=float)
    if np.any(x == 0):
        raise ValueError("x_grid must avoid 0")
    p = hermite_coeffs(mu, n)
    h, d1, d2 = p(x), p.deriv()(x), p.deriv(2)(x)
    theta = n & 1
    lhs = d2 + 2 * (mu / x - x) * d1 + 2 * (n - mu * theta / x**2) * h
    return float(np.max(np.abs(lhs) / (1 + np.abs(h) * (n + x * x))))


def negativity_example(mu: MuLike, f_factory: Callable | None = None):
    """A nonnegative f with T^t f(x) < 0, for -1/2 < mu < 0.

    Scans a bump placed at y = -c against x = c over a few r values; returns
    (f, t, x, value) for the most negative value found, or None.
    """
    from .functions import triangular_bump

    mu = as_mu(mu)
    if mu >= 0:
        return None
    best = None
    for c in (1.0, 1.5, 2.0, 3.0):
        f = (f_factory or (lambda c: triangular_bump(-c, 0.25)))(c)
        for r in (0.3, 0.5, 0.7, 0.9):
            v = float(semigroup_values(mu, f, c, r))
            if best is None or v < best[3]:
                best = (f, -math.log(r), c, v)
    return best if best is not None and best[3] < 0 else None
