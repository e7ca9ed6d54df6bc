"""The maximal operator T*f(x) = sup_{0<r<1} |T_r f(x)| and the experiments probing
its weak (1,1), L^inf and L^p bounds.

The sup over r is taken over a finite RGrid, so every computed T*f is a lower
bound for the true one and grows monotonically under grid refinement.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit, logit

from . import functions as F
from .functions import SampledFunction
from .measure import (
    LambdaMeasure,
    distribution_many,
    h_function,
    hl_maximal,
    integrate_panels,
    signed_moment,
)
from .semigroup import as_sampled, semigroup_values
from .specfun import MuLike, as_mu

R_MIN = 1e-6
R_MAX = 1.0 - 1e-8
DEFAULT_ETAS = np.geomspace(1e-2, 1e6, 40)
BUMP_CENTERS = (0.5, 1.0, 2.0, 3.0, 4.0)
BUMP_WIDTHS = (0.2, 0.05, 0.0125)


def worker_count() -> int:
    """Worker processes for experiment sweeps: GENOU_THREADS if set, else the CPU count."""
    env = os.environ.get("GENOU_THREADS")
    n = os.cpu_count() or 1
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            raise ValueError(f"GENOU_THREADS must be an integer, got {env!r}") from None
    return n


# --------------------------------------------------------------------------- r grid


@dataclass(frozen=True, eq=False)
class RGrid:
    """Values of r in [1e-6, 1 - 1e-8], uniform in logit(r) = log(r / (1 - r)).

    Uniform logit spacing is geometric in r as r -> 0 and geometric in 1 - r
    as r -> 1, where the kernel changes fastest.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size == 0:
            raise ValueError("RGrid is empty")
        if np.any(np.diff(v) <= 0):
            raise ValueError("RGrid values must be strictly increasing")
        if v[0] < R_MIN or v[-1] > R_MAX:
            raise ValueError(f"RGrid values must lie in [{R_MIN:g}, 1 - 1e-8]")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def default(cls, n: int = 72, r_min: float = R_MIN, r_max: float = R_MAX) -> "RGrid":
        u = np.linspace(logit(r_min), logit(r_max), n)
        v = expit(u)
        v[0], v[-1] = r_min, r_max
        return cls(v)

    def refine(self) -> "RGrid":
        """Superset with the logit-midpoint inserted between neighbours."""
        u = logit(self.values)
        mid = expit(0.5 * (u[1:] + u[:-1]))
        return RGrid(np.unique(np.concatenate([self.values, mid])))

    def __len__(self):
        return self.values.size


def maximal_values(mu: MuLike, f, x, rg: RGrid, tol: float = 1e-10, positive_only: bool = False):
    """(T*f(x), argmax r) for an array of x; the sup runs over ``rg``."""
    f = as_sampled(f)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    vals = semigroup_values(mu, f, x[:, None], rg.values[None, :], tol, positive_only=positive_only)
    a = np.abs(vals)
    k = np.argmax(a, axis=1)
    return a[np.arange(x.size), k], rg.values[k]


def maximal_fn(mu: MuLike, f, x: float, rg: RGrid, tol: float = 1e-10):
    """T*f(x) = max over r in rg of |T_r f(x)|, with the maximizing r."""
    v, r = maximal_values(mu, f, [x], rg, tol)
    return float(v[0]), float(r[0])


@dataclass(frozen=True)
class _MaximalCallable:
    """Picklable x -> T*f(x) used inside distribution bisection."""

    mu: float
    f: SampledFunction
    rg: RGrid
    tol: float

    def __call__(self, x):
        return maximal_values(self.mu, self.f, x, self.rg, self.tol)[0]


# --------------------------------------------------------------------------- weak type (1,1)


def l1_norm(mu: MuLike, f) -> float:
    """||f||_{1, lambda}; exact for piecewise-linear f, panel quadrature otherwise."""
    mu = as_mu(mu)
    f = as_sampled(f)
    pl = getattr(f.func, "knots", None)
    if pl is not None:
        return _pwl_abs_integral(mu, f.func.knots, f.func.values)
    lo, hi = f.support
    lo, hi = max(lo, -16.0), min(hi, 16.0)
    edges = [lo, hi] + [c for c in f.cuts() if lo < c < hi]
    return float(integrate_panels(mu, lambda y: np.abs(f(y)), sorted(set(edges))).sum())


def _pwl_abs_integral(mu, knots, values):
    """int |p| dlambda for a continuous piecewise-linear p, from exact moments."""
    total = []
    pts = list(zip(knots, values))
    for (a, fa), (b, fb) in zip(pts[:-1], pts[1:]):
        segs = [(a, fa, b, fb)]
        if fa * fb < 0:  # split where the segment crosses zero
            c = a + (b - a) * fa / (fa - fb)
            segs = [(a, fa, c, 0.0), (c, 0.0, b, fb)]
        for a_, fa_, b_, fb_ in segs:
            for lo, hi in ((a_, min(b_, 0.0)), (max(a_, 0.0), b_)):
                if hi <= lo:
                    continue
                slope = (fb_ - fa_) / (b_ - a_)
                icpt = fa_ - slope * a_
                v = icpt * signed_moment(mu, 0, lo, hi) + slope * signed_moment(mu, 1, lo, hi)
                total.append(abs(float(v)))
    return math.fsum(total)


def normalized_bump(mu: MuLike, center: float, width: float) -> SampledFunction:
    """Tent with base [center - width/2, center + width/2] scaled to ||f||_{1,lambda} = 1."""
    tent = F.triangular_bump(center, 0.5 * width, 1.0)
    return F.triangular_bump(center, 0.5 * width, 1.0 / l1_norm(mu, tent))


def bump_family(mu: MuLike, centers=BUMP_CENTERS, widths=BUMP_WIDTHS):
    return [(c, w, normalized_bump(mu, c, w)) for c in centers for w in widths]


def experiment_x_grid(center: float, width: float, half_range: float = 8.0, n_uniform: int = 2048,
                      n_cluster: int = 256) -> np.ndarray:
    """Uniform grid on [-half_range, half_range] plus dense clusters around +-center.

    The clusters (a few widths either side) resolve the peak of T*f near the
    bump and its mirror image, which the uniform spacing cannot for narrow bumps.
    """
    g = [np.linspace(-half_range, half_range, n_uniform)]
    for c in (center, -center):
        g.append(c + np.linspace(-4 * width, 4 * width, n_cluster))
        g.append(c + np.sign(c) * np.geomspace(4 * width, 1.0, 32))
        g.append(c - np.sign(c) * np.geomspace(4 * width, 1.0, 32))
    return np.unique(np.concatenate(g))


@dataclass
class BumpSummary:
    center: float
    width: float
    l1: float
    sup_ratio: float
    eta_at_sup: float
    tstar_max: float
    frac_argmax_at_cap: float


@dataclass
class WeakTypeReport:
    """Rows (center, width, eta, mass, ratio) with ratio = eta * mass / ||f||_1."""

    mu: float
    rows: list = field(default_factory=list)
    bumps: list = field(default_factory=list)
    sup_ratio: float = 0.0
    grids: dict = field(default_factory=dict)

    def sup_by_width(self, eta_min: float = 0.0) -> dict:
        """Family sup of the ratio per bump width, over rows with eta > eta_min.

        Below the lambda-mean of f the superlevel set is the whole line, so the
        unrestricted sup is usually set there and does not see the width;
        eta_min = a few / Gamma(mu + 1/2) isolates the concentrated regime.
        """
        out = {}
        for row in self.rows:
            if row[2] > eta_min:
                out[row[1]] = max(out.get(row[1], 0.0), row[4])
        return out

    def width_change(self, eta_min: float = 0.0) -> list:
        """Relative change of the family sup between consecutive widths (each 4x narrower)."""
        s = self.sup_by_width(eta_min)
        ws = sorted(s, reverse=True)
        return [abs(s[b] - s[a]) / s[a] for a, b in zip(ws[:-1], ws[1:])]


def _weak_type_one(args):
    mu, center, width, etas, rg_values, tol, bisect_tol = args
    rg = RGrid(rg_values)
    f = normalized_bump(mu, center, width)
    l1 = l1_norm(mu, f)
    x = experiment_x_grid(center, width)
    tstar, rstar = maximal_values(mu, f, x, rg, tol)
    g = _MaximalCallable(mu, f, rg, tol)
    est = distribution_many(mu, g, etas, x, tol=bisect_tol, values=tstar)
    rows = [(center, width, e.eta, e.mass, e.eta * e.mass / l1) for e in est]
    ratios = [r[4] for r in rows]
    k = int(np.argmax(ratios))
    summary = BumpSummary(center, width, l1, ratios[k], rows[k][2], float(np.max(tstar)),
                          float(np.mean(rstar == rg.values[-1])))
    return rows, summary, x.size


def weak_type_experiment(mu: MuLike, bumps=None, etas=None, rg: RGrid | None = None,
                         tol: float = 1e-8, bisect_tol: float = 1e-8, workers: int | None = None) -> WeakTypeReport:
    """eta * lambda{T*f > eta} / ||f||_1 over an eta grid for each L1-normalized bump.

    ``bumps`` is a list of (center, width); by default the 5 x 3 family of
    centers {0.5, 1, 2, 3, 4} and widths {0.2, 0.05, 0.0125}.
    """
    mu = as_mu(mu)
    LambdaMeasure(mu)
    bumps = [(c, w) for c in BUMP_CENTERS for w in BUMP_WIDTHS] if bumps is None else list(bumps)
    etas = DEFAULT_ETAS if etas is None else np.asarray(etas, dtype=float)
    rg = RGrid.default() if rg is None else rg
    jobs = [(mu, c, w, etas, rg.values, tol, bisect_tol) for c, w in bumps]
    n = min(worker_count() if workers is None else workers, len(jobs))
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as ex:
            results = list(ex.map(_weak_type_one, jobs))
    else:
        results = [_weak_type_one(j) for j in jobs]
    rep = WeakTypeReport(mu)
    for rows, summary, nx in results:
        rep.rows.extend(rows)
        rep.bumps.append(summary)
        rep.grids.setdefault("x_points", []).append(nx)
    rep.sup_ratio = max(b.sup_ratio for b in rep.bumps)
    rep.grids.update(n_r=len(rg), r_min=float(rg.values[0]), r_max=float(rg.values[-1]),
                     n_eta=int(etas.size), eta_min=float(etas[0]), eta_max=float(etas[-1]),
                     tol=tol, bisect_tol=bisect_tol)
    return rep


# --------------------------------------------------------------------------- L^inf and L^p


def bounded_family():
    """Bounded test functions with known sup norms."""
    return [
        F.constant(1.0),
        F.indicator(0.0, 1.0),
        F.indicator(-2.0, -0.5),
        F.indicator(1.0, 3.0),
        F.clipped_sine(2.0, 2.0, 1.0),
        F.clipped_sine(0.7, 3.0, 1.0),
    ]


@dataclass
class LinfRecord:
    name: str
    ratio: float
    x_at_sup: float
    r_at_sup: float


def linf_check(mu: MuLike, f_family=None, x_grid=None, rg: RGrid | None = None, tol: float = 1e-10):
    """sup over the family and x_grid of T*f(x) / ||f||_inf; returns (sup, per-function records)."""
    mu = as_mu(mu)
    family = bounded_family() if f_family is None else f_family
    x = np.linspace(-4.0, 4.0, 161) if x_grid is None else np.asarray(x_grid, dtype=float)
    rg = RGrid.default() if rg is None else rg
    recs = []
    for f in family:
        if f.sup_norm is None or f.sup_norm <= 0:
            raise ValueError(f"{f.name}: linf_check needs a positive declared sup norm")
        v, r = maximal_values(mu, f, x, rg, tol)
        k = int(np.argmax(v))
        recs.append(LinfRecord(f.name, float(v[k] / f.sup_norm), float(x[k]), float(r[k])))
    return max(rec.ratio for rec in recs), recs


def lp_norm(mu: MuLike, values_fn, p: float, edges) -> float:
    """(int |g|^p dlambda)^(1/p) by panel quadrature over consecutive ``edges``."""
    s = integrate_panels(as_mu(mu), lambda y: np.abs(values_fn(y)) ** p, edges).sum()
    return float(s) ** (1.0 / p)


def lp_experiment(mu: MuLike, p: float, f_family=None, rg: RGrid | None = None, half_range: float = 6.0,
                  panel_width: float = 0.25, tol: float = 1e-9):
    """sup over the family of ||T*f||_{p,lambda} / ||f||_{p,lambda}; returns (sup, [(name, ratio)]).

    T*f is only piecewise smooth (the maximizing r jumps), so its norm uses
    many low-order panels on [-half_range, half_range]; the truncated tail
    carries lambda-mass below e^(-half_range^2).
    """
    mu = as_mu(mu)
    if not p > 1:
        raise ValueError("p must exceed 1")
    family = [F.constant(1.0), F.hermite(mu, 2)] if f_family is None else f_family
    rg = RGrid.default() if rg is None else rg
    out = []
    for f in family:
        f = as_sampled(f)
        edges = np.unique(np.concatenate([
            np.arange(-half_range, half_range + 1e-12, panel_width),
            [c for c in f.cuts() if -half_range < c < half_range],
        ]))
        tstar = lambda y, f=f: maximal_values(mu, f, np.ravel(y), rg, tol)[0].reshape(np.shape(y))  # noqa: E731
        num = _lp_panels(mu, tstar, p, edges)
        den = _lp_panels(mu, f, p, edges)
        out.append((f.name, num / den))
    return max(r for _, r in out), out


def _lp_panels(mu, g, p, edges):
    from .measure import panel_rule, split_panels

    pa, pb = split_panels(edges, max_width=np.inf)
    y, w = panel_rule(mu, pa, pb, 8)
    return float(np.sum(w * np.abs(g(y)) ** p)) ** (1.0 / p)


# --------------------------------------------------------------------------- half-line majorant


@dataclass
class MajorantRecord:
    x: float
    r: float
    lhs: float  # half-line operator value
    h_term: float  # h(x) * ||f||_1
    m_term: float  # M_lambda f(x)
    ratio: float


def halfline_majorant_check(mu: MuLike, f, x: float, r: float, l1: float | None = None, family=None) -> MajorantRecord:
    """Compare int_0^inf K_r(x, y) f(y) dlambda(y) with h(x) ||f||_1 + M_lambda f(x), f >= 0, x > 0."""
    mu = as_mu(mu)
    f = as_sampled(f)
    if not x > 0:
        raise ValueError("halfline_majorant_check needs x > 0")
    lhs = float(semigroup_values(mu, f, x, r, positive_only=True))
    l1 = l1_norm(mu, f) if l1 is None else l1
    h_term = float(h_function(mu, x)) * l1
    m_term = hl_maximal(mu, f, x, family)
    rhs = h_term + m_term
    ratio = 0.0 if rhs == 0 and lhs == 0 else lhs / rhs
    return MajorantRecord(float(x), float(r), lhs, h_term, m_term, ratio)


def majorant_sweep(mu: MuLike, f, xs: Sequence[float], rg: RGrid | None = None):
    """Half-line majorant ratios over x and r; returns (sup ratio, records)."""
    mu = as_mu(mu)
    f = as_sampled(f)
    rg = RGrid.default(24) if rg is None else rg
    l1 = l1_norm(mu, f)
    recs = []
    for x in xs:
        lhs = semigroup_values(mu, f, x, rg.values, positive_only=True)
        h_term = float(h_function(mu, x)) * l1
        m_term = hl_maximal(mu, f, x)
        for r, v in zip(rg.values, lhs):
            rhs = h_term + m_term
            recs.append(MajorantRecord(float(x), float(r), float(v), h_term, m_term, float(v) / rhs if rhs else 0.0))
    return max(rec.ratio for rec in recs), recs


def symmetrization_gap(mu: MuLike, f, xs, rg: RGrid, tol: float = 1e-10):
    """max over x of T*f(x) - (T*_+|f|(|x|) + T*_+|f~|(|x|)), relative to the right side.

    The half-line maximal function is the sup over r of int_0^inf K_r(|x|, y) g(y) dlambda(y).
    """
    f = as_sampled(f)
    xs = np.asarray(xs, dtype=float)
    lhs, _ = maximal_values(mu, f, xs, rg, tol)
    a, _ = maximal_values(mu, f.absolute(), np.abs(xs), rg, tol, positive_only=True)
    b, _ = maximal_values(mu, f.reflected().absolute(), np.abs(xs), rg, tol, positive_only=True)
    rhs = a + b
    return float(np.max((lhs - rhs) / np.maximum(rhs, 1e-300)))


__all__ = [
    "RGrid", "maximal_fn", "maximal_values", "weak_type_experiment", "WeakTypeReport", "linf_check",
    "lp_experiment", "halfline_majorant_check", "majorant_sweep", "symmetrization_gap", "normalized_bump",
    "bump_family", "l1_norm",
]
