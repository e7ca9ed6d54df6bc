"""The measure dlambda(y) = |y|^(2 mu) exp(-y^2) dy: masses, quadrature grids, distribution
functions and the Hardy-Littlewood maximal function with respect to it."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln

from .quadrature import gauss_jacobi01, gauss_legendre01
from .specfun import LOG_MAX, MuLike, OutOfRangeError, as_mu

MAX_GRID_NODES = 2**20


# --------------------------------------------------------------------------- masses


def _half_mass(mu, lo, hi):
    """int_lo^hi u^(2 mu) e^(-u^2) du for 0 <= lo <= hi <= inf (vectorized).

    With s = mu + 1/2 this is Gamma(s)/2 * (P(s, hi^2) - P(s, lo^2)); the upper
    incomplete ratio Q is used once lo^2 exceeds s so tails keep full relative accuracy.
    """
    s = mu + 0.5
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lo2, hi2 = lo * lo, hi * hi
    tail = lo2 > s
    diff = np.where(tail, gammaincc(s, lo2) - gammaincc(s, hi2), gammainc(s, hi2) - gammainc(s, lo2))
    return 0.5 * math.exp(gammaln(s)) * diff


def signed_moment(mu, j, a, b):
    """int_a^b y^j |y|^(2 mu) e^(-y^2) dy for a <= b (vectorized over a, b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m = mu + 0.5 * j
    pos = _half_mass(m, np.maximum(a, 0.0), np.maximum(b, 0.0))
    neg = _half_mass(m, np.maximum(-b, 0.0), np.maximum(-a, 0.0))
    return pos + (-1.0) ** j * neg


@dataclass(frozen=True)
class LambdaMeasure:
    """dlambda = |y|^(2 mu) e^(-y^2) dy on the real line; total mass Gamma(mu + 1/2)."""

    mu: float

    def __post_init__(self):
        object.__setattr__(self, "mu", as_mu(self.mu))
        _self_test(self.mu)

    @property
    def total_mass(self) -> float:
        return math.exp(gammaln(self.mu + 0.5))

    def density(self, y):
        y = np.abs(np.asarray(y, dtype=float))
        with np.errstate(divide="ignore"):
            return np.exp(2 * self.mu * np.log(y) - y * y)

    def mass(self, a, b):
        return lambda_mass(self, a, b)


@lru_cache(maxsize=256)
def _self_test(mu: float):
    # Gauss-Jacobi on [0, 1] plus Gauss-Legendre panels on [1, 12], both halves
    t, w = gauss_jacobi01(30, 2 * mu)
    q = np.dot(w, np.exp(-t * t))
    edges = np.linspace(1.0, 12.0, 23)
    tl, wl = gauss_legendre01(30)
    for a, b in zip(edges[:-1], edges[1:]):
        y = a + (b - a) * tl
        q += (b - a) * np.dot(wl, y ** (2 * mu) * np.exp(-y * y))
    total = math.exp(gammaln(mu + 0.5))
    if abs(2 * q - total) > 1e-10 * total:
        raise AssertionError(f"lambda total-mass self-test failed for mu={mu}: {2 * q} vs {total}")
    return True


def _as_measure(measure) -> LambdaMeasure:
    if isinstance(measure, LambdaMeasure):
        return measure
    return LambdaMeasure(float(measure))


def lambda_mass(measure: LambdaMeasure | MuLike, a, b):
    """lambda([a, b]) via the regularized incomplete gamma function, a <= b, infinite ends allowed."""
    mu = _as_measure(measure).mu
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a > b):
        raise ValueError("lambda_mass needs a <= b")
    out = signed_moment(mu, 0, a, b)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------- panel quadrature


def panel_rule(mu: float, a, b, order: int, gaussian: bool = True):
    """Nodes and lambda-weights for panels [a_i, b_i] that do not straddle 0.

    Panels with an endpoint at 0 use a Gauss-Jacobi rule absorbing |y|^(2 mu);
    the rest use Gauss-Legendre times the density. With ``gaussian=False`` the
    weights carry |y|^(2 mu) only. Returns arrays of shape (n_panels, order).
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if np.any((a < 0) & (b > 0)):
        raise ValueError("panels must not straddle 0")
    side = np.where(b <= 0, -1.0, 1.0)
    ulo = np.where(side > 0, a, -b)[:, None]
    uhi = np.where(side > 0, b, -a)[:, None]
    h = uhi - ulo
    tg, wg = gauss_legendre01(order)
    tj, wj = gauss_jacobi01(order, 2 * mu)
    zero = ulo == 0
    u = ulo + h * np.where(zero, tj, tg)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(zero, h ** (2 * mu + 1) * wj, h * wg * u ** (2 * mu))
    if gaussian:
        w = w * np.exp(-u * u)
    return side[:, None] * u, w


def split_panels(edges: Sequence[float], max_width: float = 1.0, max_ratio: float = 2.0):
    """Refine consecutive edges so no panel straddles 0, is wider than ``max_width``,
    or (away from 0) has |b|/|a| above ``max_ratio``."""
    e = sorted(set(float(v) for v in edges))
    if e[0] < 0 < e[-1] and 0.0 not in e:
        e = sorted(e + [0.0])
    out_a, out_b = [], []
    for a, b in zip(e[:-1], e[1:]):
        lo, hi = (a, b) if b > 0 else (-b, -a)
        sub = [lo]
        if lo > 0:
            while hi / sub[-1] > max_ratio:
                sub.append(sub[-1] * max_ratio)
        sub.append(hi)
        fine = [sub[0]]
        for p, q in zip(sub[:-1], sub[1:]):
            k = max(1, int(math.ceil((q - p) / max_width)))
            fine.extend(p + (q - p) * np.arange(1, k) / k)
            fine.append(q)
        fine = np.array(fine)
        if b > 0:
            out_a.extend(fine[:-1])
            out_b.extend(fine[1:])
        else:
            out_a.extend(-fine[1:][::-1])
            out_b.extend(-fine[:-1][::-1])
    return np.array(out_a), np.array(out_b)


@dataclass(frozen=True, eq=False)
class QuadGrid:
    """Quadrature nodes with weights that already include |y|^(2 mu) e^(-y^2)."""

    mu: float
    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple[float, float]
    tol: float
    n_panels: int = 0

    def __len__(self):
        return len(self.nodes)


def _truncation(mu, degree, tol):
    """Smallest L on a 0.25 grid whose |y|^j tails (j <= degree) are below tol of the totals."""
    for L in np.arange(1.0, 60.0, 0.25):
        ok = True
        for j in (0, degree):
            tail = _half_mass(mu + 0.5 * j, L, np.inf)
            if tail > 1e-3 * tol * _half_mass(mu + 0.5 * j, 0.0, np.inf):
                ok = False
                break
        if ok:
            return float(L)
    return 60.0


def build_grid(
    measure: LambdaMeasure | MuLike,
    domain: tuple[float, float] = (-math.inf, math.inf),
    tol: float = 1e-12,
    degree: int = 32,
    order: int = 20,
) -> QuadGrid:
    """Adaptive composite grid for integrals against lambda over ``domain``.

    Infinite ends are truncated where the mass of |y|^degree dlambda beyond them
    is negligible. Each panel is bisected until its rule reproduces the exact
    moments int y^j dlambda (j = 0..degree, from incomplete gamma functions) to
    within its share of ``tol`` relative to the whole-domain absolute moments.
    """
    mu = _as_measure(measure).mu
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b = float(domain[0]), float(domain[1])
    if not a < b:
        raise ValueError("domain must have a < b")
    L = _truncation(mu, degree, tol)
    a_eff = max(a, -L)
    b_eff = min(b, L)
    if not a_eff < b_eff:
        return QuadGrid(mu, np.zeros(0), np.zeros(0), (a, b), tol, 0)
    pa, pb = split_panels([a_eff, b_eff] + ([0.0] if a_eff < 0 < b_eff else []), max_width=1.0, max_ratio=1e300)
    span = b_eff - a_eff
    js = np.arange(degree + 1)
    scale = np.array([
        _half_mass(mu + 0.5 * j, 0, max(0.0, b_eff)) + _half_mass(mu + 0.5 * j, 0, max(0.0, -a_eff)) for j in js
    ])
    done_a, done_b = [], []
    while pa.size:
        y, w = panel_rule(mu, pa, pb, order)
        q = np.einsum("pk,pkj->pj", w, y[:, :, None] ** js)
        exact = np.stack([signed_moment(mu, j, pa, pb) for j in js], axis=1)
        share = ((pb - pa) / span)[:, None]
        ok = np.all(np.abs(q - exact) <= tol * scale * share + 1e-300, axis=1)
        done_a.extend(pa[ok])
        done_b.extend(pb[ok])
        bad_a, bad_b = pa[~ok], pb[~ok]
        mid = 0.5 * (bad_a + bad_b)
        pa = np.concatenate([bad_a, mid])
        pb = np.concatenate([mid, bad_b])
        if (len(done_a) + pa.size) * order > MAX_GRID_NODES:
            raise OutOfRangeError(f"build_grid exceeded the {MAX_GRID_NODES}-node refinement cap")
    order_idx = np.argsort(done_a)
    pa, pb = np.array(done_a)[order_idx], np.array(done_b)[order_idx]
    y, w = panel_rule(mu, pa, pb, order)
    return QuadGrid(mu, y.ravel(), w.ravel(), (a, b), tol, len(pa))


def integrate(f: Callable, grid: QuadGrid) -> float:
    """sum_i w_i f(y_i): the integral of f against lambda on the grid's domain."""
    v = np.asarray(f(grid.nodes), dtype=float)
    bad = ~np.isfinite(v)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise FloatingPointError(f"integrand is not finite at node y={grid.nodes[i]!r} (value {v[i]!r})")
    return float(np.dot(grid.weights, v))


def integrate_panels(mu: float, f: Callable, edges: Sequence[float], order: int = 20,
                     max_width: float = 0.5) -> np.ndarray:
    """Integrals of f against lambda over consecutive intervals of the sorted ``edges``.

    Each interval is split (at 0, geometrically near 0, and to ``max_width``)
    before applying :func:`panel_rule`.
    """
    edges = np.asarray(edges, dtype=float)
    out = np.zeros(len(edges) - 1)
    pa, pb = split_panels(edges, max_width=max_width)
    y, w = panel_rule(mu, pa, pb, order)
    vals = np.sum(w * np.asarray(f(y), dtype=float), axis=1)
    idx = np.searchsorted(edges, 0.5 * (pa + pb)) - 1
    np.add.at(out, idx, vals)
    return out


# --------------------------------------------------------------------------- distribution functions


@dataclass(frozen=True)
class DistributionEstimate:
    """lambda{x : g(x) > eta} with the intervals that make up the set."""

    eta: float
    mass: float
    intervals: tuple[tuple[float, float], ...]
    resolution: dict = field(default_factory=dict)


def distribution_many(measure, g: Callable, etas, x_grid, tol: float = 1e-8, values=None):
    """lambda{g > eta} for several eta at once.

    The superlevel set is read off the sampled values on ``x_grid`` (a sorted
    grid that must resolve the sign changes of g - eta); each crossing is then
    refined by bisection to ``tol``, all crossings of all eta in one vectorized
    sweep. Runs touching the first or last grid point extend to -inf / +inf.
    ``values`` may pass precomputed g(x_grid).
    """
    m = _as_measure(measure)
    x = np.asarray(x_grid, dtype=float)
    if np.any(np.diff(x) <= 0):
        raise ValueError("x_grid must be strictly increasing")
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    if np.any(etas <= 0):
        raise ValueError("eta must be positive")
    gv = np.asarray(g(x) if values is None else values, dtype=float)
    above = gv[None, :] > etas[:, None]  # (n_eta, n_x)
    flips = above[:, 1:] != above[:, :-1]
    ei, xi = np.nonzero(flips)
    lo = x[xi].copy()
    hi = x[xi + 1].copy()
    lo_above = above[ei, xi]
    eta_c = etas[ei]
    n_bisect = 0
    while lo.size and np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        gm = np.asarray(g(mid), dtype=float) > eta_c
        same = gm == lo_above
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        n_bisect += 1
        if n_bisect > 200:
            break
    cross = 0.5 * (lo + hi)
    out = []
    for k, eta in enumerate(etas):
        sel = ei == k
        cx = cross[sel]
        starts_above = bool(above[k, 0])
        edges = ([-math.inf] if starts_above else []) + list(cx) + ([math.inf] if above[k, -1] else [])
        ivs = tuple((edges[i], edges[i + 1]) for i in range(0, len(edges) - 1, 2))
        mass = float(sum(lambda_mass(m, a, b) for a, b in ivs))
        res = {"n_points": int(x.size), "min_spacing": float(np.min(np.diff(x))) if x.size > 1 else 0.0,
               "max_spacing": float(np.max(np.diff(x))) if x.size > 1 else 0.0, "bisection_tol": tol,
               "bisection_steps": n_bisect}
        out.append(DistributionEstimate(float(eta), mass, ivs, res))
    return out


def distribution(measure, g: Callable, eta: float, x_grid, tol: float = 1e-8) -> DistributionEstimate:
    """lambda{x : g(x) > eta}; see :func:`distribution_many`."""
    return distribution_many(measure, g, [eta], x_grid, tol)[0]


# --------------------------------------------------------------------------- Hardy-Littlewood maximal function


@dataclass(frozen=True, eq=False)
class IntervalFamily:
    """Intervals [x - l, x + r] for l in ``left`` and r in ``right`` (offsets >= 0, not both 0)."""

    left: np.ndarray
    right: np.ndarray

    @classmethod
    def geometric(cls, n: int = 64, smallest: float = 1e-4, largest: float = 16.0) -> "IntervalFamily":
        g = np.concatenate([[0.0], np.geomspace(smallest, largest, n)])
        return cls(g, g.copy())

    def refine(self) -> "IntervalFamily":
        """Superset family with geometric midpoints inserted between consecutive offsets."""
        def dense(o):
            pos = o[o > 0]
            mids = np.sqrt(pos[1:] * pos[:-1])
            return np.unique(np.concatenate([o, mids]))
        return IntervalFamily(dense(self.left), dense(self.right))

    def __len__(self):
        return len(self.left) * len(self.right) - 1


def hl_maximal(measure, f: Callable, x: float, family: IntervalFamily | None = None,
               order: int = 20, return_interval: bool = False):
    """max over the family of (1/lambda(I)) int_I |f| dlambda, every I containing x.

    The sup over all intervals is approximated from below by the finite family,
    so enlarging the family can only increase the result.
    """
    m = _as_measure(measure)
    fam = IntervalFamily.geometric() if family is None else family
    if len(fam) <= 0:
        raise ValueError("interval family is empty")
    lefts = x - np.asarray(fam.left, dtype=float)
    rights = x + np.asarray(fam.right, dtype=float)
    extra = []
    cuts = getattr(f, "cuts", None)
    if cuts is not None:
        extra = [c for c in cuts() if lefts.min() < c < rights.max()]
    edges = np.unique(np.concatenate([lefts, rights, [x], extra, [0.0] if lefts.min() < 0 < rights.max() else []]))
    absf = lambda y: np.abs(f(y))  # noqa: E731
    ones = lambda y: np.ones_like(y)  # noqa: E731
    # cumulate outward from x so short intervals never difference two long ones
    ix = int(np.searchsorted(edges, x))
    il = ix - np.searchsorted(edges, lefts)
    ir = np.searchsorted(edges, rights) - ix

    def outward(g):
        seg = integrate_panels(m.mu, g, edges, order=order)
        left = np.concatenate([[0.0], np.cumsum(seg[:ix][::-1])])
        right = np.concatenate([[0.0], np.cumsum(seg[ix:])])
        return left, right

    fl, fr = outward(absf)
    ml, mr = outward(ones)
    num = fl[il][:, None] + fr[ir][None, :]
    den = ml[il][:, None] + mr[ir][None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        avg = np.where(den > 0, num / den, -np.inf)
    k = int(np.argmax(avg))
    i, j = np.unravel_index(k, avg.shape)
    best = float(avg[i, j])
    if return_interval:
        return best, (float(lefts[i]), float(rights[j]))
    return best


# --------------------------------------------------------------------------- the function h


def log_h(mu: MuLike, x):
    """log h(x) = log max(1/|x|, |x|) + x^2 - 2 mu log|x| (x != 0)."""
    mu = as_mu(mu)
    ax = np.abs(np.asarray(x, dtype=float))
    if np.any(ax == 0):
        raise ValueError("h is undefined at x = 0")
    la = np.log(ax)
    return np.abs(la) + ax * ax - 2 * mu * la


def h_function(mu: MuLike, x):
    """h(x) = max(1/|x|, |x|) e^(x^2) / |x|^(2 mu); x = 0 is a domain error."""
    lv = log_h(mu, x)
    if np.any(lv > LOG_MAX):
        raise OutOfRangeError("h(x) overflows double precision")
    out = np.exp(lv)
    return out[()] if np.ndim(out) == 0 else out


def h_distribution(mu: MuLike, etas, n_per_side: int = 4096):
    """lambda{h > eta} for each eta, on a geometric grid in |x| from 1e-300 to 30."""
    mu = as_mu(mu)
    pos = np.geomspace(1e-300, 30.0, n_per_side)
    grid = np.concatenate([-pos[::-1], pos])

    def loggap(y):
        return log_h(mu, y)

    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    logs = np.log(etas)
    # compare log h against log eta, shifted so that every threshold is positive
    shift = 1.0 - min(0.0, float(np.min(logs)))
    est = distribution_many(mu, lambda y: loggap(y) + shift, logs + shift, grid, tol=1e-12)
    return [replace(e, eta=float(eta)) for e, eta in zip(est, etas)]
