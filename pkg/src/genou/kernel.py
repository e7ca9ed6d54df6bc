"""The Mehler kernel K_r(x, y) of the generalized Ornstein-Uhlenbeck semigroup.

    K_r(x, y) = (1 - r^2)^-(mu+1/2) / Gamma(mu+1/2)
                * exp(-(x^2 + y^2) r^2 / (1 - r^2)) * e_mu(2 x y r / (1 - r^2))

so that T^t f(x) = int K_r(x, y) f(y) dlambda(y) with r = e^-t and T^t 1 = 1.
Everything is assembled in log space; e^(x^2)-sized factors never materialize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .measure import _as_measure, integrate_panels, lambda_mass
from .specfun import LOG_MAX, MuLike, as_mu, emu_log_scaled, hermite_gen_log, mehler_weight_log

MAX_SERIES_TERMS = 512


@dataclass(frozen=True)
class LogValue:
    """sign * exp(log_abs); sign 0 encodes an exact (or underflowed) zero."""

    sign: int
    log_abs: float
    # the float this value was built from, so converting back is exact
    origin: float | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        s = int(self.sign)
        if s not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")
        la = float(self.log_abs)
        if s == 0:
            la = -math.inf
        elif math.isnan(la):
            raise ValueError("log_abs is NaN")
        object.__setattr__(self, "sign", s)
        object.__setattr__(self, "log_abs", la)

    @classmethod
    def from_float(cls, v: float) -> "LogValue":
        v = float(v)
        if v == 0:
            return cls(0, -math.inf)
        return cls(1 if v > 0 else -1, math.log(abs(v)), v)

    def __float__(self):
        if self.sign == 0:
            return 0.0
        if self.origin is not None:
            return self.origin
        if self.log_abs > LOG_MAX:
            raise OverflowError(f"exp({self.log_abs}) is not representable")
        return self.sign * math.exp(self.log_abs)

    def to_float(self) -> float:
        return float(self)

    def __mul__(self, other):
        if not isinstance(other, LogValue):
            other = LogValue.from_float(float(other))
        s = self.sign * other.sign
        return LogValue(s, self.log_abs + other.log_abs if s else -math.inf)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, LogValue):
            other = LogValue.from_float(float(other))
        if other.sign == 0:
            raise ZeroDivisionError("LogValue division by zero")
        s = self.sign * other.sign
        return LogValue(s, self.log_abs - other.log_abs if s else -math.inf)

    def __neg__(self):
        return LogValue(-self.sign, self.log_abs, None if self.origin is None else -self.origin)

    def __add__(self, other):
        if not isinstance(other, LogValue):
            other = LogValue.from_float(float(other))
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        hi, lo = (self, other) if self.log_abs >= other.log_abs else (other, self)
        d = math.exp(lo.log_abs - hi.log_abs)
        if hi.sign == lo.sign:
            return LogValue(hi.sign, hi.log_abs + math.log1p(d))
        if d == 1.0:
            return LogValue(0, -math.inf)
        return LogValue(hi.sign, hi.log_abs + math.log1p(-d))

    def __sub__(self, other):
        return self + (-(other if isinstance(other, LogValue) else LogValue.from_float(float(other))))


@dataclass(frozen=True)
class KernelPoint:
    mu: float
    r: float
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "mu", as_mu(self.mu))
        r = float(self.r)
        if not 0.0 < r < 1.0:
            raise ValueError(f"r must lie in (0, 1), got {self.r!r}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))


def _log1mr2(r):
    # log(1 - r^2) without cancellation as r -> 1
    return np.log1p(-r) + np.log1p(r)


def log_kernel(mu: MuLike, r, x, y, scaled: bool = False):
    """Vectorized (sign, log|K_r(x, y)|); broadcasts r, x, y.

    The Gaussian part and the growth e^|z| of e_mu(z) are merged as

        -(x^2+y^2) r^2/(1-r^2) + |z| = -r (|x|-|y|)^2/(1-r^2) + r (x^2+y^2)/(1+r),

    which is symmetric in x, y and free of cancellation when r -> 1. With
    ``scaled`` the result is for exp(-(x^2 + y^2)/2) K_r(x, y).
    """
    mu = as_mu(mu)
    r = np.asarray(r, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    one_m = (1.0 - r) * (1.0 + r)
    z = 2.0 * x * y * r / one_m
    sgn, ls = emu_log_scaled(mu, z)
    ax, ay = np.abs(x), np.abs(y)
    sq = x * x + y * y
    expo = -r * (ax - ay) ** 2 / one_m + r * sq / (1.0 + r)
    if scaled:
        expo = expo - 0.5 * sq
    logv = -gammaln(mu + 0.5) - (mu + 0.5) * _log1mr2(r) + expo + ls
    return sgn, logv


def kernel_values(mu: MuLike, r, x, y):
    """K_r(x, y) as plain floats (overflow gives inf)."""
    sgn, logv = log_kernel(mu, r, x, y)
    with np.errstate(over="ignore"):
        return sgn * np.exp(logv)


def mehler_kernel(p: KernelPoint, scaled: bool = False) -> LogValue:
    """K_r(x, y) at a single point as a LogValue; see :func:`log_kernel`."""
    sgn, logv = log_kernel(p.mu, p.r, p.x, p.y, scaled=scaled)
    sgn = int(sgn)
    if sgn == 0 or not np.isfinite(logv):
        return LogValue(0, -math.inf)
    return LogValue(sgn, float(logv))


def mehler_closed_form(mu: MuLike, z: float, x: float, y: float) -> LogValue:
    """(1-z^2)^-(mu+1/2) exp(-(x^2+y^2) z^2/(1-z^2)) e_mu(2xyz/(1-z^2)) for |z| < 1.

    This is Gamma(mu+1/2) K_z(x, y), extended to negative z.
    """
    mu = as_mu(mu)
    if not abs(z) < 1:
        raise ValueError("need |z| < 1")
    if z == 0:
        return LogValue(1, 0.0)
    sgn, logv = log_kernel(mu, abs(z), x, math.copysign(1.0, z) * y)
    return LogValue(int(sgn), float(logv) + float(gammaln(mu + 0.5))) if sgn else LogValue(0, -math.inf)


class SeriesResult(NamedTuple):
    value: float
    last_term: float
    status: str  # "ok" or "diverging"


def mehler_series(mu: MuLike, z: float, x: float, y: float, n_terms: int = 60) -> SeriesResult:
    """Partial sum sum_{n < n_terms} gamma_mu(n)/(2^n (n!)^2) H_n(x) H_n(y) z^n.

    Terms are formed in log space and accumulated with exactly rounded
    summation. ``last_term`` is the magnitude of the final term; the status is
    "diverging" when the term envelope has stopped decreasing.
    """
    mu = as_mu(mu)
    if abs(z) > 0.9:
        raise ValueError("mehler_series needs |z| <= 0.9")
    if not 1 <= n_terms <= MAX_SERIES_TERMS:
        raise ValueError(f"n_terms must be in [1, {MAX_SERIES_TERMS}]")
    if z == 0:
        return SeriesResult(1.0, 1.0 if n_terms == 1 else 0.0, "ok")
    terms = np.empty(n_terms)
    for k in range(n_terms):
        sx, lx = hermite_gen_log(mu, k, x)
        sy, ly = hermite_gen_log(mu, k, y)
        sz = 1.0 if (z > 0 or k % 2 == 0) else -1.0
        logt = float(mehler_weight_log(mu, k)) + float(lx) + float(ly) + k * math.log(abs(z))
        terms[k] = float(sx * sy) * sz * (math.exp(logt) if logt > -745 else 0.0)
    mags = np.abs(terms)
    status = "ok"
    # H_n(x) oscillates in n, so single terms are not monotone; compare the envelope
    # of the last third of the terms with that of the middle third
    if n_terms >= 9:
        k = n_terms // 3
        if np.max(mags[-k:]) >= np.max(mags[-2 * k:-k]):
            status = "diverging"
    return SeriesResult(math.fsum(terms), float(mags[-1]), status)


# --------------------------------------------------------------------------- kernel regions and majorants


def region_split(x: float, r: float):
    """The three y-regions (0, x/2r), [x/2r, 4x/r], (4x/r, inf) used to split the kernel."""
    if not x > 0:
        raise ValueError("region_split needs x > 0")
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    a, b = x / (2 * r), 4 * x / r
    return (0.0, a), (a, b), (b, math.inf)


def natanson_kernel(mu: MuLike, r: float, x: float, y):
    """Unimodal majorant: 1 on [x, x/r], exp(-(x - r y)^2/(1-r^2)) elsewhere in [x/2r, 4x/r], 0 outside."""
    as_mu(mu)
    y = np.asarray(y, dtype=float)
    a, b = x / (2 * r), 4 * x / r
    inner = (y >= x) & (y <= x / r)
    mid = (y >= a) & (y <= b)
    g = np.exp(-((x - r * y) ** 2) / ((1 - r) * (1 + r)))
    out = np.where(inner, 1.0, np.where(mid, g, 0.0))
    return out[()] if out.ndim == 0 else out


def natanson_l1(mu: MuLike, r: float, x: float, order: int = 24, max_width: float | None = None) -> float:
    """int N(r, x, y) dlambda(y): exact lambda-mass on [x, x/r] plus panel quadrature of the
    Gaussian flanks on [x/2r, x] and [x/r, 4x/r].

    Panel widths follow the flank width sqrt(1 - r^2) so the rule resolves it.
    """
    mu = as_mu(mu)
    if not x > 0:
        raise ValueError("natanson_l1 needs x > 0")
    m = _as_measure(mu)
    a, b = x / (2 * r), 4 * x / r
    s = math.sqrt((1 - r) * (1 + r))
    w = max_width if max_width is not None else max(min(0.5, s), 1e-6)
    flank = lambda y: np.exp(-((x - r * y) ** 2) / ((1 - r) * (1 + r)))  # noqa: E731
    parts = []
    if a < x:
        # the flank centre x/r lies to the right; on [a, x] the integrand is monotone
        parts.append(integrate_panels(mu, flank, _flank_edges(a, x, x, s), order, max_width=w).sum())
    parts.append(lambda_mass(m, x, x / r))
    parts.append(integrate_panels(mu, flank, _flank_edges(x / r, b, x / r, s), order, max_width=w).sum())
    v = math.fsum(parts)
    if not math.isfinite(v):
        raise FloatingPointError(f"natanson_l1 quadrature failed at r={r}, x={x}")
    return v


def _flank_edges(lo, hi, peak_end, s):
    """Edges on [lo, hi] clustered within ~12 flank widths of ``peak_end``; beyond that the
    Gaussian factor is below 1e-60 and coarse panels suffice."""
    near = np.clip(peak_end + np.array([-12.0, 12.0]) * s, lo, hi)
    return np.unique(np.concatenate([[lo, hi], near]))


def natanson_reference(mu: MuLike, r: float, x: float) -> float:
    """x^(2 mu) (1 - r^2)^(1/2) e^(-x^2), the scale the L1 norm is compared against."""
    mu = as_mu(mu)
    return math.exp(2 * mu * math.log(x) + 0.5 * math.log((1 - r) * (1 + r)) - x * x)


def kernel_upper_bound(p: KernelPoint) -> LogValue:
    """Majorant of Gamma(mu+1/2) K_r(x, y) for x, y >= 0 with the constant set to 1:

        (1-r^2)^-(mu+1/2) (1 + 2xyr/(1-r^2))^-mu exp(x^2 - (x - r y)^2/(1-r^2)).

    It is e_mu(s) replaced by (1+s)^-mu e^s in the closed form, with the exponent
    rewritten around y = x/r (see :func:`bound_exponent_gap`).
    """
    if p.x < 0 or p.y < 0:
        raise ValueError("kernel_upper_bound needs x, y >= 0")
    mu, r, x, y = p.mu, p.r, p.x, p.y
    one_m = (1 - r) * (1 + r)
    s = 2 * x * y * r / one_m
    logv = -(mu + 0.5) * float(_log1mr2(r)) - mu * math.log1p(s) + x * x - (x - r * y) ** 2 / one_m
    return LogValue(1, logv)


def bound_exponent_gap(r, x, y):
    """Difference of the two forms of the kernel exponent (zero up to rounding):

        -(x^2+y^2) r^2/(1-r^2) + 2xyr/(1-r^2)   versus   x^2 - (x-ry)^2/(1-r^2).
    """
    r = np.asarray(r, dtype=float)
    one_m = (1 - r) * (1 + r)
    lhs = -(x * x + y * y) * r * r / one_m + 2 * x * y * r / one_m
    rhs = x * x - (x - r * y) ** 2 / one_m
    return lhs - rhs


def prefactor_bound_gap(mu: MuLike, r, x, y):
    """RHS minus LHS of

        (1-r^2)^-(mu+1/2) (1+2rxy/(1-r^2))^-mu <= x^-(2mu+1) + x^-2mu (1-r^2)^-1/2

    (meant for x/2r <= y <= 4x/r), returned relative to the RHS."""
    mu = as_mu(mu)
    r = np.asarray(r, dtype=float)
    one_m = (1 - r) * (1 + r)
    lhs = one_m ** (-(mu + 0.5)) * (1 + 2 * r * x * y / one_m) ** (-mu)
    rhs = x ** (-(2 * mu + 1)) + x ** (-2 * mu) / np.sqrt(one_m)
    return (rhs - lhs) / rhs
