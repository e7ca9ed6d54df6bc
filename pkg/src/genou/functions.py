"""Test functions for the semigroup and maximal-operator experiments.

Every function is a picklable callable so experiment sweeps can be shipped to
worker processes. ``SampledFunction`` bundles the callable with the hints the
quadrature relies on: where the function lives and where it has kinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Literal

import numpy as np

from .specfun import PolyCoeffs, hermite_gen

MAX_SINE_FREQ = 1e3  # keeps the breakpoint list (about 8 freq entries) small

DecayClass = Literal["compact", "gaussian", "polynomial"]


@dataclass(frozen=True)
class SampledFunction:
    """A real function on the line plus support and smoothness hints.

    ``breakpoints`` lists points where the function is not smooth (include sign
    changes if the absolute value will be taken); quadrature panels never
    straddle them. Values outside ``support`` are taken as zero. ``growth``
    widens the integration window for functions growing like |y|^growth.
    """

    func: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float] = (-math.inf, math.inf)
    decay: DecayClass = "polynomial"
    breakpoints: tuple[float, ...] = ()
    sup_norm: float | None = None
    name: str = ""
    growth: int = 0  # polynomial degree bound of |f| at infinity

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        v = np.asarray(self.func(y), dtype=float)
        v = np.broadcast_to(v, y.shape)
        lo, hi = self.support
        if lo > -math.inf or hi < math.inf:
            v = np.where((y >= lo) & (y <= hi), v, 0.0)
        return v

    def cuts(self) -> list[float]:
        """Sorted support ends (finite ones), interior breakpoints and 0."""
        lo, hi = self.support
        pts = {0.0, *self.breakpoints}
        pts = {p for p in pts if lo <= p <= hi}
        pts |= {p for p in (lo, hi) if math.isfinite(p)}
        return sorted(pts)

    def scaled(self, c: float) -> "SampledFunction":
        sup = None if self.sup_norm is None else abs(c) * self.sup_norm
        return replace(self, func=_Scaled(self.func, float(c)), sup_norm=sup, name=f"{c:g}*{self.name}")

    def absolute(self) -> "SampledFunction":
        return replace(self, func=_Abs(self.func), name=f"|{self.name}|")

    def reflected(self) -> "SampledFunction":
        """y -> f(-y)."""
        lo, hi = self.support
        return replace(
            self,
            func=_Reflect(self.func),
            support=(-hi, -lo),
            breakpoints=tuple(sorted(-b for b in self.breakpoints)),
            name=f"{self.name}(-y)",
        )

    def restricted(self, lo: float, hi: float) -> "SampledFunction":
        a, b = max(lo, self.support[0]), min(hi, self.support[1])
        return replace(self, support=(a, b), decay="compact" if math.isfinite(a) and math.isfinite(b) else self.decay)


@dataclass(frozen=True)
class _Scaled:
    f: Callable
    c: float

    def __call__(self, y):
        return self.c * np.asarray(self.f(y), dtype=float)


@dataclass(frozen=True)
class _Abs:
    f: Callable

    def __call__(self, y):
        return np.abs(self.f(y))


@dataclass(frozen=True)
class _Reflect:
    f: Callable

    def __call__(self, y):
        return self.f(-np.asarray(y))


@dataclass(frozen=True)
class _Const:
    c: float

    def __call__(self, y):
        return np.full(np.shape(y), self.c)


@dataclass(frozen=True)
class _Poly:
    p: PolyCoeffs

    def __call__(self, y):
        return self.p(y)


@dataclass(frozen=True)
class _Hermite:
    mu: float
    n: int

    def __call__(self, y):
        # the Laguerre recurrence avoids the cancellation of monomial evaluation
        return hermite_gen(self.mu, self.n, y)


@dataclass(frozen=True)
class _PiecewiseLinear:
    knots: tuple[float, ...]
    values: tuple[float, ...]

    def __call__(self, y):
        return np.interp(y, self.knots, self.values, left=0.0, right=0.0)


@dataclass(frozen=True)
class _ClippedSine:
    freq: float
    amp: float
    clip: float

    def __call__(self, y):
        return np.clip(self.amp * np.sin(self.freq * np.asarray(y)), -self.clip, self.clip)


def constant(c: float = 1.0) -> SampledFunction:
    return SampledFunction(_Const(float(c)), decay="polynomial", sup_norm=abs(float(c)), name=f"const({c:g})")


def polynomial(p: PolyCoeffs | list[float], name: str = "") -> SampledFunction:
    if not isinstance(p, PolyCoeffs):
        p = PolyCoeffs(p)
    return SampledFunction(_Poly(p), decay="polynomial", name=name or f"poly(deg={p.degree})",
                           growth=p.degree)


def hermite(mu: float, n: int) -> SampledFunction:
    return SampledFunction(_Hermite(float(mu), int(n)), decay="polynomial", name=f"H_{n}", growth=int(n))


def piecewise_linear(knots, values, name: str = "pwl") -> SampledFunction:
    """Continuous piecewise-linear function, zero outside [knots[0], knots[-1]]."""
    knots = tuple(float(k) for k in knots)
    values = tuple(float(v) for v in values)
    if any(b <= a for a, b in zip(knots, knots[1:])):
        raise ValueError("knots must be strictly increasing")
    return SampledFunction(
        _PiecewiseLinear(knots, values),
        support=(knots[0], knots[-1]),
        decay="compact",
        breakpoints=knots,
        sup_norm=max(abs(v) for v in values),
        name=name,
    )


def triangular_bump(center: float, width: float, height: float = 1.0) -> SampledFunction:
    """Tent of half-width ``width`` and peak ``height`` at ``center``."""
    return piecewise_linear(
        (center - width, center, center + width), (0.0, height, 0.0), name=f"bump(c={center:g},w={width:g})"
    )


def indicator(a: float, b: float) -> SampledFunction:
    return SampledFunction(
        _Const(1.0), support=(float(a), float(b)), decay="compact", breakpoints=(float(a), float(b)),
        sup_norm=1.0, name=f"1[{a:g},{b:g}]",
    )


def clipped_sine(freq: float = 2.0, amp: float = 2.0, clip: float = 1.0) -> SampledFunction:
    """clip(amp sin(freq y), -clip, clip).

    Breakpoints are the kinks where |amp sin| crosses ``clip`` and the zeros
    (kinks of the absolute value), listed for |y| <= 12; beyond that the
    Gaussian weight makes them irrelevant.
    """
    if not 0 < freq <= MAX_SINE_FREQ:
        raise ValueError(f"sine frequency must lie in (0, {MAX_SINE_FREQ:g}]")
    phases = [0.0]
    if amp > clip:
        base = math.asin(clip / amp)
        phases += [base, math.pi - base]
    k_max = int(12 * freq / math.pi) + 2
    pts = sorted({(ph + k * math.pi) / freq for k in range(-k_max, k_max + 1) for ph in phases})
    pts = tuple(y for y in pts if abs(y) <= 12)
    return SampledFunction(
        _ClippedSine(float(freq), float(amp), float(clip)), decay="polynomial",
        breakpoints=pts, sup_norm=min(float(clip), abs(float(amp))),
        name=f"clipsin(f={freq:g})",
    )
