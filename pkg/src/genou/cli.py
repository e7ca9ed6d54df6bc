"""Command-line front end.

    genou eval {hermite,emu,kernel,semigroup,maximal} --mu MU [--n N] [--x X,...] ...
    genou verify {specfun,measure,kernel,semigroup,all} [--seed S]
    genou experiment {weak-type,linf,lp,majorant} --mu MU [--out FILE] [--format csv|json]

Exit codes: 0 success, 1 numeric failure (or a failed check), 2 usage error.
Output tables carry the full run configuration and the library version in
their header, and contain nothing time-dependent, so identical invocations
produce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from . import functions as F
from .quadrature import QuadratureError
from .specfun import OutOfRangeError

EVAL_KINDS = ("hermite", "emu", "kernel", "semigroup", "maximal")
VERIFY_SUITES = ("specfun", "measure", "kernel", "semigroup", "all")
EXPERIMENTS = ("weak-type", "linf", "lp", "majorant")
NUMERIC_ERRORS = (OutOfRangeError, QuadratureError, FloatingPointError, OverflowError, LookupError,
                  ArithmeticError)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    kind: str
    mu: float | None = None
    n: int | None = None
    x: list = field(default_factory=list)
    y: float | None = None
    r: float | None = None
    t: float | None = None
    p: float = 2.0
    tol: float = 1e-10
    seed: int = 42
    f: str = "bump:1:0.2"
    method: str = "auto"
    n_r: int = 72
    quick: bool = False
    out: str | None = None
    format: str = "csv"

    def validate(self):
        needs_mu = self.command in ("eval", "experiment")
        if needs_mu and self.mu is None:
            raise ConfigError("--mu is required (mu > -1/2)")
        if self.mu is not None and not (math.isfinite(self.mu) and self.mu > -0.5):
            raise ConfigError(f"invalid --mu {self.mu!r}: the measure requires mu > -1/2")
        if self.n is not None and self.n < 0:
            raise ConfigError("--n must be a nonnegative integer")
        if self.r is not None and not 0 < self.r < 1:
            raise ConfigError("--r must lie in (0, 1)")
        if self.t is not None and not self.t > 0:
            raise ConfigError("--t must be positive")
        if self.r is not None and self.t is not None:
            raise ConfigError("give either --r or --t, not both")
        if not self.tol > 0:
            raise ConfigError("--tol must be positive")
        if self.n_r < 2:
            raise ConfigError("--n-r must be at least 2")
        if self.command == "eval":
            if self.kind == "hermite" and self.n is None:
                raise ConfigError("eval hermite needs --n")
            if self.kind in ("kernel",) and (self.r is None and self.t is None or self.y is None):
                raise ConfigError("eval kernel needs --r (or --t) and --y")
            if self.kind == "semigroup" and self.r is None and self.t is None:
                raise ConfigError("eval semigroup needs --r or --t")
            if not self.x:
                raise ConfigError("eval needs --x")
        if self.command == "experiment" and self.kind == "lp" and not self.p > 1:
            raise ConfigError("--p must exceed 1")
        return self

    @property
    def radius(self) -> float | None:
        if self.r is not None:
            return self.r
        return None if self.t is None else math.exp(-self.t)


# --------------------------------------------------------------------------- output


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "" if v is None else str(v)


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, dict):
        return {k: _jsonable(w) for k, w in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(w) for w in v]
    return v


def render(cfg: RunConfig, columns: list[str], records: list[dict], summary: dict | None = None) -> str:
    conf = {k: v for k, v in asdict(cfg).items() if k not in ("out", "format")}
    if cfg.format == "json":
        doc = {"genou_version": __version__, "config": conf, "columns": columns,
               "records": [_jsonable({c: r.get(c) for c in columns}) for r in records],
               "summary": _jsonable(summary or {})}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# genou {__version__}\n")
    buf.write("# config: " + json.dumps(_jsonable(conf), sort_keys=True) + "\n")
    if summary:
        buf.write("# summary: " + json.dumps(_jsonable(summary), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def emit(cfg: RunConfig, text: str):
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------- test-function specs


def parse_function(spec: str, mu: float) -> F.SampledFunction:
    """Test function from a short spec:

    const[:c], hermite:n, bump:center:width (L1-normalized), tri:center:half_width[:height],
    indicator:a:b, sine[:freq:amp:clip].
    """
    from .maximal import normalized_bump

    name, *args = spec.split(":")
    try:
        vals = [float(a) for a in args]
    except ValueError:
        raise ConfigError(f"bad function spec {spec!r}") from None
    try:
        if name == "const":
            return F.constant(*vals[:1])
        if name == "hermite" and len(vals) == 1:
            return F.hermite(mu, int(vals[0]))
        if name == "bump" and len(vals) == 2:
            return normalized_bump(mu, vals[0], vals[1])
        if name == "tri" and len(vals) in (2, 3):
            return F.triangular_bump(*vals)
        if name == "indicator" and len(vals) == 2:
            return F.indicator(*vals)
        if name == "sine" and len(vals) in (0, 3):
            return F.clipped_sine(*vals)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad function spec {spec!r}: {exc}") from None
    raise ConfigError(f"unknown function spec {spec!r}")


# --------------------------------------------------------------------------- commands


def cmd_eval(cfg: RunConfig):
    from .kernel import kernel_values, log_kernel
    from .maximal import RGrid, maximal_values
    from .semigroup import apply_spectral, semigroup_values
    from .specfun import emu, hermite_gen

    xs = np.asarray(cfg.x, dtype=float)
    recs = []
    if cfg.kind == "hermite":
        cols = ["mu", "n", "x", "value", "method", "err_estimate"]
        vals = np.atleast_1d(hermite_gen(cfg.mu, cfg.n, xs))
        for x, v in zip(xs, vals):
            recs.append(dict(mu=cfg.mu, n=cfg.n, x=x, value=v, method="laguerre", err_estimate=None))
    elif cfg.kind == "emu":
        cols = ["mu", "x", "value", "method", "err_estimate"]
        for x in xs:
            res = emu(cfg.mu, float(x), cfg.method)
            recs.append(dict(mu=cfg.mu, x=x, value=res.value, method=res.method, err_estimate=res.err_estimate))
    elif cfg.kind == "kernel":
        cols = ["mu", "r", "x", "y", "value", "log_abs", "sign", "method", "err_estimate"]
        r = cfg.radius
        sg, lg = log_kernel(cfg.mu, r, xs, cfg.y)
        vals = np.atleast_1d(kernel_values(cfg.mu, r, xs, cfg.y))
        for x, s, lv, v in zip(xs, np.atleast_1d(sg), np.atleast_1d(lg), vals):
            recs.append(dict(mu=cfg.mu, r=r, x=x, y=cfg.y, value=v, log_abs=lv, sign=int(s),
                             method="closed-form", err_estimate=None))
    elif cfg.kind == "semigroup":
        cols = ["mu", "r", "f", "x", "value", "method", "err_estimate"]
        f = parse_function(cfg.f, cfg.mu)
        r = cfg.radius
        if cfg.method == "spectral":
            vals = np.atleast_1d(apply_spectral(cfg.mu, -math.log(r), f, xs))
            errs = [None] * xs.size
        else:
            vals, errs = semigroup_values(cfg.mu, f, xs, r, tol=cfg.tol, return_error=True)
            vals, errs = np.atleast_1d(vals), np.atleast_1d(errs)
        for x, v, e in zip(xs, vals, errs):
            recs.append(dict(mu=cfg.mu, r=r, f=f.name, x=x, value=v,
                             method="spectral" if cfg.method == "spectral" else "quadrature", err_estimate=e))
    elif cfg.kind == "maximal":
        cols = ["mu", "f", "x", "value", "r_at_sup", "method", "err_estimate"]
        f = parse_function(cfg.f, cfg.mu)
        vals, rs = maximal_values(cfg.mu, f, xs, RGrid.default(cfg.n_r), cfg.tol)
        for x, v, rr in zip(xs, vals, rs):
            recs.append(dict(mu=cfg.mu, f=f.name, x=x, value=v, r_at_sup=rr,
                             method=f"rgrid[{cfg.n_r}]", err_estimate=None))
    else:
        raise ConfigError(f"unknown eval kind {cfg.kind!r}")
    emit(cfg, render(cfg, cols, recs))
    return 0


def cmd_verify(cfg: RunConfig):
    from .verify import run_suite

    results = run_suite(cfg.kind, seed=cfg.seed)
    cols = ["suite", "name", "passed", "measured", "threshold", "detail"]
    recs = [dict(suite=r.suite, name=r.name, passed=r.passed, measured=r.measured, threshold=r.threshold,
                 detail=r.detail) for r in results]
    n_fail = sum(not r.passed for r in results)
    summary = {"checks": len(results), "failed": n_fail}
    if cfg.out:
        emit(cfg, render(cfg, cols, recs, summary))
    for r in results:
        print(r.line())
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    return 0 if n_fail == 0 else 1


def cmd_experiment(cfg: RunConfig):
    from .maximal import (RGrid, bounded_family, linf_check, lp_experiment, majorant_sweep, weak_type_experiment)

    rg = RGrid.default(cfg.n_r)
    if cfg.kind == "weak-type":
        kw = {}
        if cfg.quick:
            kw = dict(bumps=[(1.0, 0.2), (1.0, 0.05), (3.0, 0.2), (3.0, 0.05)], etas=np.geomspace(1e-2, 1e4, 16))
        rep = weak_type_experiment(cfg.mu, rg=rg, tol=max(cfg.tol, 1e-8), **kw)
        cols = ["center", "width", "eta", "mass", "ratio"]
        recs = [dict(zip(cols, row)) for row in rep.rows]
        summary = {"sup_ratio": rep.sup_ratio, "sup_by_width": {_fmt(k): v for k, v in rep.sup_by_width().items()},
                   "width_change": rep.width_change(),
                   "bumps": [asdict(b) for b in rep.bumps], "grids": rep.grids}
        headline = f"sup eta*lambda{{T*f > eta}}/||f||_1 = {rep.sup_ratio:.10g}"
    elif cfg.kind == "linf":
        fam = bounded_family()[:3] if cfg.quick else None
        sup, recs_ = linf_check(cfg.mu, fam, rg=rg, tol=cfg.tol)
        cols = ["name", "ratio", "x_at_sup", "r_at_sup"]
        recs = [asdict(r) for r in recs_]
        summary = {"sup_ratio": sup}
        headline = f"sup ||T*f||_inf/||f||_inf = {sup:.15g}"
    elif cfg.kind == "lp":
        sup, lst = lp_experiment(cfg.mu, cfg.p, rg=rg, tol=max(cfg.tol, 1e-9))
        cols = ["name", "p", "ratio"]
        recs = [dict(name=n, p=cfg.p, ratio=v) for n, v in lst]
        summary = {"sup_ratio": sup}
        headline = f"sup ||T*f||_p/||f||_p (p={cfg.p:g}) = {sup:.10g}"
    elif cfg.kind == "majorant":
        f = parse_function(cfg.f, cfg.mu)
        xs = np.asarray(cfg.x, dtype=float) if cfg.x else np.linspace(0.25, 5.0, 8 if cfg.quick else 16)
        sup, recs_ = majorant_sweep(cfg.mu, f, xs, RGrid.default(min(cfg.n_r, 24)))
        cols = ["x", "r", "lhs", "h_term", "m_term", "ratio"]
        recs = [asdict(r) for r in recs_]
        summary = {"sup_ratio": sup, "f": f.name}
        headline = f"sup half-line operator / (h ||f||_1 + M f) = {sup:.10g}"
    else:
        raise ConfigError(f"unknown experiment {cfg.kind!r}")
    emit(cfg, render(cfg, cols, recs, summary))
    print(headline, file=sys.stderr if not cfg.out else sys.stdout)
    return 0


# --------------------------------------------------------------------------- parsing


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mu", type=float, help="measure parameter, mu > -1/2")
    common.add_argument("--n", type=int, help="polynomial degree")
    common.add_argument("--x", type=_floats, default=[], help="evaluation point(s), comma separated")
    common.add_argument("--y", type=float)
    common.add_argument("--r", type=float, help="kernel radius in (0, 1)")
    common.add_argument("--t", type=float, help="semigroup time, r = exp(-t)")
    common.add_argument("--p", type=float, default=2.0, help="exponent for the L^p experiment")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--f", default="bump:1:0.2", help="test function spec (see parse_function)")
    common.add_argument("--method", default="auto", choices=("auto", "series", "bessel", "integral", "quadrature",
                                                             "spectral"))
    common.add_argument("--n-r", dest="n_r", type=int, default=72, help="points in the r grid of T*")
    common.add_argument("--quick", action="store_true", help="reduced experiment family")
    common.add_argument("--out", help="write the table here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    ap = argparse.ArgumentParser(prog="genou", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"genou {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, choices in (("eval", EVAL_KINDS), ("verify", VERIFY_SUITES), ("experiment", EXPERIMENTS)):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("kind", choices=choices)
    return ap


def _attach_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--x -3,0`` as ``--x=-3,0``; argparse only accepts plain negative numbers as values."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if a.startswith("--") and "=" not in a and re.match(r"-[\d.]", nxt):
            out.append(f"{a}={nxt}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv=None) -> int:
    ap = build_parser()
    argv = _attach_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    cfg = RunConfig(**vars(ns))
    try:
        cfg.validate()
        if cfg.method not in ("auto", "series", "bessel", "integral") and cfg.kind == "emu":
            raise ConfigError(f"--method {cfg.method} does not apply to e_mu")
        handler = {"eval": cmd_eval, "verify": cmd_verify, "experiment": cmd_experiment}[cfg.command]
        return handler(cfg)
    except ConfigError as exc:
        print(f"genou: error: {exc}", file=sys.stderr)
        return 2
    except NUMERIC_ERRORS as exc:
        print(f"genou: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"genou: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
