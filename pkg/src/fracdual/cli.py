"""Command line interface: ``fracdual <subcommand> [flags]``.

Results go to stdout as CSV, or to ``--out FILE`` together with
``FILE.manifest.json`` recording every flag after defaulting.  ``fracdual
replay FILE.manifest.json`` re-runs a recorded invocation.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from importlib import metadata
from typing import Sequence

import numpy as np

from . import density as dens
from . import fpde, inverse, montecarlo as mc, subordination as sub
from .errors import NumericalError
from .params import Param, StableParams

SCHEMA = 1


class Table:
    def __init__(self, header: Sequence[str]):
        self.header = list(header)
        self.rows: list[Sequence[float]] = []
        self.summary: dict[str, float] = {}

    def add(self, *row):
        self.rows.append(row)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.header) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _grid(lo: float, hi: float, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError(f"--points must be at least 1, got {n}")
    if hi < lo:
        raise ValueError(f"--x-max {hi} is below --x-min {lo}")
    return np.linspace(lo, hi, n)


# -- subcommands -------------------------------------------------------------


def cmd_density(a) -> Table:
    tag = Param(a.param)
    asym = a.eta if a.eta is not None else a.asym
    if asym is None:
        raise ValueError("give --asym (or --eta for the eta parametrization)")
    if a.eta is not None and tag is not Param.ZOLOTAREV_ETA:
        raise ValueError("--eta only applies with --param eta")
    params = StableParams(tag, a.alpha, asym, a.scale)
    out = Table(["x", "density"])
    for x in _grid(a.x_min, a.x_max, a.points):
        out.add(x, dens.density(float(x), params, a.method))
    return out


def cmd_inverse_density(a) -> Table:
    spec = inverse.InverseDensitySpec(a.gamma, a.b, a.t, a.route)
    if a.check == "laplace":
        out = Table(["z", "quadrature", "mittag_leffler", "abs_err"])
        for z in a.z:
            lhs, rhs = inverse.laplace_check(spec, z)
            out.add(z, lhs, rhs, abs(lhs - rhs))
        out.summary["max_abs_err"] = max(r[3] for r in out.rows)
        return out
    if a.x_min <= 0:
        raise ValueError(f"h(x, t) needs x > 0, got --x-min {a.x_min}")
    out = Table(["x", "h"])
    for x in _grid(a.x_min, a.x_max, a.points):
        out.add(x, inverse.h_density(float(x), spec))
    return out


def _h_bvp(x: float, alpha: float, b: float, t: float) -> float:
    """Analytic BVP solution, including the ``x = 0`` limit."""
    if x > 0:
        return inverse.h_density(x, inverse.InverseDensitySpec(1.0 / alpha, b, t))
    s = b ** (-alpha) * t
    f = s ** (-1.0 / alpha)
    return alpha * f * dens.density_at_zero(alpha, 2.0 - alpha)


def _default_x_max(a, gamma: float, scale: float) -> float:
    if a.x_max is not None:
        return a.x_max
    unit = 2.0 * a.dx
    return unit * math.ceil(6.0 * scale * a.t_end**gamma / unit - 1e-9)


def cmd_solve(a) -> Table:
    if a.two_sided:
        ts = fpde.TwoSided(a.q, a.delta, a.a)
        x_max = _default_x_max(a, 1.0 / a.delta, a.a ** (1.0 / a.delta))
        cfg = fpde.SolverConfig(a.delta, a.dx, x_max, a.t_end, dt=a.dt, two_sided=ts, cfl_safety=a.cfl_safety)
        grid = fpde.solve_two_sided(cfg)
        out = Table(["x", "h_numeric"] + (["h_analytic", "abs_err"] if a.compare else []))
        params = StableParams(Param.FELLER_Q, a.delta, a.q, a.a * a.t_end) if a.compare else None
        for x, v in zip(grid.x, grid.values):
            if params is not None:
                ref = dens.density(float(x), params)
                out.add(x, v, ref, abs(v - ref))
            else:
                out.add(x, v)
        return out
    x_max = _default_x_max(a, 1.0 / a.alpha, 1.0 / a.b)
    cfg = fpde.SolverConfig(a.alpha, a.dx, x_max, a.t_end, b=a.b, dt=a.dt, cfl_safety=a.cfl_safety)
    grid = fpde.solve_richardson(cfg)[0] if a.extrapolate else fpde.solve_bvp(cfg)
    return _bvp_table(grid, a.alpha, a.b, a.t_end, a.compare)


def _bvp_table(grid, alpha, b, t, compare: bool, window=(0.2, 4.0)) -> Table:
    out = Table(["x", "h_numeric"] + (["h_analytic", "abs_err"] if compare else []))
    worst = 0.0
    for x, v in zip(grid.x, grid.values):
        if compare:
            ref = _h_bvp(float(x), alpha, b, t)
            err = abs(v - ref)
            if window[0] - 1e-12 <= x <= window[1] + 1e-12:
                worst = max(worst, err)
            out.add(x, v, ref, err)
        else:
            out.add(x, v)
    if compare:
        out.summary["max_abs_err"] = worst
    return out


def _simulate(process: str, alpha: float, b: float, t: float, ens: mc.Ensemble) -> mc.Ensemble:
    if process == "E":
        res = mc.simulate_E(1.0 / alpha, b, [t], ens)
        return res.__class__(**{**res.__dict__, "samples": res.samples[:, 0]})
    if process == "Ycond":
        return mc.simulate_Y_conditional(alpha, b, t, ens)
    return mc.simulate_Z(alpha, b, t, ens)


def cmd_simulate(a) -> Table:
    alpha = _alpha_from(a)
    ens = mc.Ensemble(a.seed, a.n, dt_walk=a.dt_walk, dx_path=a.dx_path)
    res = _simulate(a.process, alpha, a.b, a.t, ens)
    return _histogram_table(res, alpha, a.b, a.t, a.bins)


def _alpha_from(a) -> float:
    if (a.alpha is None) == (a.gamma is None):
        raise ValueError("give exactly one of --alpha or --gamma")
    alpha = a.alpha if a.alpha is not None else 1.0 / a.gamma
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"need 1 < alpha <= 2 (1/2 <= gamma < 1), got alpha = {alpha}")
    return alpha


def _histogram_table(res: mc.Ensemble, alpha: float, b: float, t: float, bins: int) -> Table:
    spec = inverse.InverseDensitySpec(1.0 / alpha, b, t)
    samples = res.samples
    hi = float(np.quantile(samples, 0.999))
    mids, emp = mc.histogram(samples, bins, (0.0, hi))
    out = Table(["x_mid", "emp_density", "analytic"])
    for x, e in zip(mids, emp):
        out.add(x, e, inverse.h_density(float(x), spec))
    out.summary = {
        "accepted": res.accepted,
        "ks": mc.ks_statistic(samples, inverse.cdf_function(spec)),
        "mean": float(np.mean(samples)),
    }
    return out


def _datum(text: str) -> sub.Datum:
    kind, _, arg = text.partition(":")
    if kind == "delta":
        return sub.Datum.delta(float(arg or 0.0))
    if kind == "file":
        data = np.loadtxt(arg, delimiter=",", ndmin=2)
        if data.shape[1] < 2:
            raise ValueError(f"{arg}: expected two columns x,r")
        return sub.Datum.tabulated(data[:, 0], data[:, 1])
    raise ValueError(f"--r must be delta:<x0> or file:<path>, got {text!r}")


def cmd_subordinate(a) -> Table:
    r = _datum(a.r)
    first = "dual" if a.route == "dual" else "inverse"
    spec = sub.SubordinationSpec(a.gamma, r, a.domain, a.length, first)
    other = spec.with_route("dual") if a.route == "both" else None
    out = Table(["x", "m"] + (["m_other", "abs_err"] if other else []))
    for x in _grid(a.x_min, a.x_max, a.points):
        m = sub.subordinate(spec, float(x), a.t)
        if other is not None:
            m2 = sub.subordinate(other, float(x), a.t)
            out.add(x, m, m2, abs(m - m2))
        else:
            out.add(x, m)
    if other is not None:
        out.summary["max_abs_err"] = max(r[3] for r in out.rows)
    return out


def cmd_compare(a) -> Table:
    if a.mode == "fig1":
        a.t_end = a.t
        x_max = _default_x_max(a, 1.0 / a.alpha, 1.0 / a.b)
        cfg = fpde.SolverConfig(a.alpha, a.dx, x_max, a.t, b=a.b, cfl_safety=a.cfl_safety)
        grid = fpde.solve_richardson(cfg)[0] if a.extrapolate else fpde.solve_bvp(cfg)
        return _bvp_table(grid, a.alpha, a.b, a.t, True)
    ens = mc.Ensemble(a.seed, a.n, dt_walk=a.dt_walk)
    return _histogram_table(mc.simulate_Z(a.alpha, a.b, a.t, ens), a.alpha, a.b, a.t, a.bins)


# -- plumbing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracdual", description=__doc__.splitlines()[0])
    out_help = "write CSV here (plus a .manifest.json) instead of stdout"
    p.add_argument("--out", help=out_help)
    # also accepted after the subcommand; SUPPRESS keeps the top-level value otherwise
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=argparse.SUPPRESS, help=out_help)
    sp = p.add_subparsers(dest="command", required=True)

    d = sp.add_parser("density", parents=[common], help="stable density on a grid")
    d.add_argument("--param", default="eta", choices=[t.value for t in Param])
    d.add_argument("--alpha", type=float, required=True)
    d.add_argument("--asym", type=float)
    d.add_argument("--eta", type=float)
    d.add_argument("--scale", type=float, default=1.0)
    d.add_argument("--x-min", type=float, default=-5.0)
    d.add_argument("--x-max", type=float, default=5.0)
    d.add_argument("--points", type=int, default=101)
    d.add_argument("--method", default="series", choices=[m.value for m in dens.Method])
    d.set_defaults(func=cmd_density)

    i = sp.add_parser("inverse-density", parents=[common], help="density h(x, t) of the inverse subordinator")
    i.add_argument("--gamma", type=float, required=True)
    i.add_argument("--b", type=float, default=1.0)
    i.add_argument("--t", type=float, default=1.0)
    i.add_argument("--route", default="self-similar", choices=[r.value for r in inverse.Route])
    i.add_argument("--x-min", type=float, default=0.01)
    i.add_argument("--x-max", type=float, default=4.0)
    i.add_argument("--points", type=int, default=100)
    i.add_argument("--check", choices=["laplace"])
    i.add_argument("--z", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0])
    i.set_defaults(func=cmd_inverse_density)

    s = sp.add_parser("solve", parents=[common], help="explicit Grünwald solver")
    s.add_argument("--alpha", type=float, default=1.5)
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--dx", type=float, default=0.1)
    s.add_argument("--dt", type=float)
    s.add_argument("--x-max", type=float)
    s.add_argument("--t-end", type=float, default=1.0)
    s.add_argument("--cfl-safety", type=float, default=1.0)
    s.add_argument("--extrapolate", action="store_true")
    s.add_argument("--compare", action="store_true")
    s.add_argument("--two-sided", action="store_true")
    s.add_argument("--q", type=float, default=0.5)
    s.add_argument("--delta", type=float, default=2.0)
    s.add_argument("--a", type=float, default=1.0)
    s.set_defaults(func=cmd_solve)

    m = sp.add_parser("simulate", parents=[common], help="particle simulation of E, Y|Y>0 or Z")
    m.add_argument("--process", choices=["E", "Ycond", "Z"], required=True)
    m.add_argument("--alpha", type=float)
    m.add_argument("--gamma", type=float)
    m.add_argument("--b", type=float, default=1.0)
    m.add_argument("--t", type=float, default=1.0)
    m.add_argument("--n", type=int, default=100_000)
    m.add_argument("--seed", type=int, default=1)
    m.add_argument("--dt-walk", type=float, default=0.05)
    m.add_argument("--dx-path", type=float, default=1e-3)
    m.add_argument("--bins", type=int, default=50)
    m.set_defaults(func=cmd_simulate)

    u = sp.add_parser("subordinate", parents=[common], help="time-fractional Cauchy problem by subordination")
    u.add_argument("--gamma", type=float, required=True)
    u.add_argument("--domain", default="line", choices=[x.value for x in sub.Domain])
    u.add_argument("--length", type=float)
    u.add_argument("--r", default="delta:0")
    u.add_argument("--route", default="inverse", choices=["inverse", "dual", "both"])
    u.add_argument("--t", type=float, default=1.0)
    u.add_argument("--x-min", type=float, default=-3.0)
    u.add_argument("--x-max", type=float, default=3.0)
    u.add_argument("--points", type=int, default=61)
    u.set_defaults(func=cmd_subordinate)

    c = sp.add_parser("compare", parents=[common], help="numerical vs analytic h (fig1: Grünwald, fig2: Z walk)")
    c.add_argument("--mode", choices=["fig1", "fig2"], required=True)
    c.add_argument("--alpha", type=float, default=1.1)
    c.add_argument("--b", type=float, default=1.0)
    c.add_argument("--t", type=float, default=1.0)
    c.add_argument("--dx", type=float, default=0.2)
    c.add_argument("--x-max", type=float)
    c.add_argument("--cfl-safety", type=float, default=0.1)
    c.add_argument("--extrapolate", action="store_true")
    c.add_argument("--n", type=int, default=200_000)
    c.add_argument("--seed", type=int, default=7)
    c.add_argument("--dt-walk", type=float, default=0.05)
    c.add_argument("--bins", type=int, default=50)
    c.set_defaults(func=cmd_compare)

    r = sp.add_parser("replay", parents=[common], help="re-run the invocation recorded in a manifest")
    r.add_argument("manifest")
    r.set_defaults(func=None)
    return p


def _version() -> str:
    try:
        return metadata.version("fracdual")
    except metadata.PackageNotFoundError:
        return "unknown"


def _atomic_write(path: str, text: str):
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".fracdual-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def manifest_for(args, argv: Sequence[str], out_path: str) -> dict:
    flags = {k: v for k, v in vars(args).items() if k not in ("func", "out", "command")}
    return {
        "schema": SCHEMA,
        "subcommand": args.command,
        "argv": list(argv),
        "flags": flags,
        "seed": flags.get("seed"),
        "tolerances": {
            "series_tol": dens.DEFAULT_TOL,
            "series_cap": dens.DEFAULT_SERIES_CAP,
            "quad_epsabs": sub.QuadPolicy().epsabs,
        },
        "output": out_path,
        "version": _version(),
    }


def _strip_out(argv: Sequence[str]) -> list[str]:
    res, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--out":
            skip = True
            continue
        if tok.startswith("--out="):
            continue
        res.append(tok)
    return res


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "replay":
        try:
            with open(args.manifest) as fh:
                recorded = json.load(fh)
            replay = _strip_out(recorded["argv"])
        except (OSError, KeyError, ValueError) as exc:
            print(f"error: cannot read manifest: {exc}", file=sys.stderr)
            return 2
        out = args.out or recorded.get("output")
        return run((["--out", out] if out else []) + replay)
    try:
        table = args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        constraint = getattr(exc, "constraint", None) or str(exc)
        print(f"error: {constraint}", file=sys.stderr)
        return 2
    text = table.to_csv()
    if args.out:
        _atomic_write(args.out, text)
        manifest = manifest_for(args, _strip_out(argv), args.out)
        _atomic_write(args.out + ".manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)
    if table.summary:
        print(",".join(table.summary), file=sys.stderr)
        print(",".join(_fmt(v) for v in table.summary.values()), file=sys.stderr)
    return 0


def main():
    sys.exit(run())
