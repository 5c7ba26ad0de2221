"""Command-line front end.

    cburgers classify --scenario s.json
    cburgers zeros --scenario s.json --t-max 50 --out zeros.csv
    cburgers caloric --m 3
    cburgers construct-infinite --K 3 --out stages.json

Every output starts with the tool version and the full config. Exit codes:
0 success, 1 analysis failure, 2 input error.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import math
import sys
import threading
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import ProfileError, convergence_report, profile
from .caloric import RootExtractionError, caloric_poly, factor_roots, hermite_check, local_branch_model
from .classifier import basin_boundary_sweep, classify
from .colehopf import NearSingularity, forward
from .fields import closed_form_field
from .heatfield import HeatField
from .infinitesing import ConstructionError, construct, epsilon0, export, find_tau, sign_certificate
from .quadrature import QuadratureError
from .scenario import NonCompactError, ScenarioError, load_scenario
from .weakresidual import ResidualError, TestFunction, residual
from .zerofinder import (ASSUMPTION, CSV_COLUMNS, BranchAmbiguity, DegenerateZeroError,
                         default_rect, find_zeros, first_blowup_time)

ANALYSIS_ERRORS = (ProfileError, RootExtractionError, ConstructionError, QuadratureError,
                   ResidualError, DegenerateZeroError, BranchAmbiguity, NearSingularity)


class InputError(ValueError):
    pass


class CachedField:
    """Memoises eval(x, t) per point; thread-safe and invisible to callers."""

    def __init__(self, field):
        self.field = field
        self._cache = {}
        self._lock = threading.Lock()

    def __getattr__(self, name):
        return getattr(self.field, name)

    def eval(self, x, t):
        xa, ta = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        keys = list(zip(xa.ravel().tolist(), ta.ravel().tolist()))
        with self._lock:
            miss = [i for i, k in enumerate(keys) if k not in self._cache]
        if miss:
            xs = np.array([keys[i][0] for i in miss])
            ts = np.array([keys[i][1] for i in miss])
            v, vx, vxx = (np.broadcast_to(np.asarray(a, dtype=complex), xs.shape)
                          for a in self.field.eval(xs, ts))
            with self._lock:
                for n, i in enumerate(miss):
                    self._cache[keys[i]] = (complex(v[n]), complex(vx[n]), complex(vxx[n]))
        with self._lock:
            vals = [self._cache[k] for k in keys]
        out = tuple(np.array([r[j] for r in vals], dtype=complex).reshape(xa.shape) for j in range(3))
        if xa.ndim == 0:
            return tuple(complex(o) for o in out)
        return out


# -- parsing helpers --------------------------------------------------
def _floats(text, n=None, name="value"):
    try:
        vals = [float(s) for s in str(text).split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(f"{name}: cannot parse {text!r}") from exc
    if n is not None and len(vals) != n:
        raise InputError(f"{name}: expected {n} comma-separated numbers, got {len(vals)}")
    if any(math.isnan(v) for v in vals):
        raise InputError(f"{name}: NaN not allowed")
    return vals


def _rect(text, need_positive_t=True):
    r = _floats(text, 4, "--rect")
    if not (r[0] < r[1] and r[2] < r[3]):
        raise InputError("--rect needs XLO < XHI and TLO < THI")
    if need_positive_t and r[2] <= 0:
        raise InputError("--rect needs TLO > 0")
    return tuple(r)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _header_lines(args, extra=()):
    lines = [f"cburgers {__version__}", "config: " + json.dumps(_config(args), sort_keys=True)]
    if not args.reproducible:
        lines.append("generated: " + datetime.datetime.now(datetime.timezone.utc).isoformat())
    lines.extend(extra)
    return lines


def _meta(args, extra=None):
    m = {"version": __version__, "config": _config(args)}
    if not args.reproducible:
        m["generated"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    if extra:
        m.update(extra)
    return m


def _write(args, text, path=None):
    path = path or args.out
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_text(args, columns, rows, extra=()):
    buf = io.StringIO()
    for line in _header_lines(args, extra):
        buf.write("# " + line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _json_text(doc):
    return json.dumps(doc, indent=2, sort_keys=False, default=_fmt) + "\n"


def _emit(args, columns, rows, extra=(), doc_extra=None):
    if args.format == "json":
        doc = {"meta": _meta(args, {"notes": list(extra)} if extra else None)}
        doc.update(doc_extra or {})
        doc["rows"] = [dict(zip(columns, r)) for r in rows]
        _write(args, _json_text(doc))
    else:
        _write(args, _csv_text(args, columns, rows, extra))


def _scenario(args, required=True):
    if not args.scenario:
        if required:
            raise InputError("--scenario is required")
        return None
    p = Path(args.scenario)
    if not p.is_file():
        raise InputError(f"scenario file not found: {p}")
    return load_scenario(p)


def _field(args):
    """(field, L) from --test-field or --scenario."""
    if getattr(args, "test_field", None):
        return CachedField(closed_form_field(1 if args.test_field == "plus" else -1)), 1.0
    s = _scenario(args)
    return CachedField(HeatField(forward(s), tol=args.tol)), max(s.L, 1.0)


# -- commands ---------------------------------------------------------
def cmd_classify(args):
    s = _scenario(args)
    c = classify(s)
    m = c.evidence
    if args.format == "json":
        _write(args, _json_text({"meta": _meta(args), "verdict": c.verdict, "rule": c.rule,
                                 "I": m.I, "J": m.J, "absJ": m.absJ, "L": m.L}))
    else:
        lines = [f"verdict: {c.verdict}", f"rule: {c.rule}",
                 f"I: {_fmt(m.I)}", f"J: {_fmt(m.J)}", f"absJ: {_fmt(m.absJ)}", f"L: {_fmt(m.L)}",
                 f"J/2pi: {_fmt(m.J / (2 * math.pi))}"]
        head = "".join("# " + h + "\n" for h in _header_lines(args))
        _write(args, head + "\n".join(lines) + "\n")
    return 0


def _zero_rect(args, L):
    if args.rect:
        return _rect(args.rect)
    if args.test_field:
        return (-1.0, 1.0, 0.25, 0.75)
    return default_rect(L, args.t_max)


def cmd_zeros(args):
    fld, L = _field(args)
    rect = _zero_rect(args, L)
    zeros = find_zeros(fld, rect, cell=args.cell, subdiv=args.subdiv)
    zeros = sorted(zeros, key=lambda z: (z.t0, z.x0))
    _emit(args, CSV_COLUMNS, [z.csv_row() for z in zeros],
          extra=[f"rect: {list(rect)}", "assumption: " + ASSUMPTION])
    return 0


def cmd_field(args):
    fld, _ = _field(args)
    xlo, xhi, n = _floats(args.x, 3, "--x")
    xs = np.linspace(xlo, xhi, int(n))
    times = _floats(args.times, name="--times")
    if any(t <= 0 for t in times):
        raise InputError("--times must be positive")
    rows = []
    for t in times:
        v, vx, vxx = fld.eval(xs, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = -2.0 * vx / v
        for j, x in enumerate(xs):
            rows.append((x, t, v[j].real, v[j].imag, vx[j].real, vx[j].imag,
                         vxx[j].real, vxx[j].imag, u[j].real, u[j].imag))
    _emit(args, ("x", "t", "re_v", "im_v", "re_vx", "im_vx", "re_vxx", "im_vxx", "re_u", "im_u"), rows)
    return 0


def cmd_asymptotics(args):
    s = _scenario(args)
    times = _floats(args.times, name="--times")
    hf = HeatField(forward(s), tol=args.tol)
    p = profile(s, hf)
    rows = [(r.t, r.sup_error, r.sqrt_t_times_error) for r in convergence_report(s, times, hf)]
    extra = [f"y_alpha: {_fmt(p.y_alpha)}", f"alpha: {_fmt(p.alpha)}",
             f"beta: {_fmt(p.beta.real)},{_fmt(p.beta.imag)}"]
    _emit(args, ("t", "sup_error", "sqrt_t_times_error"), rows, extra=extra,
          doc_extra={"y_alpha": p.y_alpha, "alpha": p.alpha, "beta": [p.beta.real, p.beta.imag]})
    return 0


def cmd_residual(args):
    fld, L = _field(args)
    rect = _zero_rect(args, L)
    zeros = sorted(find_zeros(fld, rect, cell=args.cell, subdiv=args.subdiv), key=lambda z: (z.t0, z.x0))
    if not zeros:
        raise ResidualError("no zero of v in the rectangle")
    z = zeros[0]
    if args.phi:
        xc, tc, r = _floats(args.phi, 3, "--phi")
    else:
        xc, tc, r = z.x0, z.t0, 0.25 * min(z.t0, 1.0)
    phi = TestFunction.bump((xc, tc), r)
    res = residual(fld, z, phi)
    doc = res.to_json()
    doc.update({"x0": z.x0, "t0": z.t0, "relative_error": res.relative_error,
                "route_agreement": res.route_agreement})
    _write(args, _json_text({"meta": _meta(args), **doc}))
    return 0


def cmd_caloric(args):
    if args.m < 0:
        raise InputError("--m must be non-negative")
    p = caloric_poly(args.m)
    doc = {"meta": _meta(args), "m": p.m, "polynomial": str(p),
           "coeffs": [[i, j, c] for i, j, c in p.terms],
           "roots": factor_roots(p) if p.m >= 2 else [],
           "hermite_deviation": str(hermite_check(p))}
    if p.m >= 3:
        doc["branch_seeds"] = [[s.b, s.f0] for s in local_branch_model(p.m)]
    _write(args, _json_text(doc))
    return 0


def cmd_construct(args):
    seq, z, _ = construct(args.K)
    out = args.out or "stages.json"
    csv_path = args.csv or str(Path(out).with_suffix(".csv"))
    doc = export(seq, csv_path=csv_path)
    cert = sign_certificate(seq, z)
    doc["certificate"] = [{"t": t, "signed_integral": v, "pass": ok} for t, v, ok in cert]
    if args.taus:
        doc["tau"] = [find_tau(seq, j, z) for j in range(1, seq.K)]
        doc["epsilon0"] = epsilon0(seq)
    doc = {"meta": _meta(args), **doc}
    Path(out).write_text(_json_text(doc))
    return 0 if all(ok for _, _, ok in cert) else 1


def cmd_sweep(args):
    base = _scenario(args)
    p = Path(args.direction)
    if not p.is_file():
        raise InputError(f"direction file not found: {p}")
    direction = load_scenario(p)
    lo, hi = _floats(args.lam, 2, "--lam")

    def tb(s):
        hf = HeatField(forward(s), tol=args.tol)
        return first_blowup_time(hf, (-4 * s.L, 4 * s.L), args.t_max, cell=args.cell, subdiv=args.subdiv)

    res = basin_boundary_sweep(base, direction, (lo, hi), args.steps,
                               blowup_time=tb if args.blowup else None, jobs=args.jobs)
    rows = [(pt.lam, pt.classification.evidence.J, pt.classification.verdict, pt.first_blowup_time)
            for pt in res.points]
    _emit(args, ("lambda", "J", "verdict", "first_blowup_time"), rows,
          extra=[f"lambda_star: {_fmt(res.lambda_star)}"], doc_extra={"lambda_star": res.lambda_star})
    return 0


# -- parser -----------------------------------------------------------
def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario JSON file")
    common.add_argument("--rect", help="XLO,XHI,TLO,THI")
    common.add_argument("--cell", type=float, default=0.05)
    common.add_argument("--subdiv", type=int, default=2, help="forced subdivisions per cell")
    common.add_argument("--t-max", type=float, default=50.0)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--reproducible", action="store_true", help="omit the timestamp header")

    ap = argparse.ArgumentParser(prog="cburgers", description="complex Burgers laboratory")
    ap.add_argument("--version", action="version", version=f"cburgers {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="mass-based verdict")
    p.set_defaults(func=cmd_classify)

    for name, fn, hlp in (("zeros", cmd_zeros, "locate zeros of v"),
                          ("residual", cmd_residual, "weak residual at the first zero")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("--test-field", choices=("plus", "minus"),
                       help="use v = x +- i(x^2 + 2t - 1) instead of a scenario")
        if name == "residual":
            p.add_argument("--phi", help="XC,TC,R of the test bump")
        p.set_defaults(func=fn)

    p = sub.add_parser("field", parents=[common], help="sample v, v_x, v_xx, u")
    p.add_argument("--test-field", choices=("plus", "minus"))
    p.add_argument("--x", default="-5,5,101", help="XLO,XHI,N")
    p.add_argument("--times", default="1")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("asymptotics", parents=[common], help="profile convergence report")
    p.add_argument("--times", default="10,100,1000,10000")
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("caloric", parents=[common], help="caloric polynomial P_m")
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_caloric)

    p = sub.add_parser("construct-infinite", parents=[common], help="K-stage infinite-zero data")
    p.add_argument("--K", type=int, default=3)
    p.add_argument("--csv", help="z samples CSV (default: --out with .csv suffix)")
    p.add_argument("--taus", action="store_true", help="also locate tau_j and epsilon_0")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("sweep", parents=[common], help="basin-boundary sweep")
    p.add_argument("--direction", required=True, help="direction scenario JSON")
    p.add_argument("--lam", default="0,1", help="LO,HI")
    p.add_argument("--steps", type=int, default=11)
    p.add_argument("--blowup", action="store_true", help="compute first blow-up times")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.tol <= 0 or args.cell <= 0 or args.t_max <= 0:
        print("error: --tol, --cell and --t-max must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (InputError, ScenarioError, NonCompactError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ANALYSIS_ERRORS as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
