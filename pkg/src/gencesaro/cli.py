"""Command-line front end.

Exit codes: 0 success, 2 usage or parse error, 3 numeric failure (partial
output is still written).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (DEFAULT_NS, NormConfig, ScanConfig, boundedness_scan,
                       compactness_probe, dirichlet_divergence, necessity_functionals)
from .cesaro import apply
from .io import atomic_write_text, csv_text, dumps_json
from .kernels import averaged_kernel_eval, kernel_coeffs, kernel_eval
from .spaces import CoefficientSeries, SpaceSpec
from .weights import (DEFAULT_TOL, ClassifyConfig, MomentTable, classify, load_cache,
                      log_moments, parse_weight, save_cache)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(ValueError):
    pass


# --------------------------------------------------------------------------
# argument helpers
# --------------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a complex number like 0.3+0.2j, got {text!r}")


def _x_range(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("x-range must be start:stop:step")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("x-range needs step > 0 and stop >= start")
    return list(np.arange(start, stop + 0.5 * step, step))


class _Session:
    """Per-invocation state: the moment cache and output routing."""

    def __init__(self, args):
        self.args = args
        self.tables = load_cache(args.cache, args.tol) if args.cache else {}

    def table(self, w) -> MomentTable:
        return self.tables.setdefault(w.weight_id, MomentTable(w.weight_id, tol=self.args.tol))

    def weight(self, text):
        return parse_weight(text)

    def space(self, text: str) -> SpaceSpec:
        kind, _, arg = text.strip().partition(":")
        if kind == "hgamma":
            try:
                return SpaceSpec.hgamma(float(arg))
            except ValueError as exc:
                raise UsageError(f"bad space {text!r}: {exc}") from None
        if kind == "bergman":
            mu = parse_weight(arg)
            return SpaceSpec.bergman(mu, self.table(mu))
        if kind == "dirichlet" and not arg:
            return SpaceSpec.dirichlet()
        raise UsageError(f"bad space {text!r}; expected hgamma:<g>, bergman:<weight> or dirichlet")

    def save(self):
        if self.args.cache:
            save_cache(list(self.tables.values()), self.args.cache)

    def emit(self, payload: dict, curve=None) -> None:
        args = self.args
        payload = dict(payload, command=args.command, version=__version__)
        if not args.no_timestamp:
            payload["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        if args.format == "csv":
            if curve is None:
                raise UsageError(f"{args.command} has no CSV form; use --format json")
            text = csv_text(*curve)
        else:
            text = dumps_json(payload)
        if args.out:
            atomic_write_text(args.out, text)
            if args.format == "json" and curve is not None:
                atomic_write_text(Path(args.out).with_suffix(".csv"), csv_text(*curve))
        else:
            sys.stdout.write(text)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_moments(s: _Session, args) -> int:
    w = s.weight(args.weight)
    xs = args.x if args.x is not None else args.x_range
    if not xs:
        raise UsageError("give --x or --x-range")
    table = s.table(w)
    rows, status, error = [], EXIT_OK, None
    for x in xs:
        try:
            v, e = log_moments(w, [x], table, method=args.method)
        except ArithmeticError as exc:
            status, error = EXIT_NUMERIC, f"x={x!r}: {exc}"
            break
        rows.append((float(x), float(np.exp(v[0])), float(v[0]), float(e[0])))
    payload = {"weight": w.label, "weight_id": w.weight_id, "method": args.method,
               "rows": [dict(zip(("x", "moment", "log_moment", "abs_log_err"), r)) for r in rows]}
    if error:
        payload["error"] = error
    s.emit(payload, (("x", "moment", "log_moment", "abs_log_err"), rows))
    return status


def cmd_classify(s: _Session, args) -> int:
    w = s.weight(args.weight)
    cfg = ClassifyConfig(j_max=args.j_max, window=args.window, tol_plateau=args.tol_plateau,
                         slope_threshold=args.slope_threshold)
    rep = classify(w, cfg, s.table(w))
    for name in ("in_dhat", "in_m", "in_dcheck", "in_d"):
        v = getattr(rep, name)
        print(f"{name:10s} {v.verdict:13s} {v.reason}", file=sys.stderr)
    d = rep.to_dict()
    rows = [(k, d[k]["verdict"], d[k]["reason"].replace(",", ";"))
            for k in ("in_dhat", "in_m", "in_dcheck", "in_d")]
    s.emit(d, (("class", "verdict", "reason"), rows))
    return EXIT_OK


def cmd_kernel(s: _Session, args) -> int:
    w = s.weight(args.weight)
    table = s.table(w)
    if args.t is not None:
        if args.z is None:
            raise UsageError("--t needs --z")
        val = averaged_kernel_eval(w, args.t, args.z, args.n, args.tol_kernel, table)
        payload = {"weight": w.label, "t": args.t, "z": [args.z.real, args.z.imag],
                   "value": [val.real, val.imag]}
        s.emit(payload, (("re", "im"), [(val.real, val.imag)]))
    elif args.z is not None or args.zeta is not None:
        z = args.z if args.z is not None else 0j
        zeta = args.zeta if args.zeta is not None else 0j
        kv = kernel_eval(w, z, zeta, args.n, args.tol_kernel, table)
        payload = {"weight": w.label, "z": [z.real, z.imag], "zeta": [zeta.real, zeta.imag],
                   "value": [kv.value.real, kv.value.imag], "tail_bound": float(kv.tail_bound),
                   "N": kv.N}
        s.emit(payload, (("re", "im", "tail_bound", "N"),
                         [(kv.value.real, kv.value.imag, float(kv.tail_bound), kv.N)]))
    else:
        n = args.n if args.n is not None else 64
        c = kernel_coeffs(w, n, table).coeffs
        payload = {"weight": w.label, "N": n, "coeffs": [[float(v), 0.0] for v in c]}
        s.emit(payload, (("n", "coeff"), list(enumerate(c.tolist()))))
    return EXIT_OK


def _read_coeffs(text: str) -> CoefficientSeries:
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    return CoefficientSeries.from_json(text)


def cmd_apply(s: _Session, args) -> int:
    w = s.weight(args.weight)
    f = _read_coeffs(args.coeffs)
    if args.degree is not None:
        if args.degree < 0:
            raise UsageError("--degree must be >= 0")
        f = f.padded(args.degree)
    g = apply(w, f, s.table(w))
    payload = {"weight": w.label, "degree": g.degree,
               "coeffs": [[float(c.real), float(c.imag)] for c in g.coeffs]}
    if args.z:
        payload["values"] = [{"z": [z.real, z.imag], "value": [v.real, v.imag]}
                             for z, v in ((z, g.evaluate(z)) for z in args.z)]
    s.emit(payload, (("n", "re", "im"),
                     [(n, c.real, c.imag) for n, c in enumerate(g.coeffs)]))
    return EXIT_OK


def cmd_scan(s: _Session, args) -> int:
    w = s.weight(args.weight)
    space = s.space(args.space)
    cfg = ScanConfig(NormConfig(tol=args.norm_tol, max_iter=args.max_iter),
                     tol_plateau=args.tol_plateau, slope_threshold=args.slope_threshold,
                     threads=max(1, args.threads))
    if args.dump_sections:
        Path(args.dump_sections).mkdir(parents=True, exist_ok=True)
    rep = boundedness_scan(w, space, args.ns, cfg, s.table(w), args.dump_sections)
    s.emit(rep.to_dict(), rep.curve())
    return EXIT_NUMERIC if rep.errors else EXIT_OK


def cmd_probe(s: _Session, args) -> int:
    w = s.weight(args.weight)
    space = s.space(args.space)
    if any(not 0 < a < 1 for a in args.a):
        raise UsageError("every a must lie in (0, 1)")
    rep = compactness_probe(w, space, args.a, args.tail, s.table(w))
    s.emit(rep.to_dict(), rep.curve())
    return EXIT_OK


def cmd_dirichlet(s: _Session, args) -> int:
    w = s.weight(args.weight)
    curve = dirichlet_divergence(w, args.nmax, s.table(w))
    s.emit(curve.to_dict(), curve.curve())
    return EXIT_OK


def cmd_necessity(s: _Session, args) -> int:
    w = s.weight(args.weight)
    space = s.space(args.space)
    rep = necessity_functionals(w, space, args.n, args.m, args.alpha, s.table(w))
    ds = rep["double_sum"]
    s.emit(rep, (("M", "double_sum", "fNM_ratio"),
                 list(zip(ds["M"], ds["values"], rep["family_ratio"]["fNM"]))))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--cache", metavar="PATH", help="moment cache CSV (read, then rewritten)")
    g.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    g.add_argument("--format", choices=("csv", "json"), default="json")
    g.add_argument("--tol", type=float, default=DEFAULT_TOL, help="moment quadrature tolerance")
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--no-timestamp", action="store_true")

    p = argparse.ArgumentParser(prog="gencesaro",
                                description="Numerical lab for generalized Cesaro operators.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("moments", cmd_moments, "moments of a radial weight")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--x", type=_floats)
    sp.add_argument("--x-range", type=_x_range, metavar="START:STOP:STEP")
    sp.add_argument("--method", choices=("auto", "closed", "quad"), default="auto")

    sp = add("classify", cmd_classify, "doubling-class verdicts")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--j-max", type=int, default=24)
    sp.add_argument("--window", type=int, default=8)
    sp.add_argument("--tol-plateau", type=float, default=0.10)
    sp.add_argument("--slope-threshold", type=float, default=0.02)

    sp = add("kernel", cmd_kernel, "Bergman kernel coefficients or values")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--n", type=int, help="series degree (adaptive when omitted)")
    sp.add_argument("--z", type=_complex)
    sp.add_argument("--zeta", type=_complex)
    sp.add_argument("--t", type=float, help="evaluate the averaged kernel K_t(z)")
    sp.add_argument("--tol-kernel", type=float, default=1e-13)

    sp = add("apply", cmd_apply, "apply the operator to Taylor coefficients")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--coeffs", required=True, help="JSON [[re,im],...] or @file")
    sp.add_argument("--degree", type=int)
    sp.add_argument("--z", type=lambda t: [_complex(v) for v in t.split(",")])

    sp = add("scan", cmd_scan, "section-norm growth scan")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--space", required=True)
    sp.add_argument("--ns", type=_ints, default=list(DEFAULT_NS))
    sp.add_argument("--norm-tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=20000)
    sp.add_argument("--tol-plateau", type=float, default=0.05)
    sp.add_argument("--slope-threshold", type=float, default=0.02)
    sp.add_argument("--dump-sections", metavar="DIR")

    sp = add("probe", cmd_probe, "non-compactness probe with f_a")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--space", required=True)
    sp.add_argument("--a", type=_floats, default=[0.9, 0.99, 0.999])
    sp.add_argument("--tail", type=float, default=1e-6)

    sp = add("dirichlet", cmd_dirichlet, "Dirichlet-norm divergence of C(1)")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--nmax", type=int, default=10000)

    sp = add("necessity", cmd_necessity, "necessity observables")
    sp.add_argument("--weight", required=True)
    sp.add_argument("--space", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=_ints, default=[4, 16, 64])
    sp.add_argument("--alpha", type=float, default=2.0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not (args.tol > 0 and math.isfinite(args.tol)):
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        session = _Session(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(session, args)
    except ArithmeticError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        session.save()


if __name__ == "__main__":
    sys.exit(main())
