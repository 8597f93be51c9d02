"""Command line entry point: ``weightlab <verb> ...``.

Exit status: 0 when every verdict passes, 2 when one fails, 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import lab, theory
from .errors import WeightLabError
from .funcspace import INF, Interval, PiecewisePower, load_descriptor, parse_descriptor
from .lorentz import LorentzParams, lorentz_norm, profile_norm
from .maximal import GridSpec, maximal_centered_at, maximal_many, maximal_profile
from .weights import (
    SearchConfig,
    a1_two_weight,
    ainfty_fujii_wilson,
    ap_constant,
    ap_two_weight,
    reverse_holder_sup,
)

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _function(spec: str) -> PiecewisePower:
    """A descriptor file path, or inline pieces separated by ';'."""
    path = Path(spec)
    if path.is_file():
        return load_descriptor(path)
    return parse_descriptor(spec.replace(";", "\n"))


def _float(text: str) -> float:
    return INF if text.lower() in ("inf", "infinity") else float(text)


def _search_cfg(args) -> SearchConfig:
    return SearchConfig(
        domain=Interval(args.domain[0], args.domain[1]),
        levels=args.levels,
        adaptive=not args.no_adaptive,
    )


def _cmd_constants(args) -> int:
    w = _function(args.weight)
    cfg = _search_cfg(args)
    wr = csv.writer(sys.stdout, lineterminator="\n")
    wr.writerow(["constant", "p", "value", "argmax_lo", "argmax_hi", "K"])
    for kind in args.kind:
        if kind == "ap":
            est = ap_two_weight(_function(args.v), w, args.p, cfg) if args.v else ap_constant(w, args.p, cfg)
        elif kind == "ainfty":
            est = ainfty_fujii_wilson(w, cfg)
        elif kind == "a1":
            est = a1_two_weight(_function(args.v) if args.v else w, w, cfg)
        else:
            est = reverse_holder_sup(w, args.r, cfg)
        lo = hi = ""
        if isinstance(est.argmax, Interval):
            lo, hi = repr(est.argmax.lo), repr(est.argmax.hi)
        elif est.point is not None:
            lo = hi = repr(est.point)
        value = repr(est.value) if est.finite else f">{cfg.threshold:g}"
        wr.writerow([kind, repr(args.p), value, lo, hi, est.levels])
    return EXIT_OK


def _cmd_maximal(args) -> int:
    f = _function(args.f)
    wr = csv.writer(sys.stdout, lineterminator="\n")
    wr.writerow(["x", "Mf"])
    if args.centered:
        vals = [maximal_centered_at(f, x) for x in args.x]
    else:
        vals = maximal_many(f, args.x).tolist()
    for x, v in zip(args.x, vals):
        wr.writerow([repr(x), repr(float(v))])
    return EXIT_OK


def _cmd_norm(args) -> int:
    f, w = _function(args.f), _function(args.w)
    params = LorentzParams(args.p, args.q)
    if args.maximal:
        grid = GridSpec(Interval(args.domain[0], args.domain[1]), args.levels, args.density)
        lo, hi = profile_norm(maximal_profile(f, grid), w, params)
    else:
        lo = hi = lorentz_norm(f, w, params)
    wr = csv.writer(sys.stdout, lineterminator="\n")
    wr.writerow(["p", "q", "norm_lo", "norm_hi"])
    wr.writerow([repr(params.p), repr(params.q), repr(lo), repr(hi)])
    return EXIT_OK


def _cmd_bound(args) -> int:
    if args.formula == "buckley":
        inputs = {"p": args.p, "apc": args.apc}
        value = theory.buckley_bound(args.p, args.apc)
    elif args.formula == "main":
        inputs = {"p": args.p, "q": args.q, "r": args.r, "A": args.A, "weak_norm_pr": args.N}
        value = theory.main_theorem_bound(args.p, args.q, args.r, args.A, args.N)
    else:
        b = theory.BoundInputs(
            args.p, args.q, args.apc, args.ainfty_sigma, args.ainfty_w, args.a1_vw, args.a1_w, args.n, args.cn, args.A
        )
        inputs = b.__dict__.copy()
        fn = {"mixed": theory.mixed_bound_lorentz, "strong": theory.strong_bound, "dual": theory.dual_bound}[args.formula]
        value = fn(b)
    json.dump({"formula": args.formula, "inputs": inputs, "value": value}, sys.stdout, indent=2, default=repr)
    sys.stdout.write("\n")
    return EXIT_OK


def _summary(report_dict: dict) -> str:
    cfg = report_dict["config"]
    lines = [f"family {cfg['family']}  p={cfg['p']}  q={cfg['q']}  verdict={'PASS' if report_dict['verdict'] else 'FAIL'}"]
    for name, fit in report_dict["fits"].items():
        pred = "" if fit["predicted"] is None else f"  predicted {fit['predicted']:+.4f}"
        lines.append(f"  {name:14s} slope {fit['slope']:+.4f}  R2 {fit['r2']:.5f}{pred}  {'ok' if fit['ok'] else 'off'}")
    for name, ok in report_dict["checks"].items():
        lines.append(f"  {name:30s} {'ok' if ok else 'FAILED'}")
    return "\n".join(lines)


def _cmd_sweep(args) -> int:
    if args.config:
        cfg = lab.load_config(args.config)
    else:
        if not args.family:
            raise ValueError("give --config or --family")
        kw = {"family": args.family, "p": args.p, "q": args.q}
        if args.deltas:
            kw["deltas"] = tuple(args.deltas)
        if args.grid_levels:
            kw["grid_levels"] = args.grid_levels
        cfg = lab.SweepConfig(**kw)
    if args.out:
        cfg = replace(cfg, out=str(args.out))
    report = lab.run_sweep(cfg)
    print(_summary(report.to_dict()))
    return EXIT_OK if report.verdict else EXIT_FAIL


def _cmd_report(args) -> int:
    ok = True
    for path in args.paths:
        rec = lab.load_report(path)
        print(_summary(rec))
        ok = ok and rec["verdict"]
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weightlab", description="Weighted maximal-function experiments.")
    sub = ap.add_subparsers(dest="verb", required=True)

    def search_flags(p):
        p.add_argument("--domain", nargs=2, type=float, default=(-1.0, 1.0), metavar=("LO", "HI"))
        p.add_argument("--levels", type=int, default=8)
        p.add_argument("--no-adaptive", action="store_true")

    c = sub.add_parser("constants", help="estimate weight constants")
    c.add_argument("--weight", required=True, help="descriptor file or inline 'lo hi c a; ...'")
    c.add_argument("--v", help="first weight of a two-weight pair")
    c.add_argument("--p", type=float, default=2.0)
    c.add_argument("--r", type=float, default=1.5, help="exponent for the reverse Hoelder ratio")
    c.add_argument("--kind", nargs="+", choices=("ap", "ainfty", "a1", "rh"), default=["ap"])
    search_flags(c)
    c.set_defaults(run=_cmd_constants)

    m = sub.add_parser("maximal", help="evaluate the maximal function")
    m.add_argument("--f", required=True)
    m.add_argument("--x", nargs="+", type=float, required=True)
    m.add_argument("--centered", action="store_true")
    m.set_defaults(run=_cmd_maximal)

    n = sub.add_parser("norm", help="weighted Lorentz norm")
    n.add_argument("--f", required=True)
    n.add_argument("--w", default="-inf inf 1 0")
    n.add_argument("--p", type=float, required=True)
    n.add_argument("--q", type=_float, default=None)
    n.add_argument("--maximal", action="store_true", help="bracket the norm of Mf instead of f")
    n.add_argument("--domain", nargs=2, type=float, default=(-1e4, 1e4), metavar=("LO", "HI"))
    n.add_argument("--levels", type=int, default=24)
    n.add_argument("--density", type=int, default=256)
    n.set_defaults(run=_cmd_norm)

    b = sub.add_parser("bound", help="evaluate a closed-form bound")
    b.add_argument("--formula", required=True, choices=("buckley", "mixed", "main", "strong", "dual"))
    b.add_argument("--p", type=float, required=True)
    b.add_argument("--q", type=_float, default=None)
    b.add_argument("--r", type=float, default=None)
    b.add_argument("--A", type=float, default=0.0)
    b.add_argument("--N", type=float, default=1.0, help="weak-type norm supplied to the main bound")
    for name in ("apc", "ainfty-sigma", "ainfty-w", "a1-vw", "a1-w"):
        b.add_argument(f"--{name}", type=float, default=1.0)
    b.add_argument("--n", type=int, default=1)
    b.add_argument("--cn", type=float, default=1.0)
    b.set_defaults(run=_cmd_bound)

    s = sub.add_parser("sweep", help="run a delta sweep")
    s.add_argument("--config", type=Path)
    s.add_argument("--family", choices=lab.FAMILIES)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--q", type=_float, default=None)
    s.add_argument("--deltas", nargs="+", type=float)
    s.add_argument("--grid-levels", type=int)
    s.add_argument("--out", type=Path)
    s.set_defaults(run=_cmd_sweep)

    r = sub.add_parser("report", help="summarise stored sweep records")
    r.add_argument("paths", nargs="+", type=Path)
    r.set_defaults(run=_cmd_report)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "q", None) is None and hasattr(args, "q") and args.verb == "bound":
        args.q = args.p
    if args.verb == "bound" and args.formula == "main" and args.r is None:
        print("error: --r is required for the main bound", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.run(args)
    except (WeightLabError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
