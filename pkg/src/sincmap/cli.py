"""Command line interface.

Usage mistakes such as bad flags or an unreadable problem exit with status
1.  Failures of the numerical routines exit with status 2.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from typing import Sequence

from .box import BoxProblem, Variant, box_expectation_reduced, box_expectation_tensor
from .catalog import BO_LORENTZIANS, BO_SPEED, ProblemSpec, get_problem, load_problem
from .errors import ConfigurationError, SincMapError
from .expr import ParseError
from .hilbert import LorentzianSumSolution, run_lorentzian_study
from .optimizer import optimize_map
from .quadrature import RuleConfig, convergence_study, rows_to_csv, trapezoid
from .sinc import (SincExpansion, fit_from_samples, pade_degrees, pade_poles, adaptive_integrate)
from .transforms import OuterMap

log = logging.getLogger(__name__)


class UsageError(Exception):
    """Raised for command line mistakes; maps to exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load(name: str) -> ProblemSpec:
    if name.endswith(".json") or os.path.sep in name:
        try:
            return load_problem(name)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read problem file {name}: {exc}") from None
    return get_problem(name)


def _emit_rows(header: Sequence[str], rows: Sequence[Sequence], fmt: str, out) -> None:
    if fmt == "json":
        json.dump([dict(zip(header, r)) for r in rows], out, indent=2)
        out.write("\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])


def _emit_json(obj, out) -> None:
    json.dump(obj, out, indent=2)
    out.write("\n")


def _complex(text: str) -> complex:
    try:
        z = complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None
    return complex(z.real, abs(z.imag))


def _outer(text: str) -> OuterMap:
    kind, *ends = text.split(":")
    try:
        if kind == "finite":
            return OuterMap.finite_tanh(*(float(v) for v in ends))
        return {"infinite": OuterMap.infinite_sinh, "semi_log": OuterMap.semi_inf_log,
                "semi_exp": OuterMap.semi_inf_exp}[kind]()
    except (KeyError, TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"bad domain {text!r}") from None


def _integrate_once(p: ProblemSpec, label: str, n: int) -> dict:
    T, params = p.transform(label)
    cfg = RuleConfig.auto(params, n)
    value = trapezoid(p.integrand, T, cfg)
    err = abs(value - p.reference) / abs(p.reference) if p.reference else None
    return {"problem": p.name, "transform": label, "n": n, "evaluations": cfg.evaluations,
            "value": value, "reference": p.reference, "rel_error": err}


def cmd_integrate(args, out) -> None:
    p = _load(args.problem)
    if args.adaptive or args.transform == "adaptive":
        res = adaptive_integrate(p.integrand, p.outer, eps=args.eps)
        data = res.to_json()
        data["problem"] = p.name
        if p.reference:
            data["rel_error"] = abs(res.value - p.reference) / abs(p.reference)
        if args.out == "csv":
            rows = [(s.phase, s.n, s.value, s.estimate) for s in res.steps]
            _emit_rows(("phase", "n", "value", "error_estimate"), rows, "csv", out)
        else:
            _emit_json(data, out)
        return
    label = args.transform or "opt"
    if args.n is not None:
        results = [_integrate_once(p, label, args.n)]
    else:
        # double n until two successive values agree to the requested tolerance
        results, n = [_integrate_once(p, label, 4)], 4
        while n < args.max_n:
            n *= 2
            results.append(_integrate_once(p, label, n))
            a, b = results[-1]["value"], results[-2]["value"]
            if abs(a - b) <= args.eps * abs(a):
                break
    if args.out == "csv":
        header = ("transform", "n", "evaluations", "value", "rel_error")
        _emit_rows(header, [tuple(r[k] for k in header) for r in results], "csv", out)
    else:
        _emit_json(results[-1], out)


def cmd_optimize_map(args, out) -> None:
    if args.problem:
        p = _load(args.problem)
        singularities, outer = p.singularities, p.outer
    else:
        if not args.pole:
            raise UsageError("give a problem or at least one --pole")
        singularities, outer = args.pole, args.domain
    sol = optimize_map(singularities, outer, args.xbar)
    _emit_json(sol.to_json(), out)


def cmd_convergence(args, out) -> None:
    p = _load(args.problem)
    labels = [args.transform] if args.transform else ["se", "de", "opt"]
    if "adaptive" in labels:
        raise UsageError("the convergence study takes se, de or opt")
    ns = [args.n] if args.n is not None else args.ns
    rows = convergence_study(p.integrand, p.reference, [p.transform(l) for l in labels], ns,
                             args.workers)
    if args.out == "json":
        _emit_json([r.__dict__ for r in rows], out)
    else:
        out.write(rows_to_csv(rows))


def cmd_pade_poles(args, out) -> None:
    p = _load(args.problem)
    label = args.transform or "de"
    if label == "adaptive":
        raise UsageError("pade-poles samples under se, de or opt")
    n = args.n if args.n is not None else 128
    r, s = pade_degrees(n)
    T, params = p.transform(label)
    step = RuleConfig.auto(params, n).step
    e = SincExpansion.from_function(p.integrand, T, n, step)
    approx = fit_from_samples(e, r, s)
    found = pade_poles(approx, args.count)
    poles = sorted(found.poles, key=lambda z: (abs(z.imag), z.real, z.imag))
    rows = [(z.real, z.imag) for z in poles]
    if args.out == "csv":
        _emit_rows(("re", "im"), rows, "csv", out)
    else:
        _emit_json({"problem": p.name, "transform": label, "n": n, "r": r, "s": s,
                    "condition": approx.condition, "residual": approx.residual,
                    "shortfall": found.shortfall, "poles": [list(z) for z in rows]}, out)


def cmd_bo_solve(args, out) -> None:
    label = args.transform or "opt"
    if label == "adaptive":
        raise UsageError("bo-solve takes se, de or opt")
    n = args.n if args.n is not None else 64
    sol = LorentzianSumSolution(BO_LORENTZIANS)
    rep = run_lorentzian_study(sol, BO_SPEED, label, n)
    if args.out == "json":
        data = rep.summary()
        data["grid"] = [[float(a), float(b), float(c)]
                        for a, b, c in zip(rep.grid, rep.exact, rep.computed)]
        _emit_json(data, out)
        return
    rows = list(zip(rep.grid.tolist(), rep.exact.tolist(), rep.computed.tolist()))
    _emit_rows(("x", "y_exact", "y_computed"), rows, "csv", out)
    summary = json.dumps(rep.summary())
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(summary + "\n")
    else:
        print(summary, file=sys.stderr)


def cmd_box(args, out) -> None:
    try:
        p = BoxProblem(args.m, args.kappa)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = {"m": p.m, "kappa": p.kappa}
    if args.method in ("reduced", "both"):
        # with both methods --n sizes the tensor rule; the reference refines itself
        data["reduced"] = box_expectation_reduced(p, args.n if args.method == "reduced" else None)
    if args.method in ("tensor", "both"):
        n = args.n if args.n is not None else 24
        try:
            data["tensor"] = box_expectation_tensor(p, n, args.variant, args.workers)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        data["variant"], data["n"] = args.variant, n
    if args.method == "both":
        data["discrepancy"] = abs(data["tensor"] - data["reduced"])
    if args.out == "csv":
        keys = list(data)
        _emit_rows(keys, [[data[k] for k in keys]], "csv", out)
    else:
        _emit_json(data, out)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", choices=("csv", "json"), default=None,
                        help="output format (default depends on the command)")
    common.add_argument("--n", type=int, default=None, help="nodes -n..n")
    common.add_argument("--transform", choices=("se", "de", "opt", "adaptive"), default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="sincmap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("integrate", parents=[common], help="integrate a catalog or file problem")
    p.add_argument("problem", help="catalog name or path to a JSON problem file")
    p.add_argument("--adaptive", action="store_true", help="locate singularities numerically")
    p.add_argument("--eps", type=float, default=1e-12, help="target relative accuracy")
    p.add_argument("--max-n", type=int, default=1024)
    p.set_defaults(func=cmd_integrate, default_out="json")

    p = sub.add_parser("optimize-map", parents=[common], help="solve the map parameter problem")
    p.add_argument("problem", nargs="?", help="catalog name or JSON problem file")
    p.add_argument("--pole", type=_complex, action="append", help="singularity, e.g. 0.5+0.5i")
    p.add_argument("--domain", type=_outer, default=OuterMap.finite_tanh(),
                   help="finite[:a:b], infinite, semi_log or semi_exp")
    p.add_argument("--xbar", type=float, default=20.0)
    p.set_defaults(func=cmd_optimize_map, default_out="json")

    p = sub.add_parser("convergence", parents=[common], help="error table against the reference")
    p.add_argument("problem")
    p.add_argument("--ns", type=int, nargs="+", default=[8, 16, 32, 64, 128])
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_convergence, default_out="csv")

    p = sub.add_parser("pade-poles", parents=[common], help="Sinc-Padé pole estimates")
    p.add_argument("problem")
    p.add_argument("--count", type=int, default=4, help="conjugate pairs to report")
    p.set_defaults(func=cmd_pade_poles, default_out="json")

    p = sub.add_parser("bo-solve", parents=[common], help="forced Benjamin-Ono wave")
    p.add_argument("--summary", help="write the JSON summary here instead of stderr")
    p.set_defaults(func=cmd_bo_solve, default_out="csv")

    p = sub.add_parser("box", parents=[common], help="box expectation <exp(-kappa |r|)>")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--method", choices=("reduced", "tensor", "both"), default="reduced")
    p.add_argument("--variant", choices=[v.value for v in Variant], default="optimized")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_box, default_out="json")
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = out if out is not None else sys.stdout
    args.out = args.out or args.default_out
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.n is not None and args.n < 1:
        print("sincmap: error: --n must be positive", file=sys.stderr)
        return 1
    try:
        args.func(args, out)
    except (UsageError, ConfigurationError, ParseError) as exc:
        print(f"sincmap: error: {exc}", file=sys.stderr)
        return 1
    except SincMapError as exc:
        print(f"sincmap: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
