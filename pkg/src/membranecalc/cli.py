"""Command-line front end: ``membranecalc <command> [options]``.

Exit status: 0 on success, 2 when a hypothesis or precondition fails,
1 on input, parse or I/O errors.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import expr as ex
from .genfun import CompactnessError, ModeratenessError, Representative
from .gennum import (GenNet, GridMismatchError, NormUndefinedError, NotInvertibleError, classification,
                     classify, sharp_norm)
from .holo import (ContourSetup, DivergenceRiskError, HypothesisError, cauchy_eval, taylor_coefficients,
                   taylor_eval)
from .membrane import MembraneError
from .pde import (FunctionSolution, MarginError, SourceDomainError, TransportProblem, residual_check,
                  transport_solve, wave_solve)
from .quad import (BoundDegenerateError, IntegrabilitySuspectError, green_check, interval_consistency,
                   line_integral_complex, line_integral_real, mean_value_bound, membrane_integral)
from .serialization import (InputError, Report, load_config, parse_history, parse_membrane,
                            parse_net, parse_problem, read_json, write_report)

PRECONDITION_ERRORS = (HypothesisError, NotInvertibleError, NormUndefinedError, DivergenceRiskError,
                       CompactnessError, ModeratenessError, MembraneError, BoundDegenerateError,
                       MarginError, SourceDomainError, IntegrabilitySuspectError, ex.DomainError)
INPUT_ERRORS = (InputError, ex.ExprError, GridMismatchError, OSError, ValueError)


# --------------------------------------------------------------- helpers


def _params(args) -> dict:
    out = {}
    for item in args.param or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--param expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise InputError(f"--param {name}: not a number") from None
    if args.s is not None:
        out["s"] = args.s
    return out


def _rep(body: str, arity: int, grid, codomain: str = "real") -> Representative:
    return Representative.parse(body, arity, codomain=codomain, grid=grid)


def _probe(text: str, grid, n: int, params):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n + 1:
        raise InputError(f"probe {text!r} needs {n} coordinates and a time")
    xs = [parse_net(p, grid, params) for p in parts[:-1]]
    x = xs[0] if n == 1 else GenNet.stack(xs)
    return x, parse_net(parts[-1], grid, params)


# ------------------------------------------------------------- commands


def cmd_classify(args, cfg, grid, params) -> Report:
    if (args.expr is None) == (args.net is None):
        raise InputError("give exactly one of --expr or --net")
    net = parse_net(args.expr, grid, params) if args.expr is not None else parse_net(read_json(args.net), grid)
    cls = classify(net)
    rep = Report("classify", {"expr": args.expr, "net": args.net}, cfg, {"net": (net, cls)})
    try:
        rep.scalars["sharp_norm"] = sharp_norm(net)
    except NormUndefinedError:
        rep.scalars["sharp_norm"] = None
    return rep


def cmd_integrate(args, cfg, grid, params) -> Report:
    M = parse_membrane(read_json(args.membrane), grid, params)
    f = _rep(args.f, M.dim, grid, args.codomain)
    val, size = membrane_integral(f, M, cfg.quad)
    return Report("integrate", {"f": args.f, "membrane": args.membrane, "params": params}, cfg,
                  {"integral": (val, classify(val)), "integral_abs": (size, None)})


def cmd_line(args, cfg, grid, params) -> Report:
    gamma = parse_history(read_json(args.history), grid, params)
    if (args.f is None) == (not args.field):
        raise InputError("give either --f (complex) or --field components (real)")
    if args.f is not None:
        val = line_integral_complex(_rep(args.f, 1, grid, "complex"), gamma, cfg.quad)
    else:
        val = line_integral_real([_rep(c, gamma.dim, grid) for c in args.field], gamma, cfg.quad)
    return Report("line", {"f": args.f, "field": args.field, "history": args.history, "params": params},
                  cfg, {"integral": (val, classify(val))})


def _setup(args, grid, params) -> ContourSetup:
    gamma = parse_history(read_json(args.contour), grid, params)
    return ContourSetup.build(_rep(args.f, 1, grid, "complex"), gamma, parse_net(args.z0, grid, params))


def cmd_cauchy(args, cfg, grid, params) -> Report:
    setup = _setup(args, grid, params)
    res = cauchy_eval(setup, cfg.quad)
    diff = res.via_contour - res.direct
    rep = Report("contour-cauchy", {"f": args.f, "contour": args.contour, "z0": args.z0, "params": params}, cfg,
                 {"via_contour": (res.via_contour, classify(res.via_contour)),
                  "direct": (res.direct, classify(res.direct)),
                  "gap": (diff, res.gap_class),
                  "distance": (setup.distance, setup.separation)})
    rep.scalars["cr_residual"] = setup.cr_residual
    return rep


def cmd_taylor(args, cfg, grid, params) -> Report:
    setup = _setup(args, grid, params)
    coeffs = taylor_coefficients(setup, args.n_max, cfg.quad)
    nets = {f"a{n}": (a, classify(a)) for n, a in enumerate(coeffs)}
    rep = Report("taylor", {"f": args.f, "contour": args.contour, "z0": args.z0, "n_max": args.n_max,
                            "z": args.z, "params": params}, cfg, nets)
    for k, z in enumerate(args.z or []):
        res = taylor_eval(setup, coeffs, parse_net(z, grid, params), cfg.quad)
        rep.nets[f"series{k}"] = (res.series, None)
        rep.nets[f"gap{k}"] = (res.series - res.direct, res.gap_class)
        rep.scalars[f"probe{k}"] = {"z": z, "terms_used": res.terms_used, "in_v_rho": res.in_v_rho,
                                    "distance_norm": res.distance_norm}
    if cfg.format == "csv":
        header = ["n"]
        for e in grid.samples:
            header += [f"re@{float(e)!r}", f"im@{float(e)!r}"]
        header += ["valuation", "kind"]
        rows = [header]
        for n, a in enumerate(coeffs):
            c = classify(a).to_json()
            vals = np.asarray(a.values, dtype=complex)
            row = [n]
            for v in vals:
                row += [repr(float(v.real)), repr(float(v.imag))]
            rows.append(row + [c["valuation"], c["kind"]])
        rep.table = rows
    return rep


def cmd_green(args, cfg, grid, params) -> Report:
    if len(args.field or []) != 2:
        raise InputError("green needs exactly two --field components")
    gamma = parse_history(read_json(args.history), grid, params)
    M = parse_membrane(read_json(args.membrane), grid, params)
    res = green_check([_rep(c, 2, grid) for c in args.field], gamma, M, cfg.quad)
    return Report("green", {"field": args.field, "history": args.history, "membrane": args.membrane,
                            "params": params}, cfg,
                  {"lhs": (res.lhs, classify(res.lhs)), "rhs": (res.rhs, classify(res.rhs)),
                   "gap": (res.lhs - res.rhs, res.gap_class)})


def cmd_meanvalue(args, cfg, grid, params) -> Report:
    M = parse_membrane(read_json(args.membrane), grid, params)
    res = mean_value_bound(_rep(args.f, M.dim, grid), M, cfg.quad)
    rep = Report("meanvalue", {"f": args.f, "membrane": args.membrane, "params": params}, cfg,
                 {"integral": (res.integral, classify(res.integral)), "volume": (res.volume, classify(res.volume))})
    rep.scalars["r_star"] = res.r_star
    return rep


def _pde(args, cfg, grid, params, name: str) -> Report:
    problem = parse_problem(read_json(args.problem), grid, params)
    transport = isinstance(problem, TransportProblem)
    if transport != (name == "transport"):
        raise InputError(f"{args.problem} does not describe a {name} problem")
    n = problem.n if transport else 1
    sol = transport_solve(problem) if transport else wave_solve(problem, cfg.quad)
    if args.candidate:
        sol = FunctionSolution.parse(args.candidate, n, grid)
    if not args.probe:
        raise InputError("give at least one --probe X,T")
    probes = [_probe(p, grid, n, params) for p in args.probe]
    rep = Report(name, {"problem": args.problem, "probe": args.probe, "candidate": args.candidate,
                        "h_fd": args.h_fd, "params": params}, cfg)
    for k, (x, t) in enumerate(probes):
        u = sol(x, t)
        rep.nets[f"u{k}"] = (u, classify(u))
    res = residual_check(sol, problem, probes, args.h_fd)
    rep.nets["residual"] = (res.residual, res.raw)
    rep.nets["residual_floor"] = (res.floor, None)
    rep.scalars["raw_class"] = res.raw.to_json()
    rep.scalars["scaled_class"] = res.scaled.to_json()
    return rep


def cmd_transport(args, cfg, grid, params) -> Report:
    return _pde(args, cfg, grid, params, "transport")


def cmd_wave(args, cfg, grid, params) -> Report:
    return _pde(args, cfg, grid, params, "wave")


def cmd_consistency(args, cfg, grid, params) -> Report:
    a, b = parse_net(args.a, grid, params), parse_net(args.b, grid, params)
    res = interval_consistency(_rep(args.f, 1, grid), a, b, cfg.quad)
    return Report("consistency", {"f": args.f, "a": args.a, "b": args.b, "params": params}, cfg,
                  {"membrane_val": (res.membrane_val, classify(res.membrane_val)),
                   "line_val": (res.line_val, classify(res.line_val)),
                   "gap": (res.membrane_val - res.line_val, res.gap_class)})


COMMANDS = {
    "classify": cmd_classify, "integrate": cmd_integrate, "line": cmd_line,
    "contour-cauchy": cmd_cauchy, "taylor": cmd_taylor, "green": cmd_green,
    "meanvalue": cmd_meanvalue, "transport": cmd_transport, "wave": cmd_wave,
    "consistency": cmd_consistency,
}


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1; status 2 is reserved for failed hypotheses."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run options")
    g.add_argument("--config", help="JSON run config (default: $MEMBRANE_CALC_CONFIG)")
    g.add_argument("--grid-kmin", type=int, help="first grid index k (eps = 10^(-k/4))")
    g.add_argument("--grid-kmax", type=int, help="last grid index k")
    g.add_argument("--tail", type=int, help="number of tail samples used for classification")
    g.add_argument("--out", help="report path (default: standard output)")
    g.add_argument("--format", choices=["json", "csv"])
    g.add_argument("--workers", type=int, help="threads for per-eps work")
    g.add_argument("--force", action="store_true", help="overwrite an existing report")
    g.add_argument("--param", action="append", metavar="NAME=VALUE",
                   help="value for alpha:NAME placeholders in input files")
    g.add_argument("--s", type=float, help="shorthand for --param s=VALUE")

    parser = _Parser(prog="membranecalc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="classify a net")
    p.add_argument("--expr", help="expression in eps")
    p.add_argument("--net", help="JSON file holding a net")

    p = sub.add_parser("integrate", parents=[common], help="integrate over a membrane")
    p.add_argument("--f", required=True)
    p.add_argument("--membrane", required=True)
    p.add_argument("--codomain", choices=["real", "complex"], default="real")

    p = sub.add_parser("line", parents=[common], help="line integral along a history")
    p.add_argument("--field", action="append", help="real field component (repeat per axis)")
    p.add_argument("--f", help="complex integrand in z")
    p.add_argument("--history", required=True)

    for name, hlp in (("contour-cauchy", "Cauchy formula check"), ("taylor", "Taylor coefficients")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("--f", required=True, help="holomorphic integrand in z")
        p.add_argument("--contour", required=True)
        p.add_argument("--z0", required=True)
        if name == "taylor":
            p.add_argument("--n-max", type=int, default=10)
            p.add_argument("--z", action="append", help="evaluation point for the series (repeatable)")

    p = sub.add_parser("green", parents=[common], help="Green's identity check")
    p.add_argument("--field", action="append")
    p.add_argument("--history", required=True)
    p.add_argument("--membrane", required=True)

    p = sub.add_parser("meanvalue", parents=[common], help="mean-value power bound")
    p.add_argument("--f", required=True)
    p.add_argument("--membrane", required=True)

    for name in ("transport", "wave"):
        p = sub.add_parser(name, parents=[common], help=f"{name} equation solution and residual")
        p.add_argument("--problem", required=True)
        p.add_argument("--probe", action="append", help="X,T (one coordinate per axis, then the time)")
        p.add_argument("--candidate", help="check this expression in x1..xn, t instead of the solution")
        p.add_argument("--h-fd", type=float, default=1e-5)

    p = sub.add_parser("consistency", parents=[common], help="interval vs segment integral")
    p.add_argument("--f", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    return parser


def resolve_config(args, env=None):
    cfg = load_config(args.config, os.environ if env is None else env)
    grid = cfg.grid
    overrides = {k: v for k, v in (("k_min", args.grid_kmin), ("k_max", args.grid_kmax), ("tail", args.tail))
                 if v is not None}
    try:
        if overrides:
            grid = replace(grid, **overrides)
        cfg = replace(cfg, grid=grid, format=args.format or cfg.format, out=args.out or cfg.out,
                      workers=args.workers or cfg.workers)
    except ValueError as exc:
        raise InputError(f"invalid run option: {exc}") from exc
    return cfg


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        grid = cfg.grid.build()
        params = _params(args)
        with classification(cfg.classify):
            report = COMMANDS[args.command](args, cfg, grid, params)
        write_report(report, grid, cfg.out, cfg.format, args.force, stdout)
    except PRECONDITION_ERRORS as exc:
        print(f"membranecalc: hypothesis not met: {exc}", file=stderr)
        return 2
    except FileExistsError as exc:
        print(f"membranecalc: {exc}", file=stderr)
        return 1
    except INPUT_ERRORS as exc:
        print(f"membranecalc: {exc}", file=stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
