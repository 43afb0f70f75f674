"""``gogrow`` command-line front end.

Exit codes: 0 success, 2 usage or invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import abm, acceptance, analysis, io, spectral
from .dde import InvarianceViolation, IntegratorConfig, MeanFieldParams, integrate, mean_field_integrate
from .model import HistoryFunction, InvalidInputError, ModelParams

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(kind):
    def conv(s):
        v = kind(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v
    return conv


def _even_grid(s):
    n = int(s)
    if n < 16 or n % 2:
        raise argparse.ArgumentTypeError("N must be even and at least 16")
    return n


def _add_output(p, formats=("csv", "json")):
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=formats, default=formats[0])


def _add_phi(p):
    g = p.add_argument_group("initial function")
    g.add_argument("--phi", choices=("cos", "const"), default="cos",
                   help="cos: scale*(cos(a*t**power)+1); const: value")
    g.add_argument("--a", type=float, default=10.0)
    g.add_argument("--power", type=float, default=1.0)
    g.add_argument("--scale", type=float, default=0.005)
    g.add_argument("--value", type=float)


def _history(args) -> HistoryFunction:
    if args.phi == "const":
        if args.value is None:
            raise InvalidInputError("--phi const needs --value")
        return HistoryFunction.constant(args.value, args.N)
    if args.value is not None:
        raise InvalidInputError("--value only applies to --phi const")
    return analysis.cosine_history(args.a, args.power, args.scale, args.N)


def _emit(args, header, columns):
    if args.format == "json":
        io.write_json(args.out, {h: [float(v) for v in c] for h, c in zip(header, columns)})
    else:
        io.write_columns(args.out, header, columns)


# ---------------------------------------------------------------- commands

def cmd_simulate(args) -> int:
    params = ModelParams(args.rho)
    traj, diag = integrate(params, _history(args), IntegratorConfig(args.N, args.t_end))
    _emit(args, ["t", "x", "theta", "w", "I"],
          [diag.times, traj.values, diag.theta, diag.w, diag.running_integral])
    return EXIT_OK


def cmd_meanfield(args) -> int:
    mf = MeanFieldParams(args.r, args.tau, args.K, args.m0)
    s = mean_field_integrate(mf, IntegratorConfig(args.N, args.t_end, False))
    _emit(args, ["t", "m", "p", "p_check", "total_density"],
          [s.t, s.m, s.p, s.p_check, s.total_density])
    return EXIT_OK


def cmd_abm(args) -> int:
    if args.config:
        lp = abm.load_lattice_params(args.config)
    else:
        lp = abm.LatticeParams(args.dims, args.side, seeding=args.seeding, switch_rate=args.r,
                               cycle_delay=args.tau, motility_rate=args.motility)
    master = acceptance.master_seed() if args.seed is None else args.seed
    seeds = abm.spawn_seeds(master, args.runs)
    if args.runs == 1:
        s = abm.simulate(lp, seeds[0], args.t_end, args.dt)
        _emit(args, ["t", "m_density", "p_density", "total_density"],
              [s.t, s.m_density, s.p_density, s.total_density])
        return EXIT_OK
    res = abm.ensemble(lp, seeds, args.t_end, args.dt, threads=args.threads)
    header, cols = ["t"], [res.t]
    for key in ("m_density", "p_density", "total_density"):
        header += [f"{key}_mean", f"{key}_std"]
        cols += [res.mean[key], res.std[key]]
    _emit(args, header, cols)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    params = ModelParams(args.rho)
    rect = spectral.Rectangle(*args.rect) if args.rect else None
    roots = spectral.find_roots(args.equilibrium, params, rect, max_roots=args.max_roots)
    payload = io.roots_payload(args.rho, args.equilibrium, roots)
    if args.format == "json":
        io.write_json(args.out, payload)
    else:
        io.write_columns(args.out, ["re", "im", "residual"],
                         [[r.lam.real for r in roots], [r.lam.imag for r in roots],
                          [r.residual for r in roots]])
    return EXIT_OK


def cmd_chart(args) -> int:
    chart = spectral.stability_chart(args.j, args.samples)
    _emit(args, ["nu", "alpha", "beta"],
          [chart.nu_samples, chart.alpha_beta[:, 0], chart.alpha_beta[:, 1]])
    return EXIT_OK


def cmd_heteroclinic(args) -> int:
    params = ModelParams(args.rho)
    c = args.c if args.c is not None else 1e-5
    res = analysis.heteroclinic(params, c, IntegratorConfig(args.N, args.t_end, False))
    if args.format == "json":
        io.write_json(args.out, res.to_dict())
    else:
        io.write_columns(args.out, ["t", "x"], [res.trajectory.times, res.trajectory.values])
    return EXIT_OK


def cmd_gallery(args) -> int:
    if args.out == "-":
        raise InvalidInputError("gallery writes a directory; pass --out DIR")
    entries = analysis.shape_gallery(ModelParams(args.rho), None,
                                     IntegratorConfig(args.N, args.t_end, False),
                                     window=tuple(args.window))
    io.write_gallery(args.out, entries)
    return EXIT_OK


def cmd_accept(args) -> int:
    out = sys.stdout if args.out == "-" else open(args.out, "w")
    try:
        results = acceptance.run_all(args.only, echo=lambda s: print(s, file=out, flush=True))
        n_ok = sum(r.ok for r in results)
        print(f"{n_ok}/{len(results)} criteria passed", file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK if n_ok == len(results) else EXIT_NUMERIC


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gogrow", description="Delayed logistic go-or-grow toolkit.")
    parser.add_argument("--threads", type=_positive(int), help="cap on worker threads")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="integrate the dimensionless equation")
    p.add_argument("--rho", type=_positive(float), required=True)
    p.add_argument("--N", type=_even_grid, default=200, help="steps per delay")
    p.add_argument("--t-end", type=_positive(float), default=60.0)
    _add_phi(p)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("meanfield", help="integrate the dimensional mean-field system")
    p.add_argument("--r", type=_positive(float), default=1.0)
    p.add_argument("--tau", type=_positive(float), default=1.0)
    p.add_argument("--K", type=_positive(float), default=1.0)
    p.add_argument("--m0", type=float, default=0.05)
    p.add_argument("--N", type=_even_grid, default=200)
    p.add_argument("--t-end", type=_positive(float), default=20.0)
    _add_output(p)
    p.set_defaults(func=cmd_meanfield)

    p = sub.add_parser("abm", help="stochastic lattice simulation (ensemble if --runs > 1)")
    p.add_argument("--config", help="flat key = value file with lattice parameters")
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--side", type=_positive(int), default=100)
    p.add_argument("--seeding", type=float, default=0.05)
    p.add_argument("--r", type=_positive(float), default=1.0)
    p.add_argument("--tau", type=_positive(float), default=1.0)
    p.add_argument("--motility", type=float, help="default 10*r")
    p.add_argument("--runs", type=_positive(int), default=1)
    p.add_argument("--seed", type=int, help="master seed (default: $GOGROW_SEED)")
    p.add_argument("--t-end", type=_positive(float), default=10.0)
    p.add_argument("--dt", type=_positive(float), default=0.1, help="recording interval")
    _add_output(p)
    p.set_defaults(func=cmd_abm)

    p = sub.add_parser("spectrum", help="characteristic roots in a rectangle")
    p.add_argument("--rho", type=_positive(float), required=True)
    p.add_argument("--equilibrium", choices=spectral.TAGS, default=spectral.AT_STAR)
    p.add_argument("--rect", type=float, nargs=4, metavar=("RE_LO", "RE_HI", "IM_LO", "IM_HI"))
    p.add_argument("--max-roots", type=_positive(int))
    _add_output(p, ("json", "csv"))
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("chart", help="stability curve C_j in the (alpha, beta) plane")
    p.add_argument("--j", type=_positive(int), default=1)
    p.add_argument("--samples", type=_positive(int), default=200)
    _add_output(p)
    p.set_defaults(func=cmd_chart)

    p = sub.add_parser("heteroclinic", help="orbit from 0 to x* along the unstable direction")
    p.add_argument("--rho", type=_positive(float), required=True)
    p.add_argument("--c", type=_positive(float), help="launch amplitude (default 1e-5)")
    p.add_argument("--N", type=_even_grid, default=200)
    p.add_argument("--t-end", type=_positive(float), default=60.0)
    _add_output(p, ("json", "csv"))
    p.set_defaults(func=cmd_heteroclinic)

    p = sub.add_parser("gallery", help="transients for the built-in cosine histories")
    p.add_argument("--rho", type=_positive(float), required=True)
    p.add_argument("--N", type=_even_grid, default=200)
    p.add_argument("--t-end", type=_positive(float), default=60.0)
    p.add_argument("--window", type=float, nargs=2, default=(40.0, 60.0))
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("accept", help="run the acceptance suite")
    p.add_argument("--only", type=int, nargs="+", help="criterion numbers")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_accept)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"gogrow: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvarianceViolation, spectral.SubdivisionError, analysis.InsufficientOscillationError,
            FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"gogrow: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
