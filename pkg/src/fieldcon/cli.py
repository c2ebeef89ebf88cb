"""Command-line entry point.

    fieldcon analyze <model|preset> [--gauge FILE] [--param NAME=RAT]... [--format text|json]
    fieldcon verify ansatz --a 2 --e 1 --k 0.7
    fieldcon verify oracle --preset jr-a1 [--dirac]
    fieldcon verify lattice --preset jr-a1 --n 256 --dt 1e-3 --t-end 10

Exit status: 0 success, 1 input error, 2 analysis obstruction (singular
bracket matrix, incomplete gauge) or a failed verification check.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .dirac import GaugeIncomplete, NonTermination, analyze_model, format_kernel_vector
from .frontend import GaugeSpec, ModelIR, ParseError, SemanticError, parse_gauge_file, parse_model
from .presets import PRESET_NAMES, preset_model
from .report import SCHEMA, analyze
from .symkernel import SingularMatrix
from .verifier.ansatz import DomainError, PlaneWaveConfig, SampleGrid, verify_ansatz
from .verifier.lattice import run_lattice
from .verifier.oracle import DEFAULT_VALUES, delta_oracle_records, dirac_oracle_records

EXIT_OK, EXIT_INPUT, EXIT_OBSTRUCTION = 0, 1, 2


class InputError(Exception):
    """Bad command-line input; reported with exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _binding(text: str) -> tuple[str, Fraction]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected NAME=RATIONAL, got {text!r}")
    try:
        return name.strip(), Fraction(value.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{value!r} is not a rational number") from None


def _float_binding(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAME=NUMBER, got {text!r}") from None


def load_model(spec: str) -> tuple[ModelIR, GaugeSpec | None, str]:
    """A preset name or a path to a ``.lag`` file."""
    if spec in PRESET_NAMES:
        m, gauge = preset_model(spec)
        return m, gauge, spec
    path = Path(spec)
    if not path.is_file():
        raise InputError(f"{spec!r} is neither a preset ({', '.join(PRESET_NAMES)}) nor a readable file")
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {spec}: {exc}") from None
    try:
        return parse_model(text, name=path.stem), None, path.stem
    except ParseError as exc:
        raise InputError(f"{spec}: {exc}") from None


def _load_gauge(path: str) -> GaugeSpec:
    try:
        return parse_gauge_file(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read gauge file {path}: {exc}") from None


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


# analyze ---------------------------------------------------------------------


def cmd_analyze(args) -> int:
    m, gauge, name = load_model(args.model)
    if args.gauge:
        gauge = _load_gauge(args.gauge)
    bindings = dict(args.param or [])
    try:
        report, _ = analyze(m, gauge, bindings, name=name)
    except GaugeIncomplete as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("kernel of the gauge-fixed bracket matrix:", file=sys.stderr)
        for v in exc.kernel:
            print("  " + format_kernel_vector(v, exc.labels), file=sys.stderr)
        return EXIT_OBSTRUCTION
    except (SingularMatrix, NonTermination) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OBSTRUCTION
    except ZeroDivisionError as exc:
        raise InputError(str(exc)) from None
    if args.format == "json":
        sys.stdout.write(report.dumps())
    else:
        sys.stdout.write(report.text())
    return EXIT_OK


# verify ----------------------------------------------------------------------


def _suite_report(suite: str, records, extra: dict | None = None) -> int:
    ok = all(r.passed for r in records)
    out = {"schema": SCHEMA, "suite": suite, "pass": ok, "records": [r.to_json() for r in records]}
    if extra:
        out.update(extra)
    _emit(out)
    return EXIT_OK if ok else EXIT_OBSTRUCTION


def cmd_verify_ansatz(args) -> int:
    cfg = PlaneWaveConfig(args.a, args.e, args.k, args.sigma_amp, args.h_amp)
    grid = SampleGrid(nt=args.nt, nx=args.nx)
    return _suite_report("ansatz", verify_ansatz(cfg, grid, args.tol), {"mass_squared": cfg.mass_squared})


def _values(args) -> dict[str, float]:
    values = dict(DEFAULT_VALUES)
    for k, v in args.value or []:
        values[k] = v
    return values


def _analysis(spec: str, gauge_path: str | None):
    m, gauge, name = load_model(spec)
    if gauge_path:
        gauge = _load_gauge(gauge_path)
    return analyze_model(m, gauge), name


def cmd_verify_oracle(args) -> int:
    cs, name = _analysis(args.preset, args.gauge)
    values = _values(args)
    records = delta_oracle_records(cs, name, n=args.n, seeds=args.seeds, rel_tol=args.tol, values=values)
    if args.dirac:
        if not cs.fully_second_class:
            raise InputError(f"{name} has first-class constraints; Dirac brackets need gauge conditions")
        records += dirac_oracle_records(cs, name, n=args.dirac_n, seeds=args.seeds, rel_tol=args.tol, values=values)
    return _suite_report("oracle", records)


def cmd_verify_lattice(args) -> int:
    cs, name = _analysis(args.preset, args.gauge)
    values = _values(args)
    gauge_mult = dict(args.multiplier or [])
    unknown = set(gauge_mult) - set(cs.space.multipliers)
    if unknown:
        raise InputError(f"unknown multiplier(s): {', '.join(sorted(unknown))}")
    _, report = run_lattice(cs, args.n, args.dt, args.t_end, args.seed, values, gauge_mult)
    params = {k: values[k] for k in cs.space.field_params}
    records = report.records(params, args.constraint_tol, args.energy_tol, args.current_tol)
    extra = {"n": args.n, "dt": args.dt, "steps": report.steps, "seed": args.seed}
    return _suite_report("lattice", records, extra)


# parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fieldcon", description="Constraint analysis for quadratic 1+1D field theories.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="run the constraint pipeline and print a report")
    a.add_argument("model", help=f"preset ({', '.join(PRESET_NAMES)}) or .lag file")
    a.add_argument("--gauge", metavar="FILE", help="gauge conditions, one density per line")
    a.add_argument("--param", metavar="NAME=RAT", type=_binding, action="append", help="bind a parameter")
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="numerical verification suites")
    vs = v.add_subparsers(dest="suite", required=True, parser_class=_Parser)

    va = vs.add_parser("ansatz", help="plane-wave solution residuals")
    va.add_argument("--a", type=float, required=True)
    va.add_argument("--e", type=float, required=True)
    va.add_argument("--k", type=float, required=True)
    va.add_argument("--sigma-amp", type=float, default=1.0)
    va.add_argument("--h-amp", type=float, default=0.5)
    va.add_argument("--nt", type=int, default=17)
    va.add_argument("--nx", type=int, default=33)
    va.add_argument("--tol", type=float, default=1e-10)
    va.set_defaults(func=cmd_verify_ansatz)

    def model_flags(sp):
        sp.add_argument("--preset", required=True, metavar="MODEL", help="preset name or .lag file")
        sp.add_argument("--gauge", metavar="FILE")
        sp.add_argument("--value", metavar="NAME=NUMBER", type=_float_binding, action="append",
                        help="numerical parameter value (defaults a=2.5, e=0.75)")

    vo = vs.add_parser("oracle", help="compare bracket kernels with the smeared lattice bracket")
    model_flags(vo)
    vo.add_argument("--n", type=int, default=512)
    vo.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    vo.add_argument("--tol", type=float, default=1e-6)
    vo.add_argument("--dirac", action="store_true", help="also check every Dirac bracket")
    vo.add_argument("--dirac-n", type=int, default=128)
    vo.set_defaults(func=cmd_verify_oracle)

    vl = vs.add_parser("lattice", help="RK4 evolution with drift monitoring")
    model_flags(vl)
    vl.add_argument("--n", type=int, default=256)
    vl.add_argument("--dt", type=float, default=1e-3)
    vl.add_argument("--t-end", type=float, default=10.0)
    vl.add_argument("--seed", type=int, default=0)
    vl.add_argument("--multiplier", metavar="NAME=VALUE", type=_float_binding, action="append",
                    help="constant value for a free multiplier (default 0)")
    vl.add_argument("--constraint-tol", type=float, default=1e-6)
    vl.add_argument("--energy-tol", type=float, default=1e-8)
    vl.add_argument("--current-tol", type=float, default=1e-3)
    vl.set_defaults(func=cmd_verify_lattice)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ParseError, SemanticError, DomainError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
