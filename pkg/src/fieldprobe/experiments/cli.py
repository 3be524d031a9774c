"""Command-line entry point: ``fieldprobe run|figure|verify``."""

import argparse
import sys

from ..errors import FieldProbeError
from . import config as cfgmod
from .figures import FIGURES, emit_figure_data, parse_overrides
from .runner import EXIT_INVARIANT, EXIT_OK, exit_status_for, run
from .verify import run_checks


def build_parser():
    parser = argparse.ArgumentParser(prog="fieldprobe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run every experiment in a config file")
    p_run.add_argument("config")

    p_fig = sub.add_parser("figure", help="write the table behind one figure")
    p_fig.add_argument("kind", choices=FIGURES)
    p_fig.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p_fig.add_argument("--output-dir", default=".")

    p_ver = sub.add_parser("verify", help="run the invariant suite")
    p_ver.add_argument("--quick", action="store_true")
    return parser


def _run_file(path):
    status = EXIT_OK
    for cfg in cfgmod.load(path):
        code, out = run(cfg)
        print(f"{cfg.kind}: wrote {out}" + ("" if code == EXIT_OK else " (invariant violated)"))
        status = max(status, code)
    return status


def _figure(kind, overrides, output_dir):
    code, out = emit_figure_data(kind, parse_overrides(overrides), output_dir)
    print(f"{kind}: wrote {out}")
    return code


def _verify(quick):
    results = run_checks(quick=quick)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.value:.3e} (tol {r.tolerance:.0e})")
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _run_file(args.config)
        if args.command == "figure":
            return _figure(args.kind, args.override, args.output_dir)
        return _verify(args.quick)
    except (FieldProbeError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_status_for(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
