"""``transduct`` command line.

Exit codes: 0 success, 1 selftest failure, 2 validation error, 3 numeric or
domain error.
"""

import argparse
import sys

from transduct._backend import BACKENDS, set_backend
from transduct.errors import DomainError, ScenarioError
from transduct.report import DEFAULT_PRECISION, FORMATS, render, run_cotter_pin
from transduct.scenario import parse_scenario, pseudo_count_note, run_scenario

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


def _int_list(text):
    text = text.strip()
    if not text:
        return []
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="transduct",
        description="Model-averaged versus plug-in predictive distributions.")
    parser.add_argument("--backend", choices=BACKENDS,
                        help="kernel implementation (default: numba when available)")
    sub = parser.add_subparsers(dest="command", required=True)

    cot = sub.add_parser("cotter", help="rejected-box table for a binomial defect process")
    cot.add_argument("--n0", type=_int_list, default=[100, 1000, 10000, 100000],
                     help="comma-separated prior sample sizes")
    cot.add_argument("--ratio", type=float, default=0.06, help="defect ratio r0/n0 of every prior sample")
    cot.add_argument("--n", type=int, default=100, help="box size")
    cot.add_argument("--threshold", type=int, default=10, help="a box fails with more than this many defects")
    cot.add_argument("--pseudo-count", type=float, default=0.0,
                     help="phantom defects and good items added to each prior sample")
    cot.add_argument("--format", choices=FORMATS, default="markdown")
    cot.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="significant digits")

    run = sub.add_parser("run", help="run a JSON scenario file")
    run.add_argument("scenario", help="path to the scenario file, or - for stdin")
    run.add_argument("-o", "--output", help="write the report here instead of stdout")

    sub.add_parser("selftest", help="run the built-in numeric checks")
    return parser


def _cotter(args):
    if args.precision < 1:
        raise ScenarioError("precision must be >= 1", "--precision")
    rows = run_cotter_pin(args.n0, args.ratio, args.n, args.threshold, args.pseudo_count)
    if args.pseudo_count:
        print(f"note: pseudo-count mode active ({args.pseudo_count:g})", file=sys.stderr)
    sys.stdout.write(render(rows, args.format, args.precision))
    return EXIT_OK


def _run(args):
    if args.scenario == "-":
        text = sys.stdin.read()
    else:
        with open(args.scenario, encoding="utf-8") as fh:
            text = fh.read()
    spec = parse_scenario(text)
    report = run_scenario(spec)
    note = pseudo_count_note(spec)
    if note:
        print(note, file=sys.stderr)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report)
    else:
        sys.stdout.write(report)
    return EXIT_OK


def _selftest(args):
    from transduct.selftest import run_all

    results = run_all()
    for check in results:
        print(check.line())
    passed = sum(c.passed for c in results)
    print(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if passed == len(results) else EXIT_SELFTEST


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.backend:
        set_backend(args.backend)
    handler = {"cotter": _cotter, "run": _run, "selftest": _selftest}[args.command]
    try:
        return handler(args)
    except ScenarioError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DomainError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
