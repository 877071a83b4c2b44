"""``entropy-ray`` command line.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error,
3 I/O error. Output files are written only after a command has fully
succeeded.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import experiments, scalarfn, systemfile, verify
from .channels import gamma
from .errors import ConvergenceError, DomainError
from .systemfile import fmt

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

_EVAL_ARITY = {"zeta": 2, "xi": 2, "rho": 3, "T": 0, "Ta": 1, "gamma": 1}


def _seed(text: str) -> int:
    val = int(text, 0)
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return val


def _count(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("count must be positive")
    return val


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entropy-ray", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate zeta, xi, rho, T, Ta or gamma")
    e.add_argument("function", choices=sorted(_EVAL_ARITY))
    e.add_argument("args", nargs="*", help="numbers, or a channel JSON file for gamma")

    b = sub.add_parser("build-example", help="emit the two-state example system as JSON")
    b.add_argument("--delta", type=float, default=0.01)
    b.add_argument("--out", help="write to this path instead of standard output")

    s = sub.add_parser("sweep", help="capacities across erasure probabilities, as CSV")
    s.add_argument("system", nargs="?", help="system JSON; defaults to the example at --delta")
    s.add_argument("--delta", type=float, default=0.01)
    s.add_argument("--grid", default="0:1:0.01", help="start:stop:step, stop included")
    s.add_argument("--out", help="CSV path; standard output if omitted")
    s.add_argument("--workers", type=_count, default=1)

    g = sub.add_parser("gap-witness", help="capacity gap just below the threshold")
    g.add_argument("--delta", type=float, default=0.001)
    g.add_argument("--iota", type=float, default=0.05)

    v = sub.add_parser("verify", help="run randomized property suites")
    v.add_argument("suite", choices=[*verify.SUITES, "all"])
    v.add_argument("--seed", type=_seed, default=0)
    v.add_argument("--n", type=_count, default=1000)
    v.add_argument("--side-file", help="side channel JSON used by the threshold suite")
    v.add_argument("--workers", type=_count, default=1)
    return p


def _number(text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise DomainError(f"not a number: {text!r}") from None
    if not math.isfinite(val):
        raise DomainError(f"argument must be finite, got {text!r}")
    return val


def _cmd_eval(args, out) -> int:
    fn, raw = args.function, args.args
    if len(raw) != _EVAL_ARITY[fn]:
        raise DomainError(f"{fn} takes {_EVAL_ARITY[fn]} argument(s), got {len(raw)}")
    if fn == "gamma":
        value = gamma(systemfile.load_channel(raw[0]))
    else:
        nums = [_number(x) for x in raw]
        value = {
            "zeta": lambda: scalarfn.zeta(*nums),
            "xi": lambda: scalarfn.xi(*nums),
            "rho": lambda: scalarfn.rho(*nums),
            "T": scalarfn.threshold_T,
            "Ta": lambda: scalarfn.threshold_Ta(*nums),
        }[fn]()
    print(fmt(value), file=out)
    return EXIT_OK


def _emit(text: str, path, out) -> None:
    if path:
        systemfile.write_text_atomic(path, text)
    else:
        out.write(text)


def _cmd_build_example(args, out) -> int:
    _emit(systemfile.dumps(experiments.build_example(args.delta)), args.out, out)
    return EXIT_OK


def _cmd_sweep(args, out) -> int:
    system = systemfile.load(args.system) if args.system else experiments.build_example(args.delta)
    rows = experiments.sweep(system, args.grid, workers=args.workers)
    _emit(experiments.sweep_csv(rows), args.out, out)
    return EXIT_OK


def _cmd_gap_witness(args, out) -> int:
    report = experiments.gap_witness(args.delta, args.iota)
    print("\n".join(report.lines()), file=out)
    return EXIT_OK


def _cmd_verify(args, out) -> int:
    opts = {}
    if args.side_file:
        opts["side"] = systemfile.load_channel(args.side_file).rows.tolist()
    report = verify.run(args.suite, seed=args.seed, n=args.n, opts=opts, workers=args.workers)
    print("\n".join(verify.format_report(report)), file=out)
    return EXIT_OK if report.ok else EXIT_VERIFY


_COMMANDS = {
    "eval": _cmd_eval,
    "build-example": _cmd_build_example,
    "sweep": _cmd_sweep,
    "gap-witness": _cmd_gap_witness,
    "verify": _cmd_verify,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad usage, 0 on --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args, out)
    except (DomainError, ConvergenceError) as exc:
        print(f"entropy-ray: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"entropy-ray: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
