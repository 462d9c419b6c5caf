"""Command-line entry point: ``polytv <subcommand> [options]``.

Exit status is 0 when every check passes, 1 when a check fails and 2 on a
usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .. import bounds
from ..errors import InputError, NotApplicableError
from ..quadpoly import QuadPoly
from . import campaigns, report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

GNSU_NOTE = ("gnsu_bound uses the caller-supplied constant gnsu_c; the original "
             "Kolmogorov bound only asserts that some numerical constant exists")


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 2 (argparse default)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_range(text: str) -> tuple:
    lo, _, hi = text.partition(":")
    try:
        lo_v = int(lo)
        hi_v = int(hi) if hi else lo_v
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO:HI, got {text!r}") from None
    return lo_v, hi_v


def _float_range(text: str) -> tuple:
    lo, _, hi = text.partition(":")
    try:
        lo_v = float(lo)
        hi_v = float(hi) if hi else lo_v
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X or LO:HI, got {text!r}") from None
    return lo_v, hi_v


def _float_list(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--format", choices=report.FORMATS, default="csv")
    common.add_argument("--tol", type=float, default=campaigns.DEFAULT_TOL,
                        help="absolute slack on tv <= bound checks (default 1e-6)")
    common.add_argument("--gnsu-c", type=float, default=1.0,
                        help="numerical constant for the GNSU Kolmogorov bound (default 1)")

    parser = _Parser(prog="polytv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", parents=[common], help="certify the TV bound on random pairs")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--rank", type=_int_range, default=(3, 6), help="N or LO:HI (default 3:6)")
    p.add_argument("--dim", type=_int_range, default=(3, 8), help="N or LO:HI (default 3:8)")
    p.add_argument("--eps", type=_float_range, default=(1e-3, 1e-1),
                   help="l2 distance, X or LO:HI sampled log-uniformly (default 1e-3:1e-1)")
    p.add_argument("--spectrum", choices=("uniform", "loguniform"), default="uniform")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")

    p = sub.add_parser("optimality", parents=[common],
                       help="TV/h ratios for z1^2 - z2^2 (and a rank-3 contrast)")
    p.add_argument("--h", type=_float_list, default=[1e-1, 1e-2, 1e-3],
                   help="decreasing shifts, comma separated (default 0.1,0.01,0.001)")

    p = sub.add_parser("norms", parents=[common], help="norm TV bound vs GNSU Kolmogorov bound")
    p.add_argument("--input", help="JSON array of {sigma_x, sigma_y, a, b} records")
    p.add_argument("--count", type=int, default=20,
                   help="random pairs to generate when --input is absent (default 20)")

    p = sub.add_parser("bound", parents=[common], help="TV bounds for a pair of polynomials")
    p.add_argument("f", help="JSON file with {quad, lin, const}")
    p.add_argument("g", help="JSON file with {quad, lin, const}")
    p.add_argument("--clamp", action="store_true", help="clamp bounds to 1")

    p = sub.add_parser("moments", parents=[common], help="closed-form mean and second moment")
    p.add_argument("f", help="JSON file with {quad, lin, const}")
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo check size (default 0)")
    return parser


def _load_poly(path: str) -> QuadPoly:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    try:
        return QuadPoly.from_dict(payload)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _emit(args, rows, columns, notes=None):
    report.write(report.render(rows, columns, args.format, notes), args.out)


def _cmd_verify(args) -> int:
    config = campaigns.VerifyConfig(count=args.count, rank=args.rank, dim=args.dim,
                                    eps=args.eps, spectrum_law=args.spectrum,
                                    seed=args.seed, tol=args.tol)
    rows = campaigns.run_verification(config, workers=args.workers)
    _emit(args, rows, campaigns.VERIFY_COLUMNS)
    failed = [r for r in rows if not r["pass"]]
    for r in failed:
        print(f"FAIL seed={r['seed']}: tv_lower={r['tv_lower']!r} > bound80={r['bound80']!r}",
              file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def _cmd_optimality(args) -> int:
    res = campaigns.run_optimality_demo(args.h)
    _emit(args, res.rows, campaigns.OPTIMALITY_COLUMNS)
    if res.increasing is False:
        print("FAIL: ratio tv_lower/h is not strictly increasing", file=sys.stderr)
    if not res.contrast_ok:
        print(f"FAIL: contrast ratio exceeds {bounds.TV_CONSTANT:g}", file=sys.stderr)
    return EXIT_OK if res.passed else EXIT_FAIL


def _cmd_norms(args) -> int:
    if args.gnsu_c <= 0:
        raise InputError("--gnsu-c must be positive")
    if args.input:
        try:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {args.input}: {exc.strerror or exc}") from None
        try:
            pairs = campaigns.parse_covariance_pairs(text)
        except InputError as exc:
            raise InputError(f"{args.input}: {exc}") from None
    else:
        pairs = campaigns.random_covariance_pairs(args.count, args.seed)
    rows = campaigns.run_norm_comparison(pairs, args.gnsu_c, args.tol)
    print(f"note: {GNSU_NOTE} (gnsu_c = {args.gnsu_c!r})", file=sys.stderr)
    _emit(args, rows, campaigns.NORM_COLUMNS, notes=[GNSU_NOTE])
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_FAIL


def _cmd_bound(args) -> int:
    f, g = _load_poly(args.f), _load_poly(args.g)
    rows = []
    for name, rep in (("tv80", bounds.tv_bound(f, g, args.clamp)),
                      ("structured160", bounds.tv_bound_structured(f, g, args.clamp))):
        rows.append({"kind": name, **rep.to_dict()})
    columns = ["kind", "bound", "constant", "s1", "s2", "l2", "applicable", "reason",
               "orientation"]
    _emit(args, rows, columns)
    return EXIT_OK


def _cmd_moments(args) -> int:
    f = _load_poly(args.f)
    if args.samples < 0:
        raise InputError("--samples must be nonnegative")
    row = campaigns.moments_report(f, args.samples, args.seed)
    _emit(args, [row], campaigns.MOMENT_COLUMNS)
    return EXIT_OK if row["pass"] else EXIT_FAIL


COMMANDS = {"verify": _cmd_verify, "optimality": _cmd_optimality, "norms": _cmd_norms,
            "bound": _cmd_bound, "moments": _cmd_moments}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NotApplicableError as exc:
        print(f"polytv {args.command}: not applicable: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, OSError) as exc:
        print(f"polytv {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
