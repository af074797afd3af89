import argparse
import logging
import sys
from typing import List, Optional

from src.galgeo.cli.commands import cmd_check, cmd_geodesic, cmd_invariants
from src.galgeo.config import settings

logger = logging.getLogger("galgeo")


# ─────────────────────────────────────────────
# Arguments
# ─────────────────────────────────────────────
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="output format (stdout)")
    common.add_argument("--log-level", default=settings.log_level, help="logging level (logs go to stderr)")
    common.add_argument("--workers", type=int, default=settings.workers, help="threads for point batches")

    parser = argparse.ArgumentParser(
        prog="galgeo",
        description="Galilean Cartan connections of second-order ODE systems.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", parents=[common], help="verify the structure equations")
    check.add_argument("file", help="JSON system file")
    check.add_argument("--points", type=int, default=settings.check_points, help="random points to test")
    check.add_argument("--seed", type=int, default=settings.check_seed)
    check.add_argument("--tol", type=float, default=settings.check_tolerance)
    check.add_argument("--appendix", action="store_true", help="also run the jet-bundle torsion cross-check")
    check.set_defaults(handler=cmd_check)

    invariants = commands.add_parser("invariants", parents=[common], help="emit D, Q, P, Ttors at points")
    invariants.add_argument("file", help="JSON system file")
    where = invariants.add_mutually_exclusive_group(required=True)
    where.add_argument("--at", action="append", help='point such as "t=0,x=[2],y=[1]" (repeatable)')
    where.add_argument("--grid", help='grid such as "t=-1:1:3,x1=0:2:5"')
    invariants.add_argument("--chern", action="store_true", help="use D = 0, Qsym = 0 instead of the file's choice")
    invariants.add_argument("--deviation", action="store_true", help="append the eigenvalues of P")
    invariants.set_defaults(handler=cmd_invariants)

    geodesic = commands.add_parser("geodesic", parents=[common], help="integrate a geodesic")
    geodesic.add_argument("file", help="JSON system file")
    geodesic.add_argument("--init", required=True, help='initial point such as "t=0,x=[0],y=[1]"')
    geodesic.add_argument("--end", type=float, required=True, help="final value of t")
    geodesic.add_argument(
        "--step",
        type=float,
        default=1e-3,
        help="largest step in t; the interval is split into equal steps no longer than this so the last row lands on --end",
    )
    geodesic.add_argument("--develop", action="store_true", help="append the development and a straight-line summary")
    geodesic.add_argument("--tol", type=float, default=1e-5)
    geodesic.set_defaults(handler=cmd_geodesic)
    return parser


# ─────────────────────────────────────────────
# Entry
# ─────────────────────────────────────────────
def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(message)s",
        stream=sys.stderr,
    )
    logger.debug("running %s", args.command)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
