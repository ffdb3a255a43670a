"""Command line entry point: ``scspce generate|solve|report``.

Exit status is 0 on success, 2 when a run completed but some solve stopped
at an iteration cap, and 1 on error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiment
from .config import load_config

EXIT_OK, EXIT_ERROR, EXIT_FLAGGED = 0, 1, 2


def cmd_generate(args) -> int:
    experiment.generate(load_config(args.config), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    flagged = 0
    for method in args.method:
        n = experiment.solve(cfg, method, args.out)
        if n:
            logging.getLogger("scspce").warning("%s: %d solves stopped at an iteration cap",
                                                method, n)
        flagged += n
    return EXIT_FLAGGED if flagged else EXIT_OK


def cmd_report(args) -> int:
    files = args.results or sorted(Path(args.out).glob("results_*.csv"))
    rows = experiment.report(files, args.out)
    for row in rows:
        print(f"{row['method']:>4} m={row['m']:>6} eps_E={row['rel_err_mean']:.4e} "
              f"eps_sigma={row['rel_err_std']:.4e} flagged={row['flagged']}/{row['trials']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scspce", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="verb", required=True)

    gen = sub.add_parser("generate", help="draw samples and write FEM snapshots")
    gen.add_argument("--config", required=True)
    gen.add_argument("--out", default="run", help="working directory")
    gen.set_defaults(func=cmd_generate)

    sol = sub.add_parser("solve", help="run a recovery method on the generated snapshots")
    sol.add_argument("--config", required=True)
    sol.add_argument("--method", action="append", choices=experiment.METHODS, required=True,
                     help="may be repeated")
    sol.add_argument("--out", default="run", help="working directory")
    sol.set_defaults(func=cmd_solve)

    rep = sub.add_parser("report", help="average results over trials")
    rep.add_argument("results", nargs="*", help="results CSV files (default: all in --out)")
    rep.add_argument("--out", default="run", help="working directory")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:  # report, do not dump a traceback
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
