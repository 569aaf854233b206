"""`plot <kind> <csv...> -o out.png` entry point.

Exit codes: 0 on success, 3 when an input lacks a required column (the
offending column is named on stderr), 1 for any other usage or I/O problem.
"""

from __future__ import annotations

import argparse
import sys

from .render import PLOT_KINDS, MissingColumnError, PlotJob, render

EXIT_MISSING_COLUMN = 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot", description=__doc__)
    parser.add_argument("kind", choices=PLOT_KINDS)
    parser.add_argument("inputs", nargs="+", metavar="csv")
    parser.add_argument("-o", "--output", required=True)
    parser.add_argument("--title", default="")
    parser.add_argument("--labels", default="",
                        help="comma-separated series labels")
    try:
        args = parser.parse_args(argv)
    except SystemExit:
        return 1
    labels = [s for s in args.labels.split(",") if s]
    job = PlotJob(kind=args.kind, inputs=args.inputs, output=args.output,
                  title=args.title, labels=labels)
    try:
        render(job)
    except MissingColumnError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_MISSING_COLUMN
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
