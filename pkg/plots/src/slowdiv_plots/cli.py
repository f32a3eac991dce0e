"""slowdiv-plots: render figures from a directory of run artifacts.

Exit codes mirror the toolkit CLI: 0 on success, 2 when an artifact is
missing or malformed (the message names the file and column).
"""

import argparse
import os
import sys

from .errors import PlotDataError
from .figures import KINDS, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="slowdiv-plots",
        description="Render figures from slowdiv CSV artifacts (no recomputation)",
    )
    parser.add_argument(
        "kind", choices=(*sorted(KINDS), "all"),
        help="figure kind, or 'all' for every kind whose artifact exists",
    )
    parser.add_argument(
        "--dir", default=".",
        help="directory holding the CSV artifacts (default: current directory)",
    )
    parser.add_argument(
        "--out", default=None,
        help="output PNG path (single kind) or directory (all); "
             "defaults into --dir",
    )
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0

    try:
        if args.kind == "all":
            out_dir = args.out or args.dir
            os.makedirs(out_dir, exist_ok=True)
            written = []
            for kind, (_, files) in sorted(KINDS.items()):
                if not os.path.exists(os.path.join(args.dir, files[0])):
                    continue
                path = render(kind, args.dir,
                              os.path.join(out_dir, f"{kind}.png"), dpi=args.dpi)
                written.append(path)
            if not written:
                raise PlotDataError(f"no known artifacts in {args.dir}")
            for path in written:
                print(path)
        else:
            print(render(args.kind, args.dir, args.out, dpi=args.dpi))
    except PlotDataError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
