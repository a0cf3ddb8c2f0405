"""spinplot: render spinctl output files as publication-style figures.

    spinplot wigner-sphere --in wigner_00.csv --out sphere.png
    spinplot rho-bars      --in state.json    --out rho.png
    spinplot histograms    --in stats_dir/    --out panels.png
    spinplot squeeze-curve --in sweep.csv     --out squeezing.png

Pure presentation: no physics is recomputed. Schema violations exit with
status 2 and name the offending field.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS
from .schema import SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="spinplot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in FIGURE_KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--in", dest="in_path", required=True, help="input file")
        p.add_argument("--out", dest="out_path", required=True, help="output image")
    args = parser.parse_args(argv)
    try:
        FIGURE_KINDS[args.kind](args.in_path, args.out_path)
    except SchemaError as exc:
        print(f"spinplot {args.kind}: schema error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"spinplot {args.kind}: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
