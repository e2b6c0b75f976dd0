"""render: draw one figure from a seqstop result CSV.

    render --kind stage-metric --in results/summary.csv --out auc.png --metric auc
    render --kind total-cost   --in results/stopping.csv --out cost.png [--study bcw]
    render --kind drift-deciles --in results/drift.csv --out drift.png
    render --kind projection   --in results/projection.csv --out proj.png
"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="render", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="source", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--study", default=None)
    parser.add_argument("--metric", default="auc")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        result = render(FigureSpec(kind=args.kind, source=args.source,
                                   out=args.out, study=args.study,
                                   metric=args.metric, title=args.title))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    extra = ""
    if "marked_stage" in result.annotations:
        extra = f" (minimum at {result.annotations['marked_stage']})"
    print(f"wrote {result.path} for study {result.study}{extra}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
