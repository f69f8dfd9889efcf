"""CLI: plot <run_dir> --figure <kind> --out <path>."""

from __future__ import annotations

import argparse
import json
import sys

from .artifacts import MissingArtifact
from .figures import FIGURE_KINDS, render


def build_parser():
    p = argparse.ArgumentParser(
        prog="plot",
        description="Regenerate figures from a persisted run directory",
    )
    p.add_argument("run_dir", help="experiment run directory (with manifest.json)")
    p.add_argument("--figure", required=True, choices=FIGURE_KINDS)
    p.add_argument("--out", required=True, help="output image path (.png or .svg)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(args.run_dir, args.figure, args.out)
    except MissingArtifact as exc:
        print(json.dumps({"error": "MissingArtifact", "missing": exc.paths}),
              file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
