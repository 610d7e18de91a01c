"""Command line entry: render one figure from a JSON spec."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureError, load_spec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render a figure from riet CSV outputs")
    parser.add_argument("spec", help="path to a figure-spec JSON file")
    args = parser.parse_args(argv)
    try:
        out = render(load_spec(args.spec))
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
