"""waveplot: render figures from wavelab reports.

    waveplot render --spec FILE
    waveplot render-all --dir DIR [--out DIR]

Spec files are flat key=value with a [figure] section:

    [figure]
    kind = conservation
    input = out/conservation.csv extra_curve.csv
    out = figs/conservation.svg
    xscale = linear
    yscale = log
"""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, render, render_all
from .schema import SchemaError


def parse_spec_file(path: str) -> FigureSpec:
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line or line == "[figure]":
                continue
            if "=" not in line:
                raise SchemaError(f"{path}:{lineno}: expected key=value")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    try:
        inputs = values.pop("input").split()
        out = values.pop("out")
        kind = values.pop("kind")
    except KeyError as exc:
        raise SchemaError(f"{path}: missing required key {exc}") from None
    return FigureSpec(
        inputs=inputs,
        kind=kind,
        out=out,
        xscale=values.pop("xscale", "linear"),
        yscale=values.pop("yscale", "linear"),
        extra=values,
    )


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="waveplot", description=__doc__)
    sub = ap.add_subparsers(dest="command")
    one = sub.add_parser("render", help="render a single figure from a spec file")
    one.add_argument("--spec", required=True)
    allp = sub.add_parser("render-all", help="standard figure for every report in a directory")
    allp.add_argument("--dir", required=True)
    allp.add_argument("--out", default=None)
    args = ap.parse_args(argv)
    try:
        if args.command == "render":
            out = render(parse_spec_file(args.spec))
            print(f"wrote {out}")
            return 0
        if args.command == "render-all":
            for out in render_all(args.dir, args.out):
                print(f"wrote {out}")
            return 0
        ap.print_help()
        return 2
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
