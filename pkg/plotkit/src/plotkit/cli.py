"""plotkit command line: ``plotkit <kind> <inputs...> -o out.png``.

Kinds: entropy-convergence, profiles, schlieren, trajectories.
"""

from __future__ import annotations

import argparse
import sys

from . import figures
from .readers import ParseError, SchemaError

KINDS = ("entropy-convergence", "profiles", "schlieren", "trajectories")


def main(argv=None):
    parser = argparse.ArgumentParser(prog="plotkit")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("inputs", nargs="+")
    parser.add_argument("-o", "--out", required=True)
    args = parser.parse_args(argv)

    try:
        if args.kind == "entropy-convergence":
            _, slope = figures.plot_entropy_convergence(args.inputs[0], args.out)
            print(f"kind={args.kind} out={args.out} slope={slope:.2f}")
        elif args.kind == "profiles":
            figures.plot_profiles(args.inputs[0], args.out)
            print(f"kind={args.kind} out={args.out}")
        elif args.kind == "schlieren":
            figures.render_schlieren(args.inputs[0], args.out)
            print(f"kind={args.kind} out={args.out}")
        else:
            figures.plot_trajectories(args.inputs[0], args.out)
            print(f"kind={args.kind} out={args.out}")
    except (ParseError, SchemaError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
