#!/usr/bin/env python3

import argparse
import sys

from rich import print as rprint

from anda_io.errors import AndaError
from anda_io.layout import describe_container


def main():
    parser = argparse.ArgumentParser(description="Print the header of .anda / .andt files")
    parser.add_argument("paths", nargs="+", help="Container files")
    args = parser.parse_args()
    code = 0
    for path in args.paths:
        try:
            rprint({"path": path, **describe_container(path)})
        except (AndaError, OSError) as e:
            print(f"Error: {path}: {e}", file=sys.stderr)
            code = getattr(e, "EXIT_CODE", 1)
    sys.exit(code)


if __name__ == "__main__":
    main()
