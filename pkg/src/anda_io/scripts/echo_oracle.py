#!/usr/bin/env python3
"""
Test fixture speaking the JSON-lines oracle protocol on stdin/stdout.

Kept free of anda_io imports so it can be started by path with any interpreter.
"""

import argparse
import json
import sys
import time


def make_scorer(args):
    if args.mode == "min16":
        return lambda comb: min(comb) / 16
    minima = [int(v) for v in str(args.min).split(",")]
    if len(minima) == 1:
        minima = minima * 4
    if len(minima) != 4:
        raise SystemExit("--min takes one value or four comma-separated values")
    return lambda comb: 1.0 if all(m >= lo for m, lo in zip(comb, minima)) else 0.0


def serve(args, stdin=sys.stdin, stdout=sys.stdout):
    score = make_scorer(args)
    for line in stdin:
        if not line.strip():
            continue
        if args.sleep:
            time.sleep(args.sleep)
        if args.reply is not None:
            stdout.write(args.reply + "\n")
            stdout.flush()
            continue
        comb = json.loads(line)["comb"]
        value = args.fp_score if comb == "fp16" else score(comb)
        stdout.write(json.dumps({"score": value}) + "\n")
        stdout.flush()


def main():
    parser = argparse.ArgumentParser(description="Echo accuracy oracle for protocol tests")
    parser.add_argument("--mode", choices=["min16", "threshold"], default="min16")
    parser.add_argument("--min", type=str, default="6", help="Minimum length, one value or m1,m2,m3,m4")
    parser.add_argument("--fp-score", type=float, default=1.0, help="Score of the FP16 baseline")
    parser.add_argument("--reply", type=str, help="Send this line verbatim instead of a score")
    parser.add_argument("--sleep", type=float, default=0.0, help="Seconds to wait before each reply")
    serve(parser.parse_args())


if __name__ == "__main__":
    main()
