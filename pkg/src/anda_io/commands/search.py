import os

from tqdm import tqdm

import anda_io
from anda_io.bops import bops_reduction
from anda_io.commands.command_cls import (
    Command,
    add_oracle_options,
    add_shape_options,
    load_shape,
    manifest_config,
    mantissa_arg,
    positive_int,
    save_json,
)
from anda_io.constants import DEFAULT_INIT_HI, DEFAULT_INIT_LO, DEFAULT_MANTISSA_FLOOR, DEFAULT_MAX_ITERS, WORKLOAD_META_FILE
from anda_io.errors import InfeasibleSearch
from anda_io.meta_types import SearchResult
from anda_io.oracles import oracle_from_cli
from anda_io.search import SearchConfig, search
from anda_io.util import build_manifest, write_manifest


def workload_inputs(args: dict):
    if args.get("workload"):
        return [os.path.join(args["workload"], WORKLOAD_META_FILE)]
    return []


def open_oracle(args: dict):
    oracle = oracle_from_cli(args["oracle"], args)
    return oracle, getattr(oracle, "workload", None)


class SearchCommand(Command):
    COMMAND_SLUG = "search"

    @classmethod
    def make_parser(cls, subparsers):
        parser = subparsers.add_parser(cls.COMMAND_SLUG, help="Search per-module mantissa lengths")
        add_oracle_options(parser)
        add_shape_options(parser)
        parser.add_argument("--delta", type=float, default=0.01, help="Tolerated relative accuracy loss")
        parser.add_argument("--max-iters", type=positive_int, default=DEFAULT_MAX_ITERS, help="Oracle evaluations")
        parser.add_argument("--exhaust", action="store_true", help="Run until the queue is empty")
        parser.add_argument("--init-lo", type=mantissa_arg, default=DEFAULT_INIT_LO, help="Smallest uniform seed")
        parser.add_argument("--init-hi", type=mantissa_arg, default=DEFAULT_INIT_HI, help="Largest uniform seed")
        parser.add_argument("--floor", type=mantissa_arg, default=DEFAULT_MANTISSA_FLOOR, help="Lowest mantissa length tried")
        parser.add_argument("--trace", type=str, help="Write the search trace as JSON lines")
        parser.add_argument("--out", type=str, help="Write the result (feeds `anda simulate --comb`)")

    @classmethod
    def run(cls, args):
        cfg = SearchConfig(
            delta=args["delta"],
            max_iters=None if args["exhaust"] else args["max_iters"],
            init_lo=args["init_lo"],
            init_hi=args["init_hi"],
            floor=args["floor"],
        )
        oracle, workload = open_oracle(args)
        with oracle:
            shape = load_shape(args, workload)
            best, trace = search(shape, oracle, cfg, progress=True)
        inputs = workload_inputs(args)

        if args.get("trace"):
            trace.to_jsonl(args["trace"])
            write_manifest(build_manifest(cls.COMMAND_SLUG, manifest_config(args), inputs), args["trace"])
        result = SearchResult(
            version=anda_io.__version__,
            combination=list(best) if best else None,
            bops=trace.best_bops,
            bops_reduction=bops_reduction(best, shape) if best else None,
            delta=cfg.delta,
            fp_score=trace.fp_score,
            iterations=len(trace.records),
            shape=shape.model_dump(),
        )
        if args.get("out"):
            save_json(result.model_dump(), args["out"], args, inputs)

        if best is None:
            raise InfeasibleSearch(
                f"no combination kept the score >= {trace.threshold:.6g} within {len(trace.records)} evaluations"
            )
        tqdm.write(f"{len(trace.records)} evaluations, {trace.visited_count} combinations visited")
        print(f"best {best} bops_reduction {result.bops_reduction:.3f}")
        return 0
