from anda_io.commands.command_cls import (
    Command,
    add_cost_options,
    add_oracle_options,
    add_shape_options,
    add_table_outputs,
    cost_provenance,
    load_costs,
    load_shape,
    positive_int,
    save_json,
    save_table_outputs,
)
from anda_io.commands.search import open_oracle, workload_inputs
from anda_io.constants import DEFAULT_MAX_ITERS, DEFAULT_TOKENS
from anda_io.search import SearchConfig
from anda_io.sim import plot_series, tradeoff_sweep
from anda_io.util import parse_float_list


class TradeoffCommand(Command):
    COMMAND_SLUG = "tradeoff"

    @classmethod
    def make_parser(cls, subparsers):
        parser = subparsers.add_parser(
            cls.COMMAND_SLUG, help="Speedup and energy efficiency over FPFP per tolerated accuracy loss"
        )
        add_oracle_options(parser)
        add_shape_options(parser)
        parser.add_argument("--deltas", type=str, default="0.001,0.005,0.01,0.02,0.05", help="Comma-separated deltas")
        parser.add_argument("--max-iters", type=positive_int, default=DEFAULT_MAX_ITERS, help="Oracle evaluations per search")
        parser.add_argument("--tokens", type=positive_int, default=DEFAULT_TOKENS, help="Sequence length")
        add_cost_options(parser)
        add_table_outputs(parser, "trade-off")

    @classmethod
    def run(cls, args):
        deltas = parse_float_list(args["deltas"])
        arch, energy = load_costs(args)
        oracle, workload = open_oracle(args)
        with oracle:
            shape = load_shape(args, workload)
            table = tradeoff_sweep(
                shape,
                oracle,
                deltas,
                tokens=args["tokens"],
                arch=arch,
                energy=energy,
                cfg=SearchConfig(max_iters=args["max_iters"]),
                progress=True,
            )
        provenance = cost_provenance(arch, energy)
        inputs = workload_inputs(args)
        save_table_outputs(table, args, inputs=inputs, provenance=provenance)
        if args.get("plot_data"):
            save_json(
                plot_series(table, "delta", ["speedup", "energy_efficiency"]),
                args["plot_data"],
                args,
                inputs=inputs,
                provenance=provenance,
            )
        if not (args.get("csv") or args.get("json")):
            print(table.to_csv(index=False, float_format="%.10g", lineterminator="\n"), end="")
        return 0
