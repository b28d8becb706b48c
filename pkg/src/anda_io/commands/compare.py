from rich import print as rprint
from rich.table import Table

from anda_io.commands.command_cls import (
    Command,
    add_cost_options,
    add_shape_options,
    add_table_outputs,
    cost_provenance,
    load_combination,
    load_costs,
    load_shape,
    positive_int,
    save_json,
    save_table_outputs,
)
from anda_io.constants import DEFAULT_TOKENS
from anda_io.sim import compare, plot_series


def render_comparison(table, title: str) -> Table:
    view = Table(title=title)
    for column in ("platform", "total cycles", "compute pJ", "SRAM pJ", "DRAM pJ", "speedup", "energy eff."):
        view.add_column(column, justify="left" if column == "platform" else "right")
    for row in table.to_dict(orient="records"):
        view.add_row(
            row["platform"],
            f"{row['total_cycles']:.4g}",
            f"{row['energy_compute_pj']:.4g}",
            f"{row['energy_sram_pj']:.4g}",
            f"{row['energy_dram_pj']:.4g}",
            f"{row['speedup']:.3f}x",
            f"{row['energy_efficiency']:.3f}x",
        )
    return view


class CompareCommand(Command):
    COMMAND_SLUG = "compare"

    @classmethod
    def make_parser(cls, subparsers):
        parser = subparsers.add_parser(cls.COMMAND_SLUG, help="Compare Anda against the baseline accelerators")
        add_shape_options(parser, required=True)
        parser.add_argument("--comb", type=str, required=True, help="m1,m2,m3,m4 or a search result file")
        parser.add_argument("--tokens", type=positive_int, default=DEFAULT_TOKENS, help="Sequence length")
        add_cost_options(parser)
        add_table_outputs(parser, "comparison")

    @classmethod
    def run(cls, args):
        shape = load_shape(args)
        comb = load_combination(args["comb"])
        arch, energy = load_costs(args)
        table = compare(shape, comb, args["tokens"], arch, energy)
        provenance = cost_provenance(arch, energy)
        save_table_outputs(table, args, provenance=provenance)
        if args.get("plot_data"):
            save_json(
                plot_series(table, "platform", ["speedup", "compute_speedup", "energy_efficiency"]),
                args["plot_data"],
                args,
                provenance=provenance,
            )
        rprint(render_comparison(table, f"{comb} at {args['tokens']} tokens, normalized to FPFP"))
        return 0
