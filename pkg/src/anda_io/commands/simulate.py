import pandas as pd

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
from anda_io.names import ModuleNames, PlatformNames
from anda_io.sim import make_platform, plot_series, simulate_model, simulate_modules

TOTAL_ROW = "total"


def simulation_table(shape, comb, tokens, platform, baseline) -> pd.DataFrame:
    """
    One row per module (a single layer) plus the whole-model total, each with
    ratios against the same row on the baseline platform.
    """
    ours = simulate_modules(shape, comb, tokens, platform)
    base = simulate_modules(shape, comb, tokens, baseline)
    ours[TOTAL_ROW] = simulate_model(shape, comb, tokens, platform)
    base[TOTAL_ROW] = simulate_model(shape, comb, tokens, baseline)
    rows = []
    for scope in (*ModuleNames.ALL, TOTAL_ROW):
        row = {"scope": scope, **ours[scope].to_row()}
        row["speedup"] = ours[scope].speedup_over(base[scope])
        row["compute_speedup"] = ours[scope].compute_speedup_over(base[scope])
        row["energy_efficiency"] = ours[scope].energy_efficiency_over(base[scope])
        rows.append(row)
    return pd.DataFrame(rows)


class SimulateCommand(Command):
    COMMAND_SLUG = "simulate"

    @classmethod
    def make_parser(cls, subparsers):
        parser = subparsers.add_parser(cls.COMMAND_SLUG, help="Cycle and energy report for one platform")
        add_shape_options(parser, required=True)
        parser.add_argument("--comb", type=str, required=True, help="m1,m2,m3,m4 or a search result file")
        parser.add_argument("--tokens", type=positive_int, default=DEFAULT_TOKENS, help="Sequence length")
        parser.add_argument(
            "--platform",
            choices=[PlatformNames.ANDA, PlatformNames.FPFP, PlatformNames.FPINT, PlatformNames.IFPU, PlatformNames.FIGNA],
            default=PlatformNames.ANDA,
        )
        add_cost_options(parser)
        add_table_outputs(parser, "simulation")

    @classmethod
    def run(cls, args):
        shape = load_shape(args)
        comb = load_combination(args["comb"])
        arch, energy = load_costs(args)
        platform = make_platform(args["platform"], arch, energy)
        baseline = make_platform(PlatformNames.FPFP, arch, energy)
        table = simulation_table(shape, comb, args["tokens"], platform, baseline)
        provenance = cost_provenance(arch, energy)
        save_table_outputs(table, args, provenance=provenance)
        if args.get("plot_data"):
            save_json(
                plot_series(table, "scope", ["speedup", "energy_efficiency"]),
                args["plot_data"],
                args,
                provenance=provenance,
            )
        total = table[table["scope"] == TOTAL_ROW].iloc[0]
        print(
            f"{platform.label} {comb}: total_cycles {total['total_cycles']:.6g} "
            f"energy_pj {total['energy_total_pj']:.6g} speedup {total['speedup']:.4f} "
            f"energy_efficiency {total['energy_efficiency']:.4f}"
        )
        return 0
