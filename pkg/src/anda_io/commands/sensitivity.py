from anda_io.commands.command_cls import Command, add_oracle_options, mantissa_arg, save_table_outputs
from anda_io.commands.search import open_oracle, workload_inputs
from anda_io.constants import DEFAULT_SENSITIVITY_FIXED
from anda_io.errors import UsageError
from anda_io.names import ModuleNames
from anda_io.numfmt import check_mantissa_len
from anda_io.search import module_sensitivity
from anda_io.util import parse_int_list


class SensitivityCommand(Command):
    COMMAND_SLUG = "sensitivity"

    @classmethod
    def make_parser(cls, subparsers):
        parser = subparsers.add_parser(
            cls.COMMAND_SLUG, help="Score each module's mantissa length with the others held fixed"
        )
        add_oracle_options(parser)
        parser.add_argument("--m-list", type=str, default="4..16", help="Mantissa lengths to try")
        parser.add_argument("--fixed", type=mantissa_arg, default=DEFAULT_SENSITIVITY_FIXED, help="Length of the other modules")
        parser.add_argument("--modules", type=str, default=",".join(ModuleNames.ALL), help="Modules to vary")
        parser.add_argument("--csv", type=str, help="Write the table (.csv, .json or .parquet)")
        parser.add_argument("--json", type=str, help="Write the table as JSON records")

    @classmethod
    def run(cls, args):
        m_values = [check_mantissa_len(m) for m in parse_int_list(args["m_list"])]
        modules = [m.strip() for m in args["modules"].split(",") if m.strip()]
        unknown = [m for m in modules if m not in ModuleNames.ALL]
        if unknown or not modules:
            raise UsageError(f"--modules takes a subset of {','.join(ModuleNames.ALL)}, got '{args['modules']}'")
        oracle, _ = open_oracle(args)
        with oracle:
            table = module_sensitivity(oracle, m_values, fixed=args["fixed"], modules=modules, progress=True)
        save_table_outputs(table, args, inputs=workload_inputs(args))
        if not (args.get("csv") or args.get("json")):
            print(table.to_csv(index=False, float_format="%.10g", lineterminator="\n"), end="")
        return 0
