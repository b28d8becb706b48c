from tqdm import tqdm

from anda_io.commands.command_cls import Command, positive_int, manifest_config
from anda_io.constants import DEFAULT_GEN_TOKENS, DEFAULT_SEED, WEIGHT_GROUP_SIZE
from anda_io.names import FamilyNames
from anda_io.util import build_manifest, expand_shorthand_path, spinner, write_manifest
from anda_io.workload.synthetic import gen_synthetic_layer, save_workload


class GenCommand(Command):
    COMMAND_SLUG = "gen"

    @classmethod
    def make_parser(cls, subparsers):
        parser = subparsers.add_parser(cls.COMMAND_SLUG, help="Generate a synthetic calibration layer")
        parser.add_argument("--out", type=str, required=True, help="Workload directory to write")
        parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="PRNG seed")
        parser.add_argument("--d-model", type=positive_int, default=128, help="Hidden size")
        parser.add_argument("--d-ff", type=positive_int, help="FFN size (default: 4 * d-model)")
        parser.add_argument("--tokens", type=positive_int, default=DEFAULT_GEN_TOKENS, help="Calibration tokens")
        parser.add_argument("--family", choices=FamilyNames.ALL, default=FamilyNames.OPT)
        parser.add_argument(
            "--chained",
            action="store_true",
            help="Feed each module's FP16 output forward as the next module's input",
        )
        parser.add_argument("--weight-group-size", type=positive_int, default=WEIGHT_GROUP_SIZE)

    @classmethod
    def run(cls, args):
        args["d_ff"] = args.get("d_ff") or 4 * args["d_model"]
        out = expand_shorthand_path(args["out"])
        with spinner("Generating synthetic layer"):
            workload = gen_synthetic_layer(
                seed=args["seed"],
                d_model=args["d_model"],
                d_ff=args["d_ff"],
                tokens=args["tokens"],
                family=args["family"],
                chained=args["chained"],
                weight_group_size=args["weight_group_size"],
            )
            meta_path = save_workload(workload, out)
        write_manifest(
            build_manifest(cls.COMMAND_SLUG, manifest_config(args), seed=args["seed"]),
            out,
        )
        tqdm.write(f"Workload written to {out}")
        print(meta_path)
        return 0
