import numpy as np

from anda_io.commands.command_cls import Command, manifest_config
from anda_io.layout import read_container
from anda_io.names import DtypeNames
from anda_io.numfmt import decode_tensor
from anda_io.util import build_manifest, write_manifest
from anda_io.workload.tensor_io import save_tensor


class DecodeCommand(Command):
    COMMAND_SLUG = "decode"

    @classmethod
    def make_parser(cls, subparsers):
        parser = subparsers.add_parser(cls.COMMAND_SLUG, help="Decode an .anda container into an .andt tensor")
        parser.add_argument("--in", dest="input", type=str, required=True, help="Input .anda container")
        parser.add_argument("--out", type=str, required=True, help="Output .andt tensor")
        parser.add_argument(
            "--dtype",
            choices=[DtypeNames.FLOAT32, DtypeNames.FLOAT16],
            default=DtypeNames.FLOAT32,
            help="Element type of the decoded tensor",
        )

    @classmethod
    def run(cls, args):
        tensor = read_container(args["input"])
        values = decode_tensor(tensor).astype(np.dtype(args["dtype"]))
        save_tensor(values, args["out"])
        write_manifest(build_manifest(cls.COMMAND_SLUG, manifest_config(args), [args["input"]]), args["out"])
        print(f"wrote {args['out']} shape={values.shape} dtype={values.dtype}")
        return 0
