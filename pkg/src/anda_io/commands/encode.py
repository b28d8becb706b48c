import numpy as np

from anda_io.commands.command_cls import Command, mantissa_arg, manifest_config, positive_int
from anda_io.constants import DEFAULT_GROUP_SIZE, MAX_LANES_PER_WORD
from anda_io.errors import GroupTooWide
from anda_io.layout import write_container
from anda_io.numfmt import AndaParams, decode_tensor, encode_tensor, error_stats, truncation_bound
from anda_io.util import build_manifest, write_manifest
from anda_io.workload.tensor_io import load_tensor


def as_matrix(array: np.ndarray) -> np.ndarray:
    return array.reshape(1, -1) if array.ndim == 1 else array.reshape(-1, array.shape[-1])


class EncodeCommand(Command):
    COMMAND_SLUG = "encode"

    @classmethod
    def make_parser(cls, subparsers):
        parser = subparsers.add_parser(cls.COMMAND_SLUG, help="Encode an .andt tensor into an .anda container")
        parser.add_argument("--in", dest="input", type=str, required=True, help="Input .andt tensor")
        parser.add_argument("--out", type=str, required=True, help="Output .anda container")
        parser.add_argument("--gs", type=positive_int, default=DEFAULT_GROUP_SIZE, help="Group size (<= 64)")
        parser.add_argument("--m", type=mantissa_arg, required=True, help="Mantissa length 1..16")

    @classmethod
    def run(cls, args):
        if args["gs"] > MAX_LANES_PER_WORD:
            raise GroupTooWide(f"containers hold groups of at most {MAX_LANES_PER_WORD}, got --gs {args['gs']}")
        source = as_matrix(load_tensor(args["input"]))
        tensor = encode_tensor(source, AndaParams(group_size=args["gs"], mantissa_len=args["m"]))
        size = write_container(tensor, args["out"])
        write_manifest(build_manifest(cls.COMMAND_SLUG, manifest_config(args), [args["input"]]), args["out"])

        original = source.astype(np.float16).astype(np.float64)
        decoded = decode_tensor(tensor).astype(np.float64)
        stats = error_stats(original, decoded)
        within = bool(np.all(np.abs(decoded - original) <= truncation_bound(tensor)))
        print(
            f"wrote {args['out']} ({size} bytes) rows={tensor.rows} cols={tensor.cols} "
            f"max_abs={stats['max_abs']:.6g} nrmse={stats['nrmse']:.6g} within_bound={within}"
        )
        return 0
