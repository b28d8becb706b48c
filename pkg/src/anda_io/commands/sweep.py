import os

import numpy as np
import pandas as pd
from tqdm import tqdm

from anda_io.commands.command_cls import Command, save_table_outputs
from anda_io.constants import WORKLOAD_META_FILE
from anda_io.errors import InvalidParams, UsageError
from anda_io.numfmt import AndaParams, check_mantissa_len, decode_tensor, encode_tensor, error_stats
from anda_io.util import expand_shorthand_path, parse_int_list
from anda_io.workload.synthetic import CalibrationWorkload, load_workload

ALL_MODULES = "all"
SWEEP_COLUMNS = ["gs", "m", "module", "nrmse", "max_abs"]


def sweep_errors(workload: CalibrationWorkload, gs_list, m_list, progress: bool = False) -> pd.DataFrame:
    """
    Activation quantization error per (gs, m): one row per module and one
    pooled over every module's elements.
    """
    originals = {mod.module_type: mod.activations.astype(np.float64) for mod in workload.modules}
    rows = []
    grid = [(gs, m) for gs in gs_list for m in m_list]
    for gs, m in tqdm(grid, desc="Sweep", disable=not progress or None, leave=False):
        params = AndaParams(group_size=gs, mantissa_len=m)
        pooled_a, pooled_b = [], []
        for mod in workload.modules:
            decoded = decode_tensor(encode_tensor(mod.activations, params)).astype(np.float64)
            stats = error_stats(originals[mod.module_type], decoded)
            rows.append({"gs": gs, "m": m, "module": mod.module_type, **{k: stats[k] for k in ("nrmse", "max_abs")}})
            pooled_a.append(originals[mod.module_type].ravel())
            pooled_b.append(decoded.ravel())
        stats = error_stats(np.concatenate(pooled_a), np.concatenate(pooled_b))
        rows.append({"gs": gs, "m": m, "module": ALL_MODULES, "nrmse": stats["nrmse"], "max_abs": stats["max_abs"]})
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


class SweepCommand(Command):
    COMMAND_SLUG = "sweep"

    @classmethod
    def make_parser(cls, subparsers):
        parser = subparsers.add_parser(
            cls.COMMAND_SLUG, help="Activation error over group sizes and mantissa lengths"
        )
        parser.add_argument("--workload", type=str, required=True, help="Workload directory")
        parser.add_argument("--gs-list", type=str, default="64", help="Group sizes, e.g. 16,32,64 or 1..64")
        parser.add_argument("--m-list", type=str, default="1..16", help="Mantissa lengths, e.g. 4..16")
        parser.add_argument("--csv", type=str, help="Write the sweep table (.csv, .json or .parquet)")
        parser.add_argument("--json", type=str, help="Write the sweep table as JSON records")

    @classmethod
    def run(cls, args):
        gs_list = parse_int_list(args["gs_list"])
        m_list = [check_mantissa_len(m) for m in parse_int_list(args["m_list"])]
        if any(gs < 1 for gs in gs_list):
            raise InvalidParams(f"group sizes must be >= 1, got {gs_list}")
        directory = expand_shorthand_path(args["workload"])
        if not os.path.isdir(directory):
            raise UsageError(f"workload directory {args['workload']} not found")
        workload = load_workload(directory)
        table = sweep_errors(workload, gs_list, m_list, progress=True)
        save_table_outputs(table, args, inputs=[os.path.join(directory, WORKLOAD_META_FILE)], seed=workload.seed)
        if not (args.get("csv") or args.get("json")):
            print(table.to_csv(index=False, float_format="%.10g", lineterminator="\n"), end="")
        return 0
