from __future__ import annotations

import abc
import argparse
import json
import os
from typing import Iterable, Optional

import pandas as pd
from pydantic import ValidationError

from anda_io.bops import MODEL_PRESETS, ModelShape, PrecisionCombination
from anda_io.constants import MAX_MANTISSA_LEN, MIN_MANTISSA_LEN
from anda_io.errors import InfeasibleSearch, InvalidParams, UsageError
from anda_io.meta_types import ArchConfig, EnergyParams, SearchResult
from anda_io.sim import load_arch, load_energy
from anda_io.util import (
    build_manifest,
    expand_shorthand_path,
    write_json,
    write_manifest,
    write_table,
)

# only these arguments are attached to the tracing span
ARGS_ALLOWLIST = [
    "command",
    "library_version",
    "delta",
    "max_iters",
    "tokens",
    "m",
    "gs",
    "family",
    "platform",
    "exit_code",
]


class Command(abc.ABC):
    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if not hasattr(cls, "COMMAND_SLUG"):
            raise TypeError(
                f"Class {cls.__name__} lacks required class variable 'COMMAND_SLUG'"
            )

    @classmethod
    @abc.abstractmethod
    def make_parser(cls, subparsers):
        raise NotImplementedError()

    @classmethod
    @abc.abstractmethod
    def run(cls, args: dict) -> int:
        """
        Run the command and return its exit code.
        """
        raise NotImplementedError()


def mantissa_arg(value: str) -> int:
    try:
        m = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"mantissa length must be an integer, got '{value}'")
    if not MIN_MANTISSA_LEN <= m <= MAX_MANTISSA_LEN:
        raise argparse.ArgumentTypeError(
            f"mantissa length must be in {MIN_MANTISSA_LEN}..{MAX_MANTISSA_LEN}, got {m}"
        )
    return m


def positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return n


def add_shape_options(parser, required: bool = False):
    parser.add_argument(
        "--shape",
        type=str,
        required=required,
        help=f"Model shape: a JSON file or a preset ({', '.join(MODEL_PRESETS)})",
    )
    parser.add_argument("--n-layers", type=positive_int, help="Override the shape's layer count")


def add_cost_options(parser):
    parser.add_argument("--arch", type=str, help="arch.json (default: $ANDA_CONFIG_DIR or packaged)")
    parser.add_argument("--energy", type=str, help="energy.json (default: $ANDA_CONFIG_DIR or packaged)")


def add_table_outputs(parser, what: str):
    parser.add_argument("--csv", type=str, help=f"Write the {what} table (.csv, .json or .parquet)")
    parser.add_argument("--json", type=str, help=f"Write the {what} table as JSON records")
    parser.add_argument("--plot-data", type=str, help="Write x/y series for external plotting")


def add_oracle_options(parser):
    parser.add_argument(
        "--oracle",
        type=str,
        default="proxy",
        help="proxy | exec:<cmd> | files:<req>,<resp> | threshold:<m or m1,m2,m3,m4>",
    )
    parser.add_argument("--workload", type=str, help="Workload directory written by `anda gen`")
    parser.add_argument("--oracle-timeout", type=float, help="Seconds to wait for an external oracle reply")
    parser.add_argument("--oracle-restarts", type=int, default=2, help="Restarts after an oracle timeout")


def load_shape(args: dict, workload=None) -> ModelShape:
    overrides = {"n_layers": args["n_layers"]} if args.get("n_layers") else {}
    value = args.get("shape")
    if value is None:
        if workload is not None:
            return workload.shape().model_copy(update=overrides)
        raise UsageError("--shape is required (a preset name or a JSON file)")
    if value in MODEL_PRESETS:
        return ModelShape.preset(value, **overrides)
    path = expand_shorthand_path(value)
    if not os.path.isfile(path):
        raise UsageError(f"'{value}' is neither a shape preset nor a file")
    try:
        shape = ModelShape.from_json(path)
    except json.JSONDecodeError as e:
        raise InvalidParams(f"shape file {value} is not valid JSON", cause=e)
    except ValidationError as e:
        raise InvalidParams(f"invalid shape in {value}", cause=e)
    return shape.model_copy(update=overrides)


def load_combination(value: Optional[str]) -> PrecisionCombination:
    """
    `m1,m2,m3,m4`, or the path of a result file written by `anda search --out`.
    """
    if value is None:
        raise UsageError("--comb is required")
    path = expand_shorthand_path(value)
    if os.path.isfile(path):
        try:
            with open(path) as f:
                result = SearchResult(**json.load(f))
        except (json.JSONDecodeError, ValidationError, TypeError) as e:
            raise InvalidParams(f"{value} is not a search result file", cause=e)
        if result.combination is None:
            raise InfeasibleSearch(f"{value} records an infeasible search")
        return PrecisionCombination.of(result.combination)
    return PrecisionCombination.parse(value)


def load_costs(args: dict):
    arch: ArchConfig = load_arch(args.get("arch"))
    energy: EnergyParams = load_energy(args.get("energy"))
    return arch, energy


def cost_provenance(arch: ArchConfig, energy: EnergyParams) -> dict:
    provenance = {f"arch.{k}": v for k, v in arch.provenance.items()}
    provenance.update({f"energy.{k}": v for k, v in energy.provenance.items()})
    return provenance


def manifest_config(args: dict) -> dict:
    return {k: v for k, v in args.items() if not callable(v)}


def save_table(
    df: pd.DataFrame,
    path: str,
    args: dict,
    inputs: Iterable[str] = (),
    seed: Optional[int] = None,
    provenance: Optional[dict] = None,
) -> str:
    out = write_table(df, path)
    write_manifest(
        build_manifest(args["command"], manifest_config(args), inputs, seed, provenance),
        out,
    )
    return out


def save_json(
    obj,
    path: str,
    args: dict,
    inputs: Iterable[str] = (),
    seed: Optional[int] = None,
    provenance: Optional[dict] = None,
) -> str:
    out = write_json(obj, path)
    write_manifest(
        build_manifest(args["command"], manifest_config(args), inputs, seed, provenance),
        out,
    )
    return out


def save_table_outputs(df: pd.DataFrame, args: dict, inputs=(), seed=None, provenance=None):
    written = []
    if args.get("csv"):
        written.append(save_table(df, args["csv"], args, inputs, seed, provenance))
    if args.get("json"):
        written.append(save_table(df, args["json"], args, inputs, seed, provenance))
    return written
