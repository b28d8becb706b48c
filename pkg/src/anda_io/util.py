from collections import OrderedDict
from pathlib import Path
import datetime
import hashlib
import json
import os
import sys
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd
from halo import Halo
from packaging.version import Version
from pydantic import BaseModel
from tqdm import tqdm

import anda_io
from anda_io.constants import MANIFEST_SUFFIX, OUTPUT_SCHEMA_VERSION
from anda_io.errors import UsageError
from anda_io.meta_types import RunManifest


def sort_recursive(d):
    """
    Recursively sort the nested dictionary by its keys.
    """
    if isinstance(d, BaseModel):
        return sort_recursive(d.model_dump())
    if isinstance(d, np.generic):
        return d.item()
    if isinstance(d, (list, tuple)):
        return [sort_recursive(v) for v in d]
    if isinstance(d, (str, int, float, bool)) or d is None:
        return d
    if not isinstance(d, dict):
        try:
            d = dict(d)
        except Exception:
            d = {"": str(d)}

    sorted_dict = OrderedDict()
    for key, value in sorted(d.items(), key=lambda kv: str(kv[0])):
        sorted_dict[str(key)] = sort_recursive(value)

    return sorted_dict


def convert_to_consistent_value(d):
    """
    Convert a nested dictionary to a consistent string regardless of key order.
    """
    sorted_dict = sort_recursive(d)
    return json.dumps(sorted_dict, sort_keys=True)


def extract_data_hash(arg_dict_combined):
    data_hash = hashlib.md5(
        convert_to_consistent_value(dict(arg_dict_combined)).encode("utf-8")
    )
    # make it 5 characters long
    return data_hash.hexdigest()[:5]


def file_digest(path) -> str:
    sha = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            sha.update(chunk)
    return sha.hexdigest()


def expand_shorthand_path(shorthand_path):
    """
    Expand shorthand notations in a file path to a full path-like object.

    :param shorthand_path: A string representing the shorthand path.
    :return: A string with the absolute path, or None.
    """
    if shorthand_path is None:
        return None
    expanded_path = os.path.expanduser(shorthand_path)
    full_path = Path(expanded_path).resolve()
    return str(full_path)


def spinner(text):
    # Halo draws escape codes; keep pipes and CI logs clean
    return Halo(text=text, spinner="dots", enabled=sys.stdout.isatty())


def parse_int_list(value: str) -> List[int]:
    """
    Parse "4,8,12", "4..16" or mixtures like "1,4..6" into a list of ints.
    """
    items: List[int] = []
    for part in str(value).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if lo > hi:
                raise UsageError(f"Empty range '{part}'")
            items.extend(range(lo, hi + 1))
        else:
            items.append(int(part))
    if not items:
        raise UsageError(f"Empty list '{value}'")
    return items


def parse_float_list(value: str) -> List[float]:
    items = [float(p) for p in str(value).split(",") if p.strip()]
    if not items:
        raise UsageError(f"Empty list '{value}'")
    return items


def manifest_path_for(output_path) -> str:
    return str(output_path) + MANIFEST_SUFFIX


def write_table(df: pd.DataFrame, path) -> str:
    """
    Write a result table, choosing the format from the file suffix.
    """
    path = str(path)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    if path.endswith(".parquet"):
        df.to_parquet(path, index=False, engine="pyarrow")
    elif path.endswith(".json"):
        df.to_json(path, orient="records", indent=2)
    else:
        df.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
    return path


def write_json(obj: Any, path) -> str:
    path = str(path)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as f:
        json.dump(sort_recursive(obj), f, indent=2)
        f.write("\n")
    return path


def build_manifest(
    command: str,
    config: Dict[str, Any],
    inputs: Iterable[str] = (),
    seed: Optional[int] = None,
    provenance: Optional[Dict[str, str]] = None,
) -> RunManifest:
    resolved = sort_recursive({k: v for k, v in config.items() if not callable(v)})
    digests = {}
    for path in inputs:
        if path is not None and os.path.isfile(path):
            digests[os.path.basename(path)] = file_digest(path)
    return RunManifest(
        command=command,
        config=json.loads(json.dumps(resolved)),
        seed=seed,
        tool_version=anda_io.__version__,
        input_digests=digests,
        output_schema=OUTPUT_SCHEMA_VERSION,
        config_hash=extract_data_hash(resolved),
        provenance=provenance or {},
        created_at=datetime.datetime.now().astimezone().isoformat(),
    )


def write_manifest(manifest: RunManifest, output_path) -> str:
    path = manifest_path_for(output_path)
    with open(path, "w") as f:
        f.write(manifest.model_dump_json(indent=2))
        f.write("\n")
    return path


def check_version(found_version: Optional[str], what: str) -> None:
    if found_version is None:
        tqdm.write(f"Warning: no version recorded in {what}")
        return
    if Version(found_version) > Version(anda_io.__version__):
        tqdm.write(
            f"Warning: The version of anda-io: ({anda_io.__version__}) is behind the version that wrote {what}: ({found_version})."
        )
        tqdm.write("Please upgrade anda-io to ensure compatibility.")
