import os

import numpy as np

from anda_io.errors import DtypeUnsupported
from anda_io.layout import read_raw_tensor, write_raw_tensor
from anda_io.weights import QuantizedWeightMatrix


def save_tensor(array: np.ndarray, path) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(str(path))), exist_ok=True)
    write_raw_tensor(array, path)
    return str(path)


def load_tensor(path) -> np.ndarray:
    return read_raw_tensor(path)


def save_weights(q: QuantizedWeightMatrix, values_path, scales_path) -> None:
    """INT weights go out as sign-extended int8, scales as a float32 sidecar."""
    save_tensor(q.values.astype(np.int8), values_path)
    save_tensor(q.scales.astype(np.float32), scales_path)


def load_weights(values_path, scales_path, weight_group_size: int, bit_width: int = 4) -> QuantizedWeightMatrix:
    values = load_tensor(values_path)
    scales = load_tensor(scales_path)
    if values.dtype != np.int8 or scales.dtype != np.float32:
        raise DtypeUnsupported(
            f"expected int8 weights and float32 scales, got {values.dtype} and {scales.dtype}"
        )
    return QuantizedWeightMatrix(values, scales, weight_group_size=weight_group_size, bit_width=bit_width)
