"""
Round-to-nearest INT weight quantization with per-group scales along K.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from anda_io.constants import WEIGHT_BITS, WEIGHT_GROUP_SIZE
from anda_io.errors import InvalidParams, NonFiniteInput, ShapeMismatch


@dataclass(frozen=True, eq=False)
class QuantizedWeightMatrix:
    values: np.ndarray
    scales: np.ndarray
    weight_group_size: int = WEIGHT_GROUP_SIZE
    bit_width: int = WEIGHT_BITS

    def __post_init__(self):
        values = np.array(self.values, dtype=np.int8, copy=True)
        scales = np.array(self.scales, dtype=np.float32, copy=True)
        if values.ndim != 2:
            raise ShapeMismatch(f"weights must be a K x N matrix, got {values.ndim} dims")
        groups = -(-values.shape[0] // self.weight_group_size)
        if scales.shape != (groups, values.shape[1]):
            raise ShapeMismatch(f"expected scales of shape {(groups, values.shape[1])}, got {scales.shape}")
        lo, hi = int_range(self.bit_width)
        if values.size and (values.min() < lo or values.max() > hi):
            raise InvalidParams(f"weight values outside [{lo}, {hi}]")
        values.setflags(write=False)
        scales.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "scales", scales)

    @property
    def K(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def row_scales(self) -> np.ndarray:
        """Scale of every (k, n) element, shape (K, N)."""
        return np.repeat(self.scales, self.weight_group_size, axis=0)[: self.K]

    def __eq__(self, other):
        if not isinstance(other, QuantizedWeightMatrix):
            return NotImplemented
        return (
            self.weight_group_size == other.weight_group_size
            and self.bit_width == other.bit_width
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.scales.view(np.uint32), other.scales.view(np.uint32))
        )


def int_range(bits: int):
    return -(1 << (bits - 1)), (1 << (bits - 1)) - 1


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize_rtn(w, group: int = WEIGHT_GROUP_SIZE, bits: int = WEIGHT_BITS) -> QuantizedWeightMatrix:
    w = np.asarray(w, dtype=np.float32)
    if w.ndim == 1:
        w = w[:, None]
    if w.ndim != 2 or w.shape[0] < 1:
        raise InvalidParams(f"weights must be a non-empty K x N matrix, got shape {w.shape}")
    if group < 1 or not 2 <= bits <= 8:
        raise InvalidParams(f"unsupported quantizer group={group} bits={bits}")
    if not np.all(np.isfinite(w)):
        raise NonFiniteInput("weights contain NaN/Infinity")
    lo, hi = int_range(bits)
    K, N = w.shape
    groups = -(-K // group)
    padded = np.zeros((groups * group, N), dtype=np.float32)
    padded[:K] = w
    blocks = padded.reshape(groups, group, N)

    scales = (np.abs(blocks).max(axis=1) / np.float32(hi)).astype(np.float32)
    scales[scales == 0] = np.float32(1.0)
    q = round_half_away(blocks.astype(np.float64) / scales.astype(np.float64)[:, None, :])
    q = np.clip(q, lo, hi).astype(np.int8).reshape(groups * group, N)[:K]
    return QuantizedWeightMatrix(q, scales, weight_group_size=group, bit_width=bits)


def dequantize(q: QuantizedWeightMatrix) -> np.ndarray:
    return (q.values.astype(np.float32) * q.row_scales()).astype(np.float32)
