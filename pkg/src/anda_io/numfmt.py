"""
FP16 field handling and the Anda grouped block-floating-point conversion.

A group keeps one shared exponent E (the largest unbiased exponent of its nonzero
elements), a sign bit per element and an M-bit magnitude per element in Q1.(M-1)
relative to 2^E. Mantissas are produced by right-shifting each significand by its
exponent distance to E and truncating, never rounding.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from anda_io.constants import (
    ALL_ZERO_SHARED_EXP,
    DEFAULT_GROUP_SIZE,
    FP16_EXP_BIAS,
    FP16_FRACTION_BITS,
    FP16_SUBNORMAL_EXP,
    MAX_MANTISSA_LEN,
    MIN_MANTISSA_LEN,
)
from anda_io.errors import InvalidParams, NonFiniteInput, ShapeMismatch
from anda_io.names import HalfClass


class AndaParams(BaseModel):
    group_size: int = Field(DEFAULT_GROUP_SIZE, ge=1)
    mantissa_len: int = Field(..., ge=MIN_MANTISSA_LEN, le=MAX_MANTISSA_LEN)
    model_config = ConfigDict(frozen=True)


def check_mantissa_len(m) -> int:
    if isinstance(m, bool) or int(m) != m or not MIN_MANTISSA_LEN <= m <= MAX_MANTISSA_LEN:
        raise InvalidParams(
            f"mantissa length must be in {MIN_MANTISSA_LEN}..{MAX_MANTISSA_LEN}, got {m}"
        )
    return int(m)


def decompose(bits: int) -> Tuple[int, int, int, str]:
    """
    Split a binary16 bit pattern into (sign, biased exponent, fraction, class).
    """
    bits = int(bits) & 0xFFFF
    sign = bits >> 15
    exp = (bits >> FP16_FRACTION_BITS) & 0x1F
    frac = bits & 0x3FF
    if exp == 0:
        cls = HalfClass.ZERO if frac == 0 else HalfClass.SUBNORMAL
    elif exp == 0x1F:
        cls = HalfClass.INFINITY if frac == 0 else HalfClass.NAN
    else:
        cls = HalfClass.NORMAL
    return sign, exp, frac, cls


def compose(sign: int, biased_exp: int, fraction: int) -> int:
    return ((sign & 1) << 15) | ((biased_exp & 0x1F) << FP16_FRACTION_BITS) | (fraction & 0x3FF)


def as_half_bits(values) -> np.ndarray:
    """
    Return the binary16 bit patterns of `values` as uint16.

    float16 arrays are reinterpreted, integer arrays are taken to already be bit
    patterns, anything else is cast to float16 with round-to-nearest-even.
    """
    arr = np.asarray(values)
    if arr.dtype == np.float16:
        return np.ascontiguousarray(arr).view(np.uint16)
    if arr.dtype == np.uint16:
        return arr
    if arr.dtype.kind in "iu":
        return (arr.astype(np.int64) & 0xFFFF).astype(np.uint16)
    with np.errstate(over="ignore"):
        return arr.astype(np.float16).view(np.uint16)


def _fields(bits: np.ndarray):
    b = bits.astype(np.int64)
    sign = b >> 15
    exp = (b >> FP16_FRACTION_BITS) & 0x1F
    frac = b & 0x3FF
    return sign, exp, frac


def significands(bits: np.ndarray):
    """
    Per-element (sign, unbiased exponent, 11-bit significand) with the FP16 rules
    for subnormals. Rejects NaN and infinity.
    """
    sign, exp, frac = _fields(bits)
    if np.any(exp == 0x1F):
        bad = int(np.count_nonzero(exp == 0x1F))
        raise NonFiniteInput(f"{bad} NaN/Infinity value(s) in input")
    normal = exp > 0
    sig = np.where(normal, frac | (1 << FP16_FRACTION_BITS), frac)
    unbiased = np.where(normal, exp - FP16_EXP_BIAS, FP16_SUBNORMAL_EXP)
    return sign, unbiased, sig


def shared_exponents(unbiased: np.ndarray, sig: np.ndarray) -> np.ndarray:
    masked = np.where(sig != 0, unbiased, ALL_ZERO_SHARED_EXP)
    if masked.shape[-1] == 0:
        return np.full(masked.shape[:-1], ALL_ZERO_SHARED_EXP, dtype=np.int64)
    return masked.max(axis=-1)


def encode_bits(bits: np.ndarray, m: int):
    """
    Vectorized group conversion over the last axis of `bits`.

    Returns (shared_exps, signs, mantissas) with shapes (...,), (..., gs), (..., gs).
    """
    m = check_mantissa_len(m)
    sign, unbiased, sig = significands(bits)
    shared = shared_exponents(unbiased, sig)
    # significand is Q1.10; at most a 39-bit right shift, well inside int64
    shift = FP16_FRACTION_BITS + shared[..., None] - unbiased
    mantissas = (sig << (m - 1)) >> shift
    return (
        shared.astype(np.int16),
        sign.astype(np.uint8),
        mantissas.astype(np.uint32),
    )


def decode_values(shared_exps, signs, mantissas, m: int) -> np.ndarray:
    scale = np.asarray(shared_exps, dtype=np.int64)[..., None] - (m - 1)
    magnitude = np.ldexp(np.asarray(mantissas, dtype=np.float64), scale)
    negative = (np.asarray(signs) != 0) & (np.asarray(mantissas) != 0)
    return np.where(negative, -magnitude, magnitude).astype(np.float32)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AndaGroup:
    shared_exp: int
    signs: np.ndarray
    mantissas: np.ndarray
    mantissa_len: int

    def __post_init__(self):
        check_mantissa_len(self.mantissa_len)
        object.__setattr__(self, "signs", _frozen(np.asarray(self.signs, dtype=np.uint8)))
        object.__setattr__(
            self, "mantissas", _frozen(np.asarray(self.mantissas, dtype=np.uint32))
        )
        if self.signs.shape != self.mantissas.shape or self.signs.ndim != 1:
            raise ShapeMismatch("signs and mantissas must be equal-length vectors")
        if np.any(self.mantissas >> self.mantissa_len):
            raise InvalidParams(f"mantissa wider than {self.mantissa_len} bits")

    def __len__(self):
        return len(self.mantissas)

    def __eq__(self, other):
        if not isinstance(other, AndaGroup):
            return NotImplemented
        return (
            self.shared_exp == other.shared_exp
            and self.mantissa_len == other.mantissa_len
            and np.array_equal(self.signs, other.signs)
            and np.array_equal(self.mantissas, other.mantissas)
        )

    def __hash__(self):
        return hash((self.shared_exp, self.mantissa_len, self.mantissas.tobytes()))


@dataclass(frozen=True, eq=False)
class AndaTensor:
    """
    Row-major tiling of a (rows, cols) matrix into groups along cols.
    The last group of each row is zero-padded.
    """

    rows: int
    cols: int
    params: AndaParams
    shared_exps: np.ndarray
    signs: np.ndarray
    mantissas: np.ndarray

    def __post_init__(self):
        ng = groups_per_row(self.cols, self.params.group_size)
        gs = self.params.group_size
        object.__setattr__(self, "shared_exps", _frozen(np.asarray(self.shared_exps, dtype=np.int16)))
        object.__setattr__(self, "signs", _frozen(np.asarray(self.signs, dtype=np.uint8)))
        object.__setattr__(self, "mantissas", _frozen(np.asarray(self.mantissas, dtype=np.uint32)))
        if self.shared_exps.shape != (self.rows, ng):
            raise ShapeMismatch(f"expected {(self.rows, ng)} shared exponents, got {self.shared_exps.shape}")
        if self.signs.shape != (self.rows, ng, gs) or self.mantissas.shape != (self.rows, ng, gs):
            raise ShapeMismatch(f"expected group payload of shape {(self.rows, ng, gs)}")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def mantissa_len(self) -> int:
        return self.params.mantissa_len

    @property
    def group_size(self) -> int:
        return self.params.group_size

    @property
    def groups_per_row(self) -> int:
        return self.shared_exps.shape[1]

    @property
    def group_count(self) -> int:
        return self.rows * self.groups_per_row

    def group(self, row: int, index: int) -> AndaGroup:
        return AndaGroup(
            shared_exp=int(self.shared_exps[row, index]),
            signs=self.signs[row, index],
            mantissas=self.mantissas[row, index],
            mantissa_len=self.mantissa_len,
        )

    def groups(self) -> Iterator[AndaGroup]:
        for row in range(self.rows):
            for index in range(self.groups_per_row):
                yield self.group(row, index)

    def signed_mantissas(self) -> np.ndarray:
        """(rows, groups * group_size) signed integer mantissas, padding included."""
        m = self.mantissas.astype(np.int64)
        signed = np.where(self.signs != 0, -m, m)
        return signed.reshape(self.rows, -1)

    def __eq__(self, other):
        if not isinstance(other, AndaTensor):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.params == other.params
            and np.array_equal(self.shared_exps, other.shared_exps)
            and np.array_equal(self.signs, other.signs)
            and np.array_equal(self.mantissas, other.mantissas)
        )


def groups_per_row(cols: int, group_size: int) -> int:
    return -(-cols // group_size)


def encode_group(values, m: int, group_size: Optional[int] = None) -> AndaGroup:
    bits = as_half_bits(values).reshape(-1)
    if group_size is not None:
        if len(bits) > group_size:
            raise InvalidParams(f"{len(bits)} values do not fit a group of {group_size}")
        bits = np.concatenate([bits, np.zeros(group_size - len(bits), dtype=np.uint16)])
    shared, signs, mantissas = encode_bits(bits, m)
    return AndaGroup(int(shared), signs, mantissas, m)


def decode_group(group: AndaGroup) -> np.ndarray:
    return decode_values(group.shared_exp, group.signs, group.mantissas, group.mantissa_len)


def _as_matrix_bits(matrix) -> np.ndarray:
    bits = as_half_bits(matrix)
    if bits.ndim == 1:
        bits = bits[None, :]
    if bits.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got {bits.ndim} dimensions")
    return bits


def encode_tensor(matrix, params: AndaParams) -> AndaTensor:
    bits = _as_matrix_bits(matrix)
    rows, cols = bits.shape
    gs = params.group_size
    ng = groups_per_row(cols, gs)
    padded = np.zeros((rows, ng * gs), dtype=np.uint16)
    padded[:, :cols] = bits
    shared, signs, mantissas = encode_bits(padded.reshape(rows, ng, gs), params.mantissa_len)
    return AndaTensor(rows, cols, params, shared, signs, mantissas)


def decode_tensor(tensor: AndaTensor) -> np.ndarray:
    values = decode_values(
        tensor.shared_exps, tensor.signs, tensor.mantissas, tensor.mantissa_len
    )
    return values.reshape(tensor.rows, -1)[:, : tensor.cols]


def truncation_bound(tensor: AndaTensor) -> np.ndarray:
    """Per-element bound 2^(E_g - (M-1)) of the containing group."""
    exps = tensor.shared_exps.astype(np.int64) - (tensor.mantissa_len - 1)
    per_group = np.ldexp(np.ones(exps.shape), exps)
    per_elem = np.repeat(per_group, tensor.group_size, axis=1)
    return per_elem[:, : tensor.cols]


def error_stats(original, decoded) -> Dict[str, float]:
    a = np.asarray(original, dtype=np.float64)
    b = np.asarray(decoded, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shape {a.shape} does not match {b.shape}")
    if a.size == 0:
        return {"max_abs": 0.0, "rmse": 0.0, "nrmse": 0.0}
    diff = a - b
    rmse = float(np.sqrt(np.mean(diff * diff)))
    rms = float(np.sqrt(np.mean(a * a)))
    return {
        "max_abs": float(np.max(np.abs(diff))),
        "rmse": rmse,
        "nrmse": rmse / rms if rms > 0 else 0.0,
    }
