"""
Functional model of the bit-serial Anda processing unit and the GeMM built on it.

Inside a group the APU sums every element of one bit-plane first (adder tree over
sign-applied weights), then shift-accumulates the plane partials MSB first. Group
results are shifted by the shared exponent, multiplied by the weight-group scale
and accumulated across groups in binary32, ascending along K.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from anda_io.constants import DEFAULT_GROUP_SIZE, MAX_LANES_PER_WORD
from anda_io.errors import AccumulatorOverflow, LengthMismatch, NonFiniteInput, ShapeMismatch
from anda_io.layout import PackedGroup
from anda_io.numfmt import AndaGroup, AndaParams, AndaTensor, encode_tensor
from anda_io.weights import QuantizedWeightMatrix

FLOAT32_MAX = float(np.finfo(np.float32).max)


@dataclass(frozen=True)
class DotTrace:
    partials: Tuple[int, ...]
    acc_trace: Tuple[int, ...]
    result: int

    @property
    def cycles(self) -> int:
        return len(self.partials)


class GemmConfig(BaseModel):
    output_dtype: Literal["float32", "float16"] = "float32"
    # cross-group accumulation order is always ascending K
    accumulation_order: Literal["ascending-k"] = "ascending-k"
    model_config = ConfigDict(frozen=True)


def _signed_weights(signs, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.int64)
    return np.where(np.asarray(signs) != 0, -w, w)


def group_dot_reference(group: AndaGroup, w: Sequence[int]) -> int:
    w = np.asarray(w, dtype=np.int64).reshape(-1)
    if len(w) != len(group):
        raise LengthMismatch(f"{len(w)} weights for a group of {len(group)}")
    return int(np.dot(_signed_weights(group.signs, w), group.mantissas.astype(np.int64)))


def group_dot_bitserial(
    packed: PackedGroup, signs: Optional[Sequence[int]], w: Sequence[int]
) -> Tuple[int, DotTrace]:
    w = np.asarray(w, dtype=np.int64).reshape(-1)
    n = len(w)
    if n > MAX_LANES_PER_WORD:
        raise LengthMismatch(f"{n} weights exceed the {MAX_LANES_PER_WORD}-lane adder tree")
    lanes = np.arange(n, dtype=np.uint64)
    if signs is None:
        signs = (np.uint64(packed.sign_plane) >> lanes) & np.uint64(1)
    signs = np.asarray(signs).reshape(-1)
    if len(signs) != n:
        raise LengthMismatch(f"{len(signs)} signs for {n} weights")
    sw = _signed_weights(signs, w)
    high_lanes = ~np.uint64(0) << np.uint64(n) if n < 64 else np.uint64(0)

    partials = []
    acc_trace = []
    acc = 0
    for word in packed.bit_planes:
        if np.uint64(word) & high_lanes:
            raise LengthMismatch(f"bit-plane has lanes set beyond the {n} weights")
        bits = ((np.uint64(word) >> lanes) & np.uint64(1)).astype(bool)
        partial = int(sw[bits].sum())
        acc = acc * 2 + partial
        partials.append(partial)
        acc_trace.append(acc)
    return acc, DotTrace(tuple(partials), tuple(acc_trace), acc)


def batch_group_dot_bitserial(
    plane_words: np.ndarray,
    sign_words: np.ndarray,
    weights: np.ndarray,
    chunk_size: int = 1 << 15,
) -> np.ndarray:
    """
    Bit-serial dot for many groups at once.

    plane_words: (G, M) uint64, MSB plane first; sign_words: (G,) uint64;
    weights: (G, L) integers with L <= 64. Returns (G,) int64 results.
    """
    plane_words = np.asarray(plane_words, dtype=np.uint64)
    sign_words = np.asarray(sign_words, dtype=np.uint64)
    weights = np.asarray(weights, dtype=np.int64)
    if weights.ndim != 2 or weights.shape[0] != plane_words.shape[0] or sign_words.shape != plane_words.shape[:1]:
        raise LengthMismatch("planes, signs and weights disagree on the group count")
    if weights.shape[1] > MAX_LANES_PER_WORD:
        raise LengthMismatch(f"{weights.shape[1]} lanes exceed the adder tree")
    lanes = np.arange(weights.shape[1], dtype=np.uint64)
    out = np.empty(plane_words.shape[0], dtype=np.int64)
    for start in range(0, plane_words.shape[0], chunk_size):
        stop = start + chunk_size
        sbits = (sign_words[start:stop, None] >> lanes) & np.uint64(1)
        sw = np.where(sbits != 0, -weights[start:stop], weights[start:stop])
        acc = np.zeros(sw.shape[0], dtype=np.int64)
        for k in range(plane_words.shape[1]):
            bits = ((plane_words[start:stop, k, None] >> lanes) & np.uint64(1)).astype(np.int64)
            acc = acc * 2 + (bits * sw).sum(axis=1)
        out[start:stop] = acc
    return out


def scale_group_result(acc: int, shared_exp: int, m: int, w_scale: float) -> np.float32:
    if not math.isfinite(float(w_scale)):
        raise NonFiniteInput(f"weight scale {w_scale} is not finite")
    value = math.ldexp(float(acc), int(shared_exp) - (int(m) - 1)) * float(np.float32(w_scale))
    if abs(value) > FLOAT32_MAX:
        raise AccumulatorOverflow(f"group result {value} exceeds the binary32 range")
    return np.float32(value)


def k_segments(k: int, act_group: int, weight_group: int):
    """
    Split [0, k) at every activation-group and weight-group boundary.
    Yields (start, stop, activation group index, weight group index), ascending.
    """
    cuts = sorted(set(range(0, k, act_group)) | set(range(0, k, weight_group)) | {k})
    for start, stop in zip(cuts[:-1], cuts[1:]):
        yield start, stop, start // act_group, start // weight_group


def _accumulate_segments(
    signed: np.ndarray,
    w: QuantizedWeightMatrix,
    act_group: int,
    shifts: Optional[np.ndarray] = None,
    check_overflow: bool = True,
) -> np.ndarray:
    """
    Sum K in ascending segments cut at activation-group and weight-group edges.
    Each segment is an exact float64 partial, scaled once and rounded once to
    binary32 before it joins the running binary32 sum.
    """
    values = w.values.astype(np.float64)
    scales = w.scales.astype(np.float64)
    out = np.zeros((signed.shape[0], w.N), dtype=np.float32)
    for start, stop, ag, wg in k_segments(signed.shape[1], act_group, w.weight_group_size):
        # Anda integer partials stay below 2**53, so their float64 sum is exact
        partial = signed[:, start:stop] @ values[start:stop]
        if shifts is not None:
            partial = partial * shifts[:, ag][:, None]
        scaled = partial * scales[wg][None, :]
        if check_overflow and np.any(np.abs(scaled) > FLOAT32_MAX):
            raise AccumulatorOverflow(f"group result in K[{start}:{stop}] exceeds the binary32 range")
        with np.errstate(over="ignore"):
            out += scaled.astype(np.float32)
    return out


def gemm_anda(a: AndaTensor, w: QuantizedWeightMatrix, cfg: Optional[GemmConfig] = None) -> np.ndarray:
    cfg = cfg or GemmConfig()
    if a.cols != w.K:
        raise ShapeMismatch(f"activation K={a.cols} does not match weight K={w.K}")
    signed = a.signed_mantissas()[:, : a.cols].astype(np.float64)
    shifts = np.ldexp(1.0, a.shared_exps.astype(np.int64) - (a.mantissa_len - 1))
    out = _accumulate_segments(signed, w, a.group_size, shifts)
    if cfg.output_dtype == "float16":
        with np.errstate(over="ignore"):
            return out.astype(np.float16)
    return out


def gemm_fp16_reference(
    a, w: Union[QuantizedWeightMatrix, np.ndarray], group_size: int = DEFAULT_GROUP_SIZE
) -> np.ndarray:
    """
    FP16-activation GeMM in binary32.

    With a QuantizedWeightMatrix the K reduction is cut and rounded exactly like
    gemm_anda at `group_size`, so an activation tensor that encodes losslessly
    gives bit-identical outputs. A dense dequantized matrix is accumulated one K
    step at a time.
    """
    a = np.asarray(a)
    if a.dtype != np.float16:
        a = a.astype(np.float16)
    if isinstance(w, QuantizedWeightMatrix):
        if a.ndim != 2 or a.shape[1] != w.K:
            raise ShapeMismatch(f"cannot multiply {a.shape} by {w.shape}")
        return _accumulate_segments(a.astype(np.float64), w, group_size, check_overflow=False)
    a32 = a.astype(np.float32)
    w32 = np.asarray(w, dtype=np.float32)
    if a32.ndim != 2 or w32.ndim != 2 or a32.shape[1] != w32.shape[0]:
        raise ShapeMismatch(f"cannot multiply {a32.shape} by {w32.shape}")
    out = np.zeros((a32.shape[0], w32.shape[1]), dtype=np.float32)
    for k in range(a32.shape[1]):
        out += a32[:, k, None] * w32[None, k, :]
    return out


def gemm_bfp_uniform(a, m: int, w: QuantizedWeightMatrix, group_size: int = 64, cfg: Optional[GemmConfig] = None) -> np.ndarray:
    return gemm_anda(encode_tensor(a, AndaParams(group_size=group_size, mantissa_len=m)), w, cfg)
