"""
Cycle model of the bit-plane compressor's parallel-to-serial mantissa aligner.

Every element starts with its exponent distance to the group maximum. Each cycle an
element whose distance is zero shifts out the MSB of its 11-bit significand; the
others emit 0 and count their distance down. After M cycles the emitted planes are
exactly the truncated Anda mantissas.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from anda_io.constants import FP16_FRACTION_BITS, MAX_LANES_PER_WORD
from anda_io.errors import GroupTooWide
from anda_io.layout import bits_to_words, planes_to_mantissas
from anda_io.numfmt import (
    AndaGroup,
    AndaParams,
    AndaTensor,
    as_half_bits,
    check_mantissa_len,
    groups_per_row,
    shared_exponents,
    significands,
)

# zero elements never reach a zero distance
NEVER_EMITS = np.iinfo(np.int64).max
_REG_MASK = (1 << (FP16_FRACTION_BITS + 1)) - 1


class BpcConfig(BaseModel):
    lanes: int = Field(16, ge=1)
    lane_width: int = Field(MAX_LANES_PER_WORD, ge=1, le=MAX_LANES_PER_WORD)
    latency: int = Field(0, ge=0)
    model_config = ConfigDict(frozen=True)


@dataclass
class AlignerState:
    diffs: np.ndarray
    residuals: np.ndarray
    planes: List[np.ndarray] = field(default_factory=list)
    cycle: int = 0

    @classmethod
    def load(cls, bits: np.ndarray) -> Tuple["AlignerState", np.ndarray, np.ndarray]:
        """Preload from (..., gs) FP16 bits; also returns the shared exponents and signs."""
        sign, unbiased, sig = significands(bits)
        shared = shared_exponents(unbiased, sig)
        diffs = np.where(sig != 0, shared[..., None] - unbiased, NEVER_EMITS)
        return cls(diffs=diffs.astype(np.int64), residuals=sig.astype(np.int64)), shared, sign

    def step(self) -> np.ndarray:
        emit = self.diffs == 0
        bit = np.where(emit, (self.residuals >> FP16_FRACTION_BITS) & 1, 0)
        self.residuals = np.where(emit, (self.residuals << 1) & _REG_MASK, self.residuals)
        self.diffs = np.where(emit | (self.diffs == NEVER_EMITS), self.diffs, self.diffs - 1)
        self.planes.append(bit.astype(np.uint8))
        self.cycle += 1
        return bit


def compress_batch_serial(bits: np.ndarray, m: int):
    """
    Run all lane aligners in lock-step for M cycles.

    bits: (G, gs) FP16 patterns. Returns (shared_exps, signs, plane bits (G, M, gs)).
    """
    m = check_mantissa_len(m)
    state, shared, sign = AlignerState.load(np.asarray(bits, dtype=np.uint16))
    for _ in range(m):
        state.step()
    planes = np.stack(state.planes, axis=-2) if state.planes else np.zeros(bits.shape[:-1] + (0,) + bits.shape[-1:], np.uint8)
    return shared.astype(np.int16), sign.astype(np.uint8), planes


def compress_group_serial(values, m: int, config: Optional[BpcConfig] = None):
    """
    Returns (AndaGroup, per-cycle emitted lane bitmasks, cycles).
    """
    config = config or BpcConfig()
    bits = as_half_bits(values).reshape(1, -1)
    if bits.shape[1] > config.lane_width:
        raise GroupTooWide(f"group of {bits.shape[1]} exceeds lane width {config.lane_width}")
    shared, signs, planes = compress_batch_serial(bits, m)
    trace = tuple(int(word) for word in bits_to_words(planes[0]))
    group = AndaGroup(
        shared_exp=int(shared[0]),
        signs=signs[0],
        mantissas=planes_to_mantissas(planes[0], m),
        mantissa_len=m,
    )
    return group, trace, m + config.latency


def compress_tensor(a, params: AndaParams, cfg: Optional[BpcConfig] = None) -> Tuple[AndaTensor, int]:
    cfg = cfg or BpcConfig()
    gs, m = params.group_size, params.mantissa_len
    if gs > cfg.lane_width:
        raise GroupTooWide(f"group size {gs} exceeds lane width {cfg.lane_width}")
    bits = as_half_bits(a)
    if bits.ndim == 1:
        bits = bits[None, :]
    rows, cols = bits.shape
    ng = groups_per_row(cols, gs)
    padded = np.zeros((rows, ng * gs), dtype=np.uint16)
    padded[:, :cols] = bits
    shared, signs, planes = compress_batch_serial(padded.reshape(rows * ng, gs), m)
    tensor = AndaTensor(
        rows,
        cols,
        params,
        shared.reshape(rows, ng),
        signs.reshape(rows, ng, gs),
        planes_to_mantissas(planes, m).reshape(rows, ng, gs),
    )
    return tensor, compression_cycles(rows * ng, m, cfg)


def compression_cycles(group_count: int, m: int, cfg: BpcConfig) -> int:
    if group_count <= 0:
        return 0
    batches = -(-group_count // cfg.lanes)
    return batches * (m + cfg.latency)


def format_trace(trace) -> str:
    return "\n".join(f"cycle {c:2d} lanes {mask:#018x}" for c, mask in enumerate(trace))
