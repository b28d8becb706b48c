"""
Bit-operation cost of a precision combination over a transformer layer shape.

One M-bit x W-bit multiply costs M * W BOPs, so an FP16 x INT4 MAC counts 64.
"""
from __future__ import annotations

import json
from dataclasses import astuple, dataclass
from typing import Dict, Iterator, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from anda_io.constants import FP16_EQUIV_MANTISSA, MAX_MANTISSA_LEN, MIN_MANTISSA_LEN, WEIGHT_BITS
from anda_io.errors import InvalidParams
from anda_io.names import FamilyNames, ModuleNames


@dataclass(frozen=True, order=True)
class PrecisionCombination:
    qkv: int
    o: int
    u: int
    d: int

    def __post_init__(self):
        for name, m in zip(ModuleNames.ALL, astuple(self)):
            if isinstance(m, bool) or not isinstance(m, int) or not MIN_MANTISSA_LEN <= m <= MAX_MANTISSA_LEN:
                raise InvalidParams(f"M_{name}={m!r} is outside {MIN_MANTISSA_LEN}..{MAX_MANTISSA_LEN}")

    @classmethod
    def of(cls, values: Sequence[int]) -> "PrecisionCombination":
        values = [int(v) for v in values]
        if len(values) != len(ModuleNames.ALL):
            raise InvalidParams(f"a combination has 4 components, got {len(values)}")
        return cls(*values)

    @classmethod
    def parse(cls, text: str) -> "PrecisionCombination":
        cleaned = text.strip().strip("[]")
        try:
            return cls.of([int(p) for p in cleaned.split(",")])
        except ValueError as e:
            raise InvalidParams(f"cannot parse combination '{text}'", cause=e)

    @classmethod
    def uniform(cls, m: int) -> "PrecisionCombination":
        return cls(m, m, m, m)

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return astuple(self)

    def as_dict(self) -> Dict[str, int]:
        return dict(zip(ModuleNames.ALL, astuple(self)))

    def replace(self, module: str, m: int) -> "PrecisionCombination":
        values = self.as_dict()
        values[module] = m
        return PrecisionCombination(**values)

    def __getitem__(self, module: str) -> int:
        return self.as_dict()[module]

    def __iter__(self) -> Iterator[int]:
        return iter(astuple(self))

    def __str__(self) -> str:
        return "[" + ",".join(str(v) for v in self) + "]"


MODEL_PRESETS: Dict[str, Dict[str, object]] = {
    "opt-125m": {"family": FamilyNames.OPT, "d_model": 768, "d_ff": 3072, "n_layers": 12},
    "opt-1.3b": {"family": FamilyNames.OPT, "d_model": 2048, "d_ff": 8192, "n_layers": 24},
    "opt-2.7b": {"family": FamilyNames.OPT, "d_model": 2560, "d_ff": 10240, "n_layers": 32},
    "opt-6.7b": {"family": FamilyNames.OPT, "d_model": 4096, "d_ff": 16384, "n_layers": 32},
    "opt-13b": {"family": FamilyNames.OPT, "d_model": 5120, "d_ff": 20480, "n_layers": 40},
    "llama-7b": {"family": FamilyNames.LLAMA, "d_model": 4096, "d_ff": 11008, "n_layers": 32},
    "llama-13b": {"family": FamilyNames.LLAMA, "d_model": 5120, "d_ff": 13824, "n_layers": 40},
    "llama2-7b": {"family": FamilyNames.LLAMA, "d_model": 4096, "d_ff": 11008, "n_layers": 32},
    "llama2-13b": {"family": FamilyNames.LLAMA, "d_model": 5120, "d_ff": 13824, "n_layers": 40},
}


class ModelShape(BaseModel):
    family: Literal["opt", "llama"] = FamilyNames.OPT
    d_model: int = Field(..., ge=1)
    d_ff: int = Field(..., ge=1)
    n_layers: int = Field(1, ge=1)
    weight_bits: int = Field(WEIGHT_BITS, ge=1, le=8)
    # explicit (K, N) per module; replaces the family-derived dims when set
    gemms: Optional[Dict[str, Tuple[int, int]]] = None
    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_gemms(self):
        if self.gemms is not None:
            if set(self.gemms) != set(ModuleNames.ALL):
                raise ValueError(f"gemms must name exactly {list(ModuleNames.ALL)}, got {sorted(self.gemms)}")
            if any(k < 1 or n < 1 for k, n in self.gemms.values()):
                raise ValueError(f"gemm dims must be positive, got {self.gemms}")
        return self

    @classmethod
    def preset(cls, name: str, **overrides) -> "ModelShape":
        if name not in MODEL_PRESETS:
            raise InvalidParams(f"unknown model preset '{name}', choose from {sorted(MODEL_PRESETS)}")
        return cls(**{**MODEL_PRESETS[name], **overrides})

    @classmethod
    def opt_ratio(cls, d_model: int, n_layers: int = 1) -> "ModelShape":
        return cls(family=FamilyNames.OPT, d_model=d_model, d_ff=4 * d_model, n_layers=n_layers)

    @classmethod
    def from_gemms(cls, gemms: Dict[str, Tuple[int, int]], n_layers: int = 1, **kwargs) -> "ModelShape":
        """
        A shape with arbitrary per-module (K, N); the MACs per token of a module
        are K * N. d_model and d_ff are taken from the qkv and d input widths.
        """
        gemms = {name: (int(k), int(n)) for name, (k, n) in gemms.items()}
        return cls(
            d_model=gemms.get(ModuleNames.QKV, (1, 1))[0],
            d_ff=gemms.get(ModuleNames.D, (1, 1))[0],
            n_layers=n_layers,
            gemms=gemms,
            **kwargs,
        )

    @classmethod
    def from_json(cls, path) -> "ModelShape":
        with open(path) as f:
            return cls(**json.load(f))

    def gemm_dims(self) -> Dict[str, Tuple[int, int]]:
        """(K, N) of each FP-INT GeMM; gate and up projections share A_u on llama."""
        if self.gemms is not None:
            return {name: tuple(self.gemms[name]) for name in ModuleNames.ALL}
        d, f = self.d_model, self.d_ff
        up = 2 * f if self.family == FamilyNames.LLAMA else f
        return {
            ModuleNames.QKV: (d, 3 * d),
            ModuleNames.O: (d, d),
            ModuleNames.U: (d, up),
            ModuleNames.D: (f, d),
        }

    def macs_per_token(self) -> Dict[str, int]:
        return {name: k * n for name, (k, n) in self.gemm_dims().items()}


def total_macs(shape: ModelShape, tokens: int) -> int:
    return tokens * shape.n_layers * sum(shape.macs_per_token().values())


def eval_bops(c: PrecisionCombination, shape: ModelShape) -> int:
    macs = shape.macs_per_token()
    per_layer = sum(macs[name] * c[name] * shape.weight_bits for name in ModuleNames.ALL)
    return per_layer * shape.n_layers


def fp16_bops(shape: ModelShape) -> int:
    return eval_bops(PrecisionCombination.uniform(FP16_EQUIV_MANTISSA), shape)


def bops_reduction(c: PrecisionCombination, shape: ModelShape) -> float:
    return fp16_bops(shape) / eval_bops(c, shape)
