"""
Synthetic LLM-like calibration layers.

Draw order for a layer is fixed: the weights of qkv, o, u and d, then for each
module in the same order its per-channel log-normal scales and its activations.
Chained layers only draw A_qkv; the rest come from the preceding module's FP16
output.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

import anda_io
from anda_io.apu import gemm_fp16_reference
from anda_io.bops import ModelShape
from anda_io.constants import WEIGHT_GROUP_SIZE, WORKLOAD_META_FILE
from anda_io.errors import InvalidParams, ShapeMismatch
from anda_io.meta_types import ModuleFiles, WorkloadMeta
from anda_io.names import FamilyNames, ModuleNames
from anda_io.prng import Xoshiro256StarStar
from anda_io.util import check_version
from anda_io.weights import QuantizedWeightMatrix, quantize_rtn
from anda_io.workload.tensor_io import load_tensor, load_weights, save_tensor, save_weights

CHANNEL_SIGMA = 0.75


@dataclass(frozen=True, eq=False)
class ModuleWorkload:
    module_type: str
    activations: np.ndarray
    weights: QuantizedWeightMatrix

    @property
    def macs_per_token(self) -> int:
        return self.weights.K * self.weights.N


@dataclass
class CalibrationWorkload:
    family: str
    d_model: int
    d_ff: int
    tokens: int
    seed: int
    chained: bool = False
    modules: List[ModuleWorkload] = field(default_factory=list)

    def module(self, name: str) -> ModuleWorkload:
        for mod in self.modules:
            if mod.module_type == name:
                return mod
        raise KeyError(name)

    def shape(self) -> ModelShape:
        return ModelShape(family=self.family, d_model=self.d_model, d_ff=self.d_ff, n_layers=1)

    def macs_per_token(self) -> Dict[str, int]:
        return {mod.module_type: mod.macs_per_token for mod in self.modules}

    def check(self):
        dims = self.shape().gemm_dims()
        for mod in self.modules:
            k, n = dims[mod.module_type]
            if mod.weights.shape != (k, n) or mod.activations.shape != (self.tokens, k):
                raise ShapeMismatch(
                    f"module {mod.module_type}: activations {mod.activations.shape} / weights {mod.weights.shape} do not fit ({self.tokens}, {k}) x ({k}, {n})"
                )


def _activations(rng: Xoshiro256StarStar, tokens: int, k: int) -> np.ndarray:
    channel_scale = np.exp(CHANNEL_SIGMA * rng.normal(k))
    a = rng.normal(tokens * k).reshape(tokens, k) * channel_scale[None, :]
    return a.astype(np.float16)


def _weights(rng: Xoshiro256StarStar, k: int, n: int, group: int) -> QuantizedWeightMatrix:
    w = rng.normal(k * n).reshape(k, n) / np.sqrt(k)
    return quantize_rtn(w.astype(np.float32), group=group)


def _silu(x: np.ndarray) -> np.ndarray:
    return x / (1.0 + np.exp(-x))


def _to_half(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.asarray(x, dtype=np.float32).astype(np.float16)


def gen_synthetic_layer(
    seed: int,
    d_model: int,
    d_ff: int,
    tokens: int,
    family: str = FamilyNames.OPT,
    chained: bool = False,
    weight_group_size: int = WEIGHT_GROUP_SIZE,
) -> CalibrationWorkload:
    if min(d_model, d_ff, tokens) < 1:
        raise InvalidParams("d_model, d_ff and tokens must all be >= 1")
    if family not in FamilyNames.ALL:
        raise InvalidParams(f"unknown family '{family}'")
    rng = Xoshiro256StarStar(seed)
    dims = ModelShape(family=family, d_model=d_model, d_ff=d_ff).gemm_dims()
    weights = {name: _weights(rng, *dims[name], weight_group_size) for name in ModuleNames.ALL}

    acts: Dict[str, np.ndarray] = {}
    if not chained:
        for name in ModuleNames.ALL:
            acts[name] = _activations(rng, tokens, dims[name][0])
    else:
        acts[ModuleNames.QKV] = _activations(rng, tokens, d_model)
        qkv_out = gemm_fp16_reference(acts[ModuleNames.QKV], weights[ModuleNames.QKV])
        # attention mixing is not modeled; the value slice feeds the output projection
        acts[ModuleNames.O] = _to_half(qkv_out[:, 2 * d_model :])
        o_out = gemm_fp16_reference(acts[ModuleNames.O], weights[ModuleNames.O])
        acts[ModuleNames.U] = _to_half(o_out)
        u_out = gemm_fp16_reference(acts[ModuleNames.U], weights[ModuleNames.U])
        if family == FamilyNames.LLAMA:
            hidden = _silu(u_out[:, :d_ff].astype(np.float64)) * u_out[:, d_ff:]
        else:
            hidden = np.maximum(u_out, 0.0)
        acts[ModuleNames.D] = _to_half(hidden)

    workload = CalibrationWorkload(
        family=family,
        d_model=d_model,
        d_ff=d_ff,
        tokens=tokens,
        seed=seed,
        chained=chained,
        modules=[ModuleWorkload(name, acts[name], weights[name]) for name in ModuleNames.ALL],
    )
    workload.check()
    return workload


def save_workload(workload: CalibrationWorkload, directory) -> str:
    os.makedirs(directory, exist_ok=True)
    files = []
    for mod in workload.modules:
        entry = ModuleFiles(
            module_type=mod.module_type,
            activations=f"{mod.module_type}.act.andt",
            weights=f"{mod.module_type}.w.andt",
            scales=f"{mod.module_type}.scale.andt",
            weight_group_size=mod.weights.weight_group_size,
            bit_width=mod.weights.bit_width,
        )
        save_tensor(mod.activations, os.path.join(directory, entry.activations))
        save_weights(
            mod.weights,
            os.path.join(directory, entry.weights),
            os.path.join(directory, entry.scales),
        )
        files.append(entry)
    meta = WorkloadMeta(
        version=anda_io.__version__,
        family=workload.family,
        d_model=workload.d_model,
        d_ff=workload.d_ff,
        tokens=workload.tokens,
        seed=workload.seed,
        chained=workload.chained,
        modules=files,
    )
    meta_path = os.path.join(directory, WORKLOAD_META_FILE)
    with open(meta_path, "w") as f:
        f.write(meta.model_dump_json(indent=2))
    return meta_path


def load_workload(directory) -> CalibrationWorkload:
    meta_path = os.path.join(directory, WORKLOAD_META_FILE)
    if not os.path.isfile(meta_path):
        raise InvalidParams(f"{WORKLOAD_META_FILE} not found in {directory}")
    with open(meta_path) as f:
        meta = WorkloadMeta(**json.load(f))
    check_version(meta.version, meta_path)
    modules = []
    for entry in meta.modules:
        activations = load_tensor(os.path.join(directory, entry.activations))
        weights = load_weights(
            os.path.join(directory, entry.weights),
            os.path.join(directory, entry.scales),
            entry.weight_group_size,
            entry.bit_width,
        )
        modules.append(ModuleWorkload(entry.module_type, activations.astype(np.float16), weights))
    workload = CalibrationWorkload(
        family=meta.family,
        d_model=meta.d_model,
        d_ff=meta.d_ff,
        tokens=meta.tokens,
        seed=meta.seed,
        chained=meta.chained,
        modules=modules,
    )
    workload.check()
    return workload
