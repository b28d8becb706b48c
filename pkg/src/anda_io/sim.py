"""
Roofline cycle and energy model of the Anda system and its baselines.

A GeMM's runtime is max(compute, DRAM transfer, overlapped BPC) plus pipeline
fill. Activations stream once per mxu_rows strip and are re-read from SRAM for
every column strip; weights are fetched once when they fit the weight buffer and
once per row strip otherwise.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields
from typing import Dict, Iterable, List, Optional, Sequence, Type, TypeVar, Union

import pandas as pd
from pydantic import BaseModel, ValidationError
from tqdm import tqdm

from anda_io.bops import ModelShape, PrecisionCombination, bops_reduction
from anda_io.constants import DEFAULT_TOKENS
from anda_io.errors import InvalidParams
from anda_io.meta_types import ArchConfig, EnergyParams
from anda_io.names import ModuleNames, PlatformNames, Provenance
from anda_io.oracles.oracle_cls import CachedOracle, Oracle
from anda_io.platforms import Platform, load_platforms
from anda_io.platforms.figna import FIGNAPlatform
from anda_io.search import SearchConfig, search

CONFIG_DIR_ENV = "ANDA_CONFIG_DIR"
PACKAGED_CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "configs")
OPERANDS = ("activations", "weights", "outputs")

ConfigModel = TypeVar("ConfigModel", bound=BaseModel)


def resolve_config_path(name: str, path: Optional[str] = None) -> str:
    if path:
        return path
    env_dir = os.environ.get(CONFIG_DIR_ENV)
    if env_dir and os.path.isfile(os.path.join(env_dir, name)):
        return os.path.join(env_dir, name)
    return os.path.join(PACKAGED_CONFIG_DIR, name)


def _load_config(model: Type[ConfigModel], name: str, path: Optional[str]) -> ConfigModel:
    """
    Entries are plain values or {"value", "provenance", "note"} objects; the
    provenance tags are kept on the model.
    """
    resolved = resolve_config_path(name, path)
    try:
        with open(resolved) as f:
            raw = json.load(f)
    except FileNotFoundError as e:
        raise InvalidParams(f"config file {resolved} not found", cause=e)
    except json.JSONDecodeError as e:
        raise InvalidParams(f"config file {resolved} is not valid JSON", cause=e)
    if not isinstance(raw, dict):
        raise InvalidParams(f"config file {resolved} must hold a JSON object")
    values, provenance = {}, {}
    for key, entry in raw.items():
        if key.startswith("_"):
            continue
        if isinstance(entry, dict) and "value" in entry:
            values[key] = entry["value"]
            tag = entry.get("provenance")
            if tag is not None:
                provenance[key] = tag
                if tag not in Provenance.ALL:
                    tqdm.write(f"Warning: {resolved}: unknown provenance tag '{tag}' on {key}")
        else:
            values[key] = entry
    try:
        return model(**values, provenance=provenance)
    except ValidationError as e:
        raise InvalidParams(f"invalid config in {resolved}", cause=e)


def load_arch(path: Optional[str] = None) -> ArchConfig:
    return _load_config(ArchConfig, "arch.json", path)


def load_energy(path: Optional[str] = None) -> EnergyParams:
    return _load_config(EnergyParams, "energy.json", path)


def _zero_traffic() -> Dict[str, int]:
    return {op: 0 for op in OPERANDS}


@dataclass
class SimReport:
    platform: str
    macs: int = 0
    compute_cycles: float = 0
    memory_cycles: float = 0
    bpc_cycles: float = 0
    fill_cycles: float = 0
    vector_cycles: float = 0
    total_cycles: float = 0
    dram_bits: Dict[str, int] = field(default_factory=_zero_traffic)
    sram_bits: Dict[str, int] = field(default_factory=_zero_traffic)
    energy_compute: float = 0.0
    energy_sram: float = 0.0
    energy_dram: float = 0.0
    energy_vector: float = 0.0

    @classmethod
    def empty(cls, platform: str) -> "SimReport":
        return cls(platform=platform)

    @property
    def energy_total(self) -> float:
        return self.energy_compute + self.energy_sram + self.energy_dram + self.energy_vector

    @property
    def dram_total(self) -> int:
        return sum(self.dram_bits.values())

    @property
    def sram_total(self) -> int:
        return sum(self.sram_bits.values())

    def __add__(self, other: "SimReport") -> "SimReport":
        if not isinstance(other, SimReport):
            return NotImplemented
        summed = {}
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if f.name == "platform":
                summed[f.name] = a
            elif isinstance(a, dict):
                summed[f.name] = {k: a.get(k, 0) + b.get(k, 0) for k in OPERANDS}
            else:
                summed[f.name] = a + b
        return SimReport(**summed)

    def __mul__(self, times: int) -> "SimReport":
        scaled = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "platform":
                scaled[f.name] = v
            elif isinstance(v, dict):
                scaled[f.name] = {k: x * times for k, x in v.items()}
            else:
                scaled[f.name] = v * times
        return SimReport(**scaled)

    __rmul__ = __mul__

    def speedup_over(self, baseline: "SimReport") -> float:
        return _ratio(baseline.total_cycles, self.total_cycles)

    def compute_speedup_over(self, baseline: "SimReport") -> float:
        return _ratio(baseline.compute_cycles, self.compute_cycles)

    def energy_efficiency_over(self, baseline: "SimReport") -> float:
        return _ratio(baseline.energy_total, self.energy_total)

    def to_row(self) -> Dict[str, object]:
        row = {
            "platform": self.platform,
            "macs": self.macs,
            "compute_cycles": self.compute_cycles,
            "memory_cycles": self.memory_cycles,
            "bpc_cycles": self.bpc_cycles,
            "fill_cycles": self.fill_cycles,
            "vector_cycles": self.vector_cycles,
            "total_cycles": self.total_cycles,
        }
        for op in OPERANDS:
            row[f"dram_bits_{op}"] = self.dram_bits.get(op, 0)
        for op in OPERANDS:
            row[f"sram_bits_{op}"] = self.sram_bits.get(op, 0)
        row.update(
            energy_compute_pj=self.energy_compute,
            energy_sram_pj=self.energy_sram,
            energy_dram_pj=self.energy_dram,
            energy_vector_pj=self.energy_vector,
            energy_total_pj=self.energy_total,
        )
        return row


def _ratio(num: float, den: float) -> float:
    if den == 0:
        return 1.0 if num == 0 else math.inf
    return num / den


def make_platform(
    platform: Union[Platform, str],
    arch: Optional[ArchConfig] = None,
    energy: Optional[EnergyParams] = None,
) -> Platform:
    if isinstance(platform, Platform):
        return platform
    registry = load_platforms()
    if platform not in registry:
        raise InvalidParams(f"unknown platform '{platform}', choose from {sorted(registry)}")
    return registry[platform](arch or ArchConfig(), energy or EnergyParams())


def simulate_gemm(
    T: int,
    N: int,
    K: int,
    platform: Union[Platform, str],
    arch: Optional[ArchConfig] = None,
    energy: Optional[EnergyParams] = None,
    m: int = 16,
    m_out: Optional[int] = None,
) -> SimReport:
    """
    m_out is the mantissa length the output is stored at (Anda only); None keeps
    the output in FP16.
    """
    if min(T, N, K) < 1:
        raise InvalidParams(f"GeMM dims must be >= 1, got T={T} N={N} K={K}")
    p = make_platform(platform, arch, energy)
    arch, energy = p.arch, p.energy
    p.check_strip(K, m)

    act = p.activation_bits(T, K, m)
    w = p.weight_bits(K, N)
    out = p.output_bits(T, N, m_out)
    row_strips = p.strip_count(T)
    dram = {
        "activations": act,
        "weights": w if w <= arch.weight_buffer_bits else w * row_strips,
        "outputs": out,
    }
    sram = {
        "activations": act * p.column_strips(N),
        "weights": w * row_strips,
        "outputs": out,
    }

    compute = p.compute_cycles(T, N, K, m)
    memory = sum(dram.values()) / 8 / arch.dram_bytes_per_cycle
    bpc = p.output_compression_cycles(T, N, m_out)
    fill = arch.pipeline_fill_cycles
    if arch.bpc_overlapped:
        total = max(compute, memory, bpc) + fill
    else:
        total = max(compute, memory) + bpc + fill

    return SimReport(
        platform=p.label,
        macs=T * N * K,
        compute_cycles=compute,
        memory_cycles=memory,
        bpc_cycles=bpc,
        fill_cycles=fill,
        total_cycles=total,
        dram_bits=dram,
        sram_bits=sram,
        energy_compute=p.compute_energy(T, N, K, m, compute) + bpc * energy.bpc_pj_per_cycle,
        energy_sram=sum(sram.values()) * energy.sram_pj_per_bit,
        energy_dram=sum(dram.values()) * energy.dram_pj_per_bit,
    )


def output_mantissas(c: PrecisionCombination) -> Dict[str, Optional[int]]:
    """
    Each module's output is stored at the mantissa length of its consumer. The
    qkv output feeds attention, which reads FP16.
    """
    return {
        ModuleNames.QKV: None,
        ModuleNames.O: c[ModuleNames.U],
        ModuleNames.U: c[ModuleNames.D],
        ModuleNames.D: c[ModuleNames.QKV],
    }


def simulate_modules(
    shape: ModelShape,
    c: PrecisionCombination,
    tokens: int,
    platform: Union[Platform, str],
    arch: Optional[ArchConfig] = None,
    energy: Optional[EnergyParams] = None,
) -> Dict[str, SimReport]:
    """
    One layer, one report per module.
    """
    p = make_platform(platform, arch, energy)
    if tokens <= 0:
        return {name: SimReport.empty(p.label) for name in ModuleNames.ALL}
    dims = shape.gemm_dims()
    outs = output_mantissas(c) if p.STORES_ANDA else {name: None for name in ModuleNames.ALL}
    return {
        name: simulate_gemm(tokens, dims[name][1], dims[name][0], p, m=c[name], m_out=outs[name])
        for name in ModuleNames.ALL
    }


def simulate_model(
    shape: ModelShape,
    c: PrecisionCombination,
    tokens: int = DEFAULT_TOKENS,
    platform: Union[Platform, str] = PlatformNames.ANDA,
    arch: Optional[ArchConfig] = None,
    energy: Optional[EnergyParams] = None,
) -> SimReport:
    p = make_platform(platform, arch, energy)
    if tokens <= 0:
        return SimReport.empty(p.label)
    layer = SimReport.empty(p.label)
    for report in simulate_modules(shape, c, tokens, p).values():
        layer = layer + report
    layer.vector_cycles = p.arch.vector_cycles_per_token * tokens
    layer.total_cycles += layer.vector_cycles
    layer.energy_vector = p.energy.vector_pj_per_token * tokens
    return layer * shape.n_layers


def comparison_platforms(arch: ArchConfig, energy: EnergyParams) -> List[Platform]:
    registry = load_platforms()
    return [
        registry[PlatformNames.FPFP](arch, energy),
        registry[PlatformNames.FPINT](arch, energy),
        registry[PlatformNames.IFPU](arch, energy),
        FIGNAPlatform(arch, energy),
        FIGNAPlatform(arch, energy, mantissa_len=11),
        FIGNAPlatform(arch, energy, mantissa_len=8),
        registry[PlatformNames.ANDA](arch, energy),
    ]


def compare(
    shape: ModelShape,
    c: PrecisionCombination,
    tokens: int = DEFAULT_TOKENS,
    arch: Optional[ArchConfig] = None,
    energy: Optional[EnergyParams] = None,
) -> pd.DataFrame:
    arch = arch or ArchConfig()
    energy = energy or EnergyParams()
    reports = [simulate_model(shape, c, tokens, p) for p in comparison_platforms(arch, energy)]
    baseline = reports[0]
    rows = []
    for report in reports:
        row = report.to_row()
        row["speedup"] = report.speedup_over(baseline)
        row["compute_speedup"] = report.compute_speedup_over(baseline)
        row["energy_efficiency"] = report.energy_efficiency_over(baseline)
        rows.append(row)
    return pd.DataFrame(rows)


def tradeoff_sweep(
    shape: ModelShape,
    oracle: Oracle,
    deltas: Sequence[float],
    tokens: int = DEFAULT_TOKENS,
    arch: Optional[ArchConfig] = None,
    energy: Optional[EnergyParams] = None,
    cfg: Optional[SearchConfig] = None,
    progress: bool = False,
) -> pd.DataFrame:
    if not deltas:
        raise InvalidParams("tradeoff sweep needs at least one delta")
    arch = arch or ArchConfig()
    energy = energy or EnergyParams()
    cfg = cfg or SearchConfig()
    cached = CachedOracle.wrap(oracle)
    baseline = simulate_model(shape, PrecisionCombination.uniform(16), tokens, PlatformNames.FPFP, arch, energy)
    rows = []
    for delta in tqdm(list(deltas), desc="Trade-off", disable=not progress or None, leave=False):
        best, _ = search(shape, cached, cfg.model_copy(update={"delta": delta}))
        row = {"delta": delta, "combination": str(best) if best else None, "feasible": best is not None}
        if best is None:
            tqdm.write(f"No feasible combination at delta={delta}")
            row.update(speedup=math.nan, compute_speedup=math.nan, energy_efficiency=math.nan, bops_reduction=math.nan)
        else:
            report = simulate_model(shape, best, tokens, PlatformNames.ANDA, arch, energy)
            row.update(
                speedup=report.speedup_over(baseline),
                compute_speedup=report.compute_speedup_over(baseline),
                energy_efficiency=report.energy_efficiency_over(baseline),
                bops_reduction=bops_reduction(best, shape),
            )
        rows.append(row)
    return pd.DataFrame(
        rows,
        columns=["delta", "combination", "feasible", "speedup", "compute_speedup", "energy_efficiency", "bops_reduction"],
    )


def plot_series(table: pd.DataFrame, x: str, ys: Iterable[str]) -> Dict[str, object]:
    """
    x/y lists ready for an external plotting tool; NaN becomes null.
    """
    def clean(values):
        return [None if isinstance(v, float) and math.isnan(v) else v for v in values]

    return {
        "x": {"name": x, "values": clean(table[x].tolist())},
        "series": [{"name": y, "values": clean(table[y].tolist())} for y in ys],
    }
