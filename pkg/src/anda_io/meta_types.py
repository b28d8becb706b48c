from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Any, Dict, List, Literal, Optional

from anda_io.constants import (
    DEFAULT_GROUP_SIZE,
    DEFAULT_ORACLE_RESTARTS,
    DEFAULT_ORACLE_TIMEOUT_S,
    DEFAULT_POLL_INTERVAL_S,
    WEIGHT_GROUP_SIZE,
)

MB_BITS = 8 * 1024 * 1024


class RunManifest(BaseModel):
    command: str
    config: Dict[str, Any]
    seed: Optional[int] = None
    tool_version: str
    input_digests: Dict[str, str] = {}
    output_schema: str
    config_hash: str
    provenance: Dict[str, str] = {}
    created_at: str


class ModuleFiles(BaseModel):
    module_type: str
    activations: str
    weights: str
    scales: str
    weight_group_size: int = WEIGHT_GROUP_SIZE
    bit_width: int = 4


class WorkloadMeta(BaseModel):
    version: str
    family: str
    d_model: int
    d_ff: int
    tokens: int
    seed: int
    chained: bool = False
    modules: List[ModuleFiles]


class SearchResult(BaseModel):
    version: str
    combination: Optional[List[int]]
    bops: Optional[int] = None
    bops_reduction: Optional[float] = None
    delta: float
    fp_score: float
    iterations: int
    shape: Dict[str, Any]


class OracleEndpoint(BaseModel):
    transport: Literal["exec", "files"]
    command: Optional[str] = None
    request_path: Optional[str] = None
    response_path: Optional[str] = None
    timeout_s: float = Field(DEFAULT_ORACLE_TIMEOUT_S, gt=0)
    restarts: int = Field(DEFAULT_ORACLE_RESTARTS, ge=0)
    poll_interval_s: float = Field(DEFAULT_POLL_INTERVAL_S, gt=0)

    @model_validator(mode="after")
    def _check_transport(self):
        if self.transport == "exec" and not self.command:
            raise ValueError("exec transport needs a command")
        if self.transport == "files" and not (self.request_path and self.response_path):
            raise ValueError("files transport needs request and response paths")
        return self


class ArchConfig(BaseModel):
    mxu_rows: int = Field(16, ge=1)
    mxu_cols: int = Field(16, ge=1)
    adder_width: int = Field(DEFAULT_GROUP_SIZE, ge=1, le=64)
    clock_hz: float = Field(285e6, gt=0)
    act_mantissa_buffer_bits: int = Field(MB_BITS, ge=1)
    act_exponent_buffer_bits: int = Field(MB_BITS // 8, ge=1)
    weight_buffer_bits: int = Field(MB_BITS, ge=1)
    dram_bandwidth_bytes_per_s: float = Field(256e9, gt=0)
    bpc_lanes: int = Field(16, ge=1)
    bpc_latency_cycles: int = Field(0, ge=0)
    bpc_overlapped: bool = True
    pipeline_fill_cycles: int = Field(0, ge=0)
    ifpu_k_per_pe: int = Field(16, ge=1)
    ifpu_cycles_per_group: int = Field(4, ge=1)
    weight_group_size: int = Field(WEIGHT_GROUP_SIZE, ge=1)
    scale_bits: int = Field(16, ge=1)
    vector_cycles_per_token: float = Field(0.0, ge=0)
    provenance: Dict[str, str] = {}
    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def peak_macs_per_cycle(self) -> float:
        # baselines are sized to the Anda array at full 16-bit mantissa
        return self.mxu_rows * self.mxu_cols * self.adder_width / 16

    @property
    def dram_bytes_per_cycle(self) -> float:
        return self.dram_bandwidth_bytes_per_s / self.clock_hz


class EnergyParams(BaseModel):
    dram_pj_per_bit: float = Field(3.9, ge=0)
    sram_pj_per_bit: float = Field(0.2, ge=0)
    mxu_pj_per_apu_cycle: float = Field(0.745, ge=0)
    bpc_pj_per_cycle: float = Field(3.72, ge=0)
    fpfp_pj_per_mac: float = Field(0.93, ge=0)
    fpint_pj_per_mac: float = Field(0.50, ge=0)
    ifpu_pj_per_mac: float = Field(0.40, ge=0)
    ifpu_conversion_pj_per_group: float = Field(2.0, ge=0)
    figna_pj_per_mac_bit: float = Field(0.018, ge=0)
    figna_conversion_pj_per_group: float = Field(2.0, ge=0)
    vector_pj_per_token: float = Field(0.0, ge=0)
    provenance: Dict[str, str] = {}
    model_config = ConfigDict(frozen=True, extra="forbid")
