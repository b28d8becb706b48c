import json
import math

import numpy as np
import pytest

from anda_io.bops import ModelShape, PrecisionCombination
from anda_io.errors import InvalidParams, TileExceedsBuffer
from anda_io.meta_types import ArchConfig, EnergyParams
from anda_io.oracles.threshold import ThresholdOracle
from anda_io.platforms import load_platforms
from anda_io.platforms.figna import FIGNAPlatform
from anda_io.search import SearchConfig
from anda_io.sim import (
    CONFIG_DIR_ENV,
    SimReport,
    compare,
    load_arch,
    load_energy,
    output_mantissas,
    plot_series,
    simulate_gemm,
    simulate_model,
    simulate_modules,
    tradeoff_sweep,
)

ARCH = ArchConfig()
ENERGY = EnergyParams()
OPT_125M = ModelShape.preset("opt-125m")


def test_packaged_configs_match_defaults():
    arch = load_arch()
    energy = load_energy()
    assert arch.model_dump(exclude={"provenance"}) == ARCH.model_dump(exclude={"provenance"})
    assert energy.model_dump(exclude={"provenance"}) == ENERGY.model_dump(exclude={"provenance"})
    assert arch.provenance["mxu_rows"] == "published"


def test_config_dir_override(tmp_path, monkeypatch):
    (tmp_path / "arch.json").write_text(json.dumps({"mxu_rows": {"value": 32, "provenance": "assumption"}, "clock_hz": 1e9}))
    monkeypatch.setenv(CONFIG_DIR_ENV, str(tmp_path))
    arch = load_arch()
    assert arch.mxu_rows == 32 and arch.clock_hz == 1e9
    assert arch.provenance == {"mxu_rows": "assumption"}
    assert load_energy().dram_pj_per_bit == ENERGY.dram_pj_per_bit


@pytest.mark.parametrize("content", ["{not json", json.dumps({"mxu_rows": -1}), json.dumps({"warp_drive": 1}), "[1]"])
def test_bad_config(tmp_path, content):
    path = tmp_path / "arch.json"
    path.write_text(content)
    with pytest.raises(InvalidParams):
        load_arch(str(path))


def test_missing_config():
    with pytest.raises(InvalidParams):
        load_energy("/nonexistent/energy.json")


def test_registry_has_every_platform():
    assert set(load_platforms()) == {"fpfp", "fpint", "ifpu", "figna", "anda"}


def test_single_tile_speedup():
    anda = simulate_gemm(16, 16, 64, "anda", ARCH, ENERGY, m=8)
    fpfp = simulate_gemm(16, 16, 64, "fpfp", ARCH, ENERGY)
    assert anda.compute_cycles == 8
    assert fpfp.compute_cycles == 16
    assert anda.speedup_over(fpfp) == 2.0
    assert anda.macs == fpfp.macs == 16 * 16 * 64


def test_total_is_at_least_every_component():
    report = simulate_gemm(100, 300, 700, "anda", ARCH, ENERGY, m=5, m_out=7)
    assert report.total_cycles >= max(report.compute_cycles, report.memory_cycles, report.bpc_cycles)
    serial = simulate_gemm(100, 300, 700, "anda", ARCH.model_copy(update={"bpc_overlapped": False}), ENERGY, m=5, m_out=7)
    assert serial.total_cycles == pytest.approx(max(serial.compute_cycles, serial.memory_cycles) + serial.bpc_cycles)


def test_anda_output_storage_and_compression():
    report = simulate_gemm(16, 64, 64, "anda", ARCH, ENERGY, m=8, m_out=6)
    assert report.dram_bits["outputs"] == 16 * (64 * 7 + 8)
    assert report.bpc_cycles == 6
    assert report.dram_bits["activations"] == 16 * 584
    fp16_out = simulate_gemm(16, 64, 64, "anda", ARCH, ENERGY, m=8)
    assert fp16_out.dram_bits["outputs"] == 16 * 64 * 16
    assert fp16_out.bpc_cycles == 0


def test_weights_refetched_when_they_do_not_fit():
    small = ARCH.model_copy(update={"weight_buffer_bits": 1024})
    fits = simulate_gemm(64, 64, 128, "fpint", ARCH, ENERGY)
    spills = simulate_gemm(64, 64, 128, "fpint", small, ENERGY)
    assert spills.dram_bits["weights"] == 4 * fits.dram_bits["weights"]
    assert spills.sram_bits["weights"] == fits.sram_bits["weights"]


def test_tile_exceeds_buffer():
    tiny = ARCH.model_copy(update={"act_mantissa_buffer_bits": 1024, "act_exponent_buffer_bits": 64})
    for platform in ("anda", "fpfp"):
        with pytest.raises(TileExceedsBuffer):
            simulate_gemm(16, 16, 64, platform, tiny, ENERGY, m=8)


def test_bad_dims_and_platform():
    with pytest.raises(InvalidParams):
        simulate_gemm(0, 16, 64, "anda")
    with pytest.raises(InvalidParams):
        simulate_gemm(16, 16, 64, "tpu")


@pytest.mark.parametrize("m, expected", [(8, 2.0), (16, 1.0), (4, 4.0)])
def test_uniform_model_speedup(m, expected):
    anda = simulate_model(OPT_125M, PrecisionCombination.uniform(m), 2048, "anda", ARCH, ENERGY)
    fpfp = simulate_model(OPT_125M, PrecisionCombination.uniform(16), 2048, "fpfp", ARCH, ENERGY)
    assert anda.speedup_over(fpfp) == pytest.approx(expected)


def test_compute_speedup_closed_form():
    rng = np.random.default_rng(5)
    for _ in range(100):
        T, N, K = (int(v) * 64 for v in rng.integers(1, 33, size=3))
        m = int(rng.integers(1, 17))
        anda = simulate_gemm(T, N, K, "anda", ARCH, ENERGY, m=m)
        fpfp = simulate_gemm(T, N, K, "fpfp", ARCH, ENERGY)
        assert anda.compute_speedup_over(fpfp) == pytest.approx(16 / m)


def test_model_compute_speedup_matches_mac_weighted_closed_form():
    rng = np.random.default_rng(6)
    for _ in range(100):
        shape = ModelShape.from_gemms(
            {
                name: (int(rng.integers(1, 49)) * 64, int(rng.integers(1, 129)) * 16)
                for name in ("qkv", "o", "u", "d")
            },
            n_layers=int(rng.integers(1, 4)),
        )
        c = PrecisionCombination.of(rng.integers(1, 17, size=4))
        tokens = int(rng.integers(1, 65)) * 16
        anda = simulate_model(shape, c, tokens, "anda", ARCH, ENERGY)
        fpfp = simulate_model(shape, c, tokens, "fpfp", ARCH, ENERGY)
        n = shape.macs_per_token()
        expected = 16 * sum(n.values()) / sum(n[name] * c[name] for name in n)
        assert abs(anda.compute_speedup_over(fpfp) - expected) <= 1e-9 * expected
        uniform = simulate_model(shape, PrecisionCombination.uniform(16), tokens, "anda", ARCH, ENERGY)
        assert uniform.compute_speedup_over(fpfp) == 1.0


@pytest.mark.parametrize("m", [4, 5, 6, 7, 8])
def test_anda_spends_less_energy(m):
    c = PrecisionCombination.uniform(m)
    anda = simulate_model(OPT_125M, c, 256, "anda", ARCH, ENERGY)
    for baseline in ("fpfp", "fpint", "ifpu", "figna"):
        other = simulate_model(OPT_125M, c, 256, baseline, ARCH, ENERGY)
        assert anda.energy_compute < other.energy_compute
        assert anda.energy_efficiency_over(other) > 1.0


def test_figna_variants():
    default = FIGNAPlatform(ARCH, ENERGY)
    assert default.label == "FIGNA"
    m8 = FIGNAPlatform(ARCH, ENERGY, mantissa_len=8)
    assert m8.label == "FIGNA-M8"
    fpfp = simulate_gemm(64, 64, 64, "fpfp", ARCH, ENERGY)
    assert simulate_gemm(64, 64, 64, m8).compute_speedup_over(fpfp) == 2.0


def test_output_mantissas_follow_consumers():
    assert output_mantissas(PrecisionCombination(7, 7, 6, 5)) == {"qkv": None, "o": 6, "u": 5, "d": 7}


def test_layer_is_sum_of_modules():
    c = PrecisionCombination(7, 7, 6, 5)
    modules = simulate_modules(OPT_125M, c, 128, "anda", ARCH, ENERGY)
    layer = simulate_model(OPT_125M.model_copy(update={"n_layers": 1}), c, 128, "anda", ARCH, ENERGY)
    assert layer.total_cycles == pytest.approx(sum(r.total_cycles for r in modules.values()))
    assert layer.macs == sum(r.macs for r in modules.values())
    whole = simulate_model(OPT_125M, c, 128, "anda", ARCH, ENERGY)
    assert whole.total_cycles == pytest.approx(12 * layer.total_cycles)
    assert whole.dram_bits["weights"] == 12 * layer.dram_bits["weights"]


def test_vector_work_is_lumped_per_token():
    arch = ARCH.model_copy(update={"vector_cycles_per_token": 10.0})
    energy = ENERGY.model_copy(update={"vector_pj_per_token": 2.0})
    plain = simulate_model(OPT_125M, PrecisionCombination.uniform(8), 64, "anda", ARCH, ENERGY)
    report = simulate_model(OPT_125M, PrecisionCombination.uniform(8), 64, "anda", arch, energy)
    assert report.total_cycles == pytest.approx(plain.total_cycles + 12 * 640)
    assert report.energy_vector == pytest.approx(12 * 128)


def test_zero_tokens():
    report = simulate_model(OPT_125M, PrecisionCombination.uniform(8), 0, "anda")
    assert report.total_cycles == 0 and report.energy_total == 0
    assert report.speedup_over(SimReport.empty("FPFP")) == 1.0


def test_report_row_columns():
    row = simulate_gemm(16, 16, 64, "anda", m=4).to_row()
    assert {"dram_bits_activations", "sram_bits_outputs", "energy_total_pj", "total_cycles"} <= set(row)


def test_compare_table():
    table = compare(OPT_125M, PrecisionCombination.uniform(8), 2048, ARCH, ENERGY)
    assert table["platform"].tolist() == ["FPFP", "FPINT", "iFPU", "FIGNA", "FIGNA-M11", "FIGNA-M8", "Anda"]
    assert table.loc[0, "speedup"] == 1.0
    anda = table.set_index("platform").loc["Anda"]
    assert anda["speedup"] == pytest.approx(2.0)
    assert anda["energy_efficiency"] > table.set_index("platform").loc["FIGNA", "energy_efficiency"]


def test_tradeoff_sweep():
    shape = ModelShape.opt_ratio(512)
    table = tradeoff_sweep(
        shape, ThresholdOracle(PrecisionCombination(7, 7, 6, 5)), [0.0, 0.01], 256, ARCH, ENERGY, SearchConfig(max_iters=None)
    )
    assert table["combination"].tolist() == ["[7,7,6,5]", "[7,7,6,5]"]
    assert table["feasible"].all()
    assert table.loc[0, "bops_reduction"] == pytest.approx(2.667, abs=1e-3)
    assert table.loc[0, "speedup"] > 1.0

    infeasible = tradeoff_sweep(shape, ThresholdOracle(14), [0.01], 256, ARCH, ENERGY)
    assert not infeasible.loc[0, "feasible"]
    assert math.isnan(infeasible.loc[0, "speedup"])
    series = plot_series(infeasible, "delta", ["speedup"])
    assert series == {"x": {"name": "delta", "values": [0.01]}, "series": [{"name": "speedup", "values": [None]}]}

    with pytest.raises(InvalidParams):
        tradeoff_sweep(shape, ThresholdOracle(6), [])
