import json
import os

import numpy as np
import pytest

from anda_io.bops import PrecisionCombination
from anda_io.constants import WORKLOAD_META_FILE
from anda_io.errors import InvalidParams
from anda_io.oracles.proxy import ProxyOracle
from anda_io.weights import quantize_rtn
from anda_io.workload.proxy import aggregate_nrmse, module_nrmse, proxy_accuracy, reference_outputs
from anda_io.workload.synthetic import (
    CalibrationWorkload,
    ModuleWorkload,
    gen_synthetic_layer,
    load_workload,
    save_workload,
)


@pytest.fixture(scope="module")
def workload():
    return gen_synthetic_layer(seed=3, d_model=64, d_ff=256, tokens=16)


def test_shapes_follow_family():
    opt = gen_synthetic_layer(seed=0, d_model=32, d_ff=128, tokens=4)
    assert opt.module("qkv").weights.shape == (32, 96)
    assert opt.module("d").activations.shape == (4, 128)
    llama = gen_synthetic_layer(seed=0, d_model=32, d_ff=88, tokens=4, family="llama", chained=True)
    assert llama.module("u").weights.shape == (32, 176)
    assert llama.module("d").activations.shape == (4, 88)


def test_generation_is_deterministic():
    a = gen_synthetic_layer(seed=11, d_model=32, d_ff=64, tokens=8, chained=True)
    b = gen_synthetic_layer(seed=11, d_model=32, d_ff=64, tokens=8, chained=True)
    c = gen_synthetic_layer(seed=12, d_model=32, d_ff=64, tokens=8, chained=True)
    for x, y in zip(a.modules, b.modules):
        assert np.array_equal(x.activations.view(np.uint16), y.activations.view(np.uint16))
        assert x.weights == y.weights
    assert not np.array_equal(a.module("qkv").activations, c.module("qkv").activations)


def test_activations_are_fp16_with_outlier_channels(workload):
    a = workload.module("qkv").activations
    assert a.dtype == np.float16
    channel_peak = np.abs(a.astype(np.float32)).max(axis=0)
    assert channel_peak.max() > 2 * np.median(channel_peak)


def test_bad_generation_parameters():
    with pytest.raises(InvalidParams):
        gen_synthetic_layer(seed=0, d_model=0, d_ff=4, tokens=1)
    with pytest.raises(InvalidParams):
        gen_synthetic_layer(seed=0, d_model=4, d_ff=4, tokens=1, family="gpt")


def test_save_and_load(tmp_path, workload):
    meta_path = save_workload(workload, tmp_path / "wl")
    assert os.path.basename(meta_path) == WORKLOAD_META_FILE
    meta = json.load(open(meta_path))
    assert [m["module_type"] for m in meta["modules"]] == ["qkv", "o", "u", "d"]
    loaded = load_workload(tmp_path / "wl")
    assert loaded.shape() == workload.shape()
    for x, y in zip(workload.modules, loaded.modules):
        assert np.array_equal(x.activations.view(np.uint16), y.activations.view(np.uint16))
        assert x.weights == y.weights


def test_load_missing_workload(tmp_path):
    with pytest.raises(InvalidParams):
        load_workload(tmp_path)


def test_fp16_sentinel_scores_one(workload):
    assert proxy_accuracy(workload, "fp16") == 1.0


def test_proxy_score_improves_with_mantissa(workload):
    refs = reference_outputs(workload)
    scores = [proxy_accuracy(workload, PrecisionCombination.uniform(m), refs) for m in (2, 4, 8, 12, 16)]
    assert scores == sorted(scores)
    assert all(0.0 < s <= 1.0 for s in scores)
    assert scores[-1] > 0.999


def test_module_errors_are_independent(workload):
    refs = reference_outputs(workload)
    base = module_nrmse(workload, PrecisionCombination.uniform(12), refs)
    lowered = module_nrmse(workload, PrecisionCombination(12, 12, 12, 3), refs)
    assert lowered["qkv"] == base["qkv"]
    assert lowered["d"] > base["d"]


def test_aggregate_is_mac_weighted():
    assert aggregate_nrmse({"a": 1.0, "b": 0.0}, {"a": 1, "b": 3}) == 0.25
    assert aggregate_nrmse({}, {}) == 0.0


def test_proxy_oracle(workload):
    oracle = ProxyOracle(workload)
    assert oracle.evaluate("fp16") == 1.0
    c = PrecisionCombination.uniform(6)
    assert oracle.evaluate(c) == proxy_accuracy(workload, c)


def _hand_built(rng, activations_for):
    shape = gen_synthetic_layer(seed=0, d_model=64, d_ff=256, tokens=8)
    modules = []
    for mod in shape.modules:
        k, n = mod.weights.shape
        modules.append(
            ModuleWorkload(mod.module_type, activations_for(8, k), quantize_rtn(rng.standard_normal((k, n))))
        )
    workload = CalibrationWorkload(family="opt", d_model=64, d_ff=256, tokens=8, seed=0, modules=modules)
    workload.check()
    return workload


def test_lossless_encoding_scores_exactly_one(rng):
    # every value in [1, 2) shares exponent 0, so M >= 11 keeps all 11 significand bits
    def in_one_two(t, k):
        return (1.0 + rng.integers(0, 1024, size=(t, k)) / 1024.0).astype(np.float16)

    workload = _hand_built(rng, in_one_two)
    for m in (11, 16):
        assert proxy_accuracy(workload, PrecisionCombination.uniform(m)) == 1.0
    assert all(e == 0.0 for e in module_nrmse(workload, PrecisionCombination.uniform(16)).values())
    assert ProxyOracle(workload).evaluate(PrecisionCombination.uniform(16)) == 1.0


def test_zero_activations_score_one(rng):
    workload = _hand_built(rng, lambda t, k: np.zeros((t, k), dtype=np.float16))
    for m in (1, 4, 16):
        assert proxy_accuracy(workload, PrecisionCombination.uniform(m)) == 1.0


def test_references_follow_group_size(rng):
    def in_one_two(t, k):
        return (1.0 + rng.integers(0, 1024, size=(t, k)) / 1024.0).astype(np.float16)

    workload = _hand_built(rng, in_one_two)
    for gs in (16, 64):
        refs = reference_outputs(workload, gs)
        assert proxy_accuracy(workload, PrecisionCombination.uniform(16), refs, group_size=gs) == 1.0
