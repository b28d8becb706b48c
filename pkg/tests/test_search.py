import json

import numpy as np
import pytest
from pydantic import ValidationError

from anda_io.bops import ModelShape, PrecisionCombination, eval_bops
from anda_io.errors import NonFiniteScore, OracleFailure
from anda_io.names import FP16_SENTINEL
from anda_io.oracles import CachedOracle
from anda_io.oracles.threshold import FunctionOracle, ThresholdOracle
from anda_io.search import (
    SearchConfig,
    brute_force,
    generate_candidates,
    module_sensitivity,
    search,
)
from conftest import upward_closed_oracle

SHAPE = ModelShape.opt_ratio(512)


def _check_exhausted(best, trace, oracle, cfg):
    assert trace.exhausted
    threshold = (1.0 - cfg.delta) * oracle.evaluate(FP16_SENTINEL)
    assert oracle.evaluate(best) >= threshold
    visited = set(trace.combinations())
    for cand in generate_candidates(best, cfg.floor):
        assert cand in visited or oracle.evaluate(cand) < threshold


def test_candidates_respect_floor():
    c = PrecisionCombination(2, 1, 5, 2)
    assert generate_candidates(c, floor=1) == [
        PrecisionCombination(1, 1, 5, 2),
        PrecisionCombination(2, 1, 4, 2),
        PrecisionCombination(2, 1, 5, 1),
    ]
    assert generate_candidates(c, floor=2) == [PrecisionCombination(2, 1, 4, 2)]


def test_config_validation():
    with pytest.raises(ValidationError):
        SearchConfig(init_lo=9, init_hi=4)
    with pytest.raises(ValidationError):
        SearchConfig(delta=1.5)


def test_search_finds_threshold_minimum():
    oracle = ThresholdOracle(PrecisionCombination(7, 7, 6, 5))
    cfg = SearchConfig(delta=0.01, max_iters=None)
    best, trace = search(SHAPE, oracle, cfg)
    assert best == PrecisionCombination(7, 7, 6, 5)
    _check_exhausted(best, trace, oracle, cfg)
    assert trace.best_bops == eval_bops(best, SHAPE)
    assert trace.records[0].combination == PrecisionCombination.uniform(4)


def test_threshold_six_worked_example():
    oracle = ThresholdOracle(6)
    cfg = SearchConfig(delta=0.01, max_iters=None)
    best, trace = search(SHAPE, oracle, cfg)
    assert best == PrecisionCombination.uniform(6)
    assert {PrecisionCombination.uniform(4), PrecisionCombination.uniform(5)} <= trace.rejected()
    _check_exhausted(best, trace, oracle, cfg)


def test_search_trace_is_cheaper_each_acceptance():
    oracle = ThresholdOracle(PrecisionCombination(9, 6, 8, 5))
    _, trace = search(SHAPE, oracle, SearchConfig(max_iters=None))
    accepted = [r.bops for r in trace.accepted()]
    assert accepted == sorted(accepted, reverse=True)
    assert len(set(accepted)) == len(accepted)
    assert all(r.score >= trace.threshold for r in trace.accepted())
    assert not trace.rejected() & {r.combination for r in trace.accepted()}


def test_search_infeasible():
    best, trace = search(SHAPE, ThresholdOracle(14), SearchConfig(init_hi=13))
    assert best is None
    assert trace.accepted() == []
    assert len(trace.records) == 10


def test_max_iters_bounds_evaluations():
    counted = []

    def score(c):
        counted.append(c)
        return 1.0

    best, trace = search(SHAPE, FunctionOracle(score), SearchConfig(max_iters=3, floor=3))
    assert len(trace.records) == 3
    assert len(counted) == 3
    assert best is not None


def test_search_never_reevaluates():
    calls = []

    def score(c):
        calls.append(c)
        return 1.0 if min(c) >= 5 else 0.0

    search(SHAPE, FunctionOracle(score), SearchConfig(max_iters=None))
    assert len(calls) == len(set(calls))


def test_trace_outputs(tmp_path):
    _, trace = search(SHAPE, ThresholdOracle(6), SearchConfig(max_iters=5))
    path = trace.to_jsonl(tmp_path / "trace.jsonl")
    lines = [json.loads(line) for line in open(path)]
    assert [line["iter"] for line in lines] == list(range(len(trace.records)))
    assert set(lines[0]) == {"iter", "comb", "bops", "score", "accepted"}
    frame = trace.to_frame()
    assert list(frame.columns) == ["iteration", "combination", "bops", "score", "accepted"]
    assert len(frame) == len(trace.records)


def test_nan_score_is_rejected():
    oracle = FunctionOracle(lambda c: float("nan"))
    with pytest.raises(NonFiniteScore) as info:
        search(SHAPE, oracle)
    assert info.value.combination == PrecisionCombination.uniform(4)


def test_oracle_exceptions_are_wrapped():
    def broken(c):
        raise RuntimeError("boom")

    with pytest.raises(OracleFailure):
        CachedOracle(FunctionOracle(broken)).evaluate(PrecisionCombination.uniform(4))


def test_cache_counts_distinct_requests():
    cached = CachedOracle(ThresholdOracle(5))
    for _ in range(3):
        cached.evaluate(PrecisionCombination.uniform(6))
    cached.fp_score()
    assert cached.calls == 2


@pytest.mark.slow
def test_exhausted_search_matches_brute_force():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        minimums = PrecisionCombination.of(rng.integers(4, 9, size=4))
        oracle = upward_closed_oracle(minimums)
        cfg = SearchConfig(delta=0.0, max_iters=None, init_lo=4, init_hi=8, floor=4)
        best, trace = search(SHAPE, oracle, cfg)
        _check_exhausted(best, trace, oracle, cfg)
        optimum = brute_force(SHAPE, oracle, delta=0.0, lo=4, hi=8)
        assert optimum == minimums
        assert eval_bops(best, SHAPE) == eval_bops(optimum, SHAPE)


def test_brute_force_with_workers():
    oracle = ThresholdOracle(PrecisionCombination(6, 5, 7, 4))
    assert brute_force(SHAPE, oracle, 0.01, max_workers=4) == PrecisionCombination(6, 5, 7, 4)
    assert brute_force(SHAPE, ThresholdOracle(9), 0.01) is None


def test_module_sensitivity():
    oracle = FunctionOracle(lambda c: c["d"] / 16)
    table = module_sensitivity(oracle, [4, 8], fixed=13, modules=["qkv", "d"])
    assert list(table.columns) == ["module", "m", "combination", "score", "relative_score"]
    assert table["combination"].tolist() == ["[4,13,13,13]", "[8,13,13,13]", "[13,13,13,4]", "[13,13,13,8]"]
    assert table["relative_score"].tolist() == pytest.approx([13 / 16, 13 / 16, 4 / 16, 8 / 16])
