import json
import os

import numpy as np
import pandas as pd
import pytest

from anda_io.anda_cli import main
from anda_io.layout import read_raw_tensor, write_raw_tensor


def run(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return info.value.code, out, err


@pytest.fixture(scope="module")
def workload_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "wl"
    with pytest.raises(SystemExit) as info:
        main(["gen", "--out", str(out), "--seed", "5", "--d-model", "64", "--tokens", "16"])
    assert info.value.code == 0
    return out


def test_no_command_prints_help(capsys):
    code, out, _ = run([], capsys)
    assert code == 2
    assert "Commands" in out


def test_gen_writes_workload_and_manifest(workload_dir):
    assert (workload_dir / "ANDA_WORKLOAD.json").is_file()
    manifest = json.loads(open(str(workload_dir) + ".manifest.json").read())
    assert manifest["command"] == "gen"
    assert manifest["seed"] == 5
    assert manifest["config"]["d_ff"] == 256


def test_encode_decode_roundtrip(tmp_path, capsys, rng):
    src = tmp_path / "x.andt"
    x = rng.standard_normal((8, 100)).astype(np.float16)
    write_raw_tensor(x, str(src))
    code, out, _ = run(["encode", "--in", src, "--out", tmp_path / "x.anda", "--m", 16], capsys)
    assert code == 0
    assert "within_bound=True" in out
    assert (tmp_path / "x.anda.manifest.json").is_file()

    code, out, _ = run(["decode", "--in", tmp_path / "x.anda", "--out", tmp_path / "y.andt"], capsys)
    assert code == 0
    y = read_raw_tensor(str(tmp_path / "y.andt"))
    assert y.dtype == np.float32 and y.shape == x.shape
    err = np.abs(y.astype(np.float64) - x.astype(np.float64))
    assert err.max() < 2.0 ** -14 * np.abs(x.astype(np.float64)).max()


def test_encode_ones_container_size(tmp_path, capsys):
    src = tmp_path / "ones.andt"
    write_raw_tensor(np.ones((1, 64), dtype=np.float16), str(src))
    code, _, _ = run(["encode", "--in", src, "--out", tmp_path / "ones.anda", "--m", 8, "--gs", 64], capsys)
    assert code == 0
    assert os.path.getsize(tmp_path / "ones.anda") == 97


@pytest.mark.parametrize("extra", [["--m", "0"], ["--m", "8", "--gs", "65"]])
def test_encode_usage_errors(tmp_path, capsys, extra):
    src = tmp_path / "ones.andt"
    write_raw_tensor(np.ones((1, 64), dtype=np.float16), str(src))
    code, _, _ = run(["encode", "--in", src, "--out", tmp_path / "o.anda", *extra], capsys)
    assert code == 2


def test_decode_bad_container(tmp_path, capsys):
    bad = tmp_path / "bad.anda"
    bad.write_bytes(b"XXXX" + bytes(40))
    code, _, err = run(["decode", "--in", bad, "--out", tmp_path / "o.andt"], capsys)
    assert code == 2
    assert err.startswith("Error:") and err.count("\n") == 1


def test_sweep(workload_dir, tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(["sweep", "--workload", workload_dir, "--gs-list", "1,64", "--m-list", "4..16", "--csv", out], capsys)
    assert code == 0
    table = pd.read_csv(out)
    assert list(table.columns) == ["gs", "m", "module", "nrmse", "max_abs"]
    pooled = table[table["module"] == "all"]
    for gs, rows in pooled.groupby("gs"):
        assert rows.sort_values("m")["nrmse"].is_monotonic_decreasing
    per_m = pooled.pivot(index="m", columns="gs", values="nrmse")
    assert (per_m[1] <= per_m[64]).all()
    assert (tmp_path / "sweep.csv.manifest.json").is_file()


def test_sweep_empty_list(workload_dir, capsys):
    code, _, _ = run(["sweep", "--workload", workload_dir, "--m-list", ","], capsys)
    assert code == 2


def test_sweep_csv_and_json_keep_separate_manifests(tmp_path, workload_dir, capsys):
    csv, records = tmp_path / "x.csv", tmp_path / "x.json"
    code, _, _ = run(["sweep", "--workload", workload_dir, "--m-list", "8", "--csv", csv, "--json", records], capsys)
    assert code == 0
    assert not (tmp_path / "x.manifest.json").exists()
    for out in (csv, records):
        manifest = json.load(open(str(out) + ".manifest.json"))
        assert manifest["command"] == "sweep"


def test_search_with_threshold_oracle(tmp_path, capsys):
    trace = tmp_path / "trace.jsonl"
    code, out, _ = run(
        ["search", "--oracle", "threshold:6", "--shape", "opt-125m", "--delta", "0.01", "--trace", trace], capsys
    )
    assert code == 0
    assert out.strip().splitlines()[-1] == "best [6,6,6,6] bops_reduction 2.667"
    assert all(json.loads(line)["iter"] == i for i, line in enumerate(open(trace)))


def test_search_trace_and_result_share_config_hash(tmp_path, capsys):
    trace, result = tmp_path / "trace.jsonl", tmp_path / "result.json"
    code, _, _ = run(
        ["search", "--oracle", "threshold:6", "--shape", "opt-125m", "--trace", trace, "--out", result], capsys
    )
    assert code == 0
    traced = json.load(open(str(trace) + ".manifest.json"))
    saved = json.load(open(str(result) + ".manifest.json"))
    assert traced["config_hash"] == saved["config_hash"]
    assert traced["config"] == saved["config"]


def test_search_infeasible_exit_code(tmp_path, capsys):
    result = tmp_path / "result.json"
    code, _, err = run(
        ["search", "--oracle", "threshold:6", "--shape", "opt-125m", "--max-iters", 1, "--out", result], capsys
    )
    assert code == 3
    assert "Error:" in err
    assert json.load(open(result))["combination"] is None


def test_search_over_exec_matches_in_process(tmp_path, capsys, echo_command):
    local, remote = tmp_path / "local.jsonl", tmp_path / "remote.jsonl"
    code, _, _ = run(["search", "--oracle", "threshold:7,7,6,5", "--shape", "opt-125m", "--trace", local], capsys)
    assert code == 0
    oracle = "exec:" + echo_command("--mode", "threshold", "--min", "7,7,6,5")
    code, _, _ = run(["search", "--oracle", oracle, "--shape", "opt-125m", "--trace", remote], capsys)
    assert code == 0
    assert open(local).read() == open(remote).read()


def test_unknown_oracle(capsys):
    code, _, _ = run(["search", "--oracle", "crystal-ball", "--shape", "opt-125m"], capsys)
    assert code == 2


def test_end_to_end_pipeline_is_deterministic(workload_dir, tmp_path, capsys):
    outputs = []
    for run_id in ("a", "b"):
        result = tmp_path / f"{run_id}-result.json"
        sim = tmp_path / f"{run_id}-sim.csv"
        cmp_csv = tmp_path / f"{run_id}-cmp.csv"
        code, _, _ = run(["search", "--workload", workload_dir, "--delta", "0.01", "--out", result], capsys)
        assert code == 0
        code, out, _ = run(["simulate", "--shape", "opt-125m", "--comb", result, "--csv", sim], capsys)
        assert code == 0 and out.startswith("Anda [")
        code, _, _ = run(["compare", "--shape", "opt-125m", "--comb", result, "--csv", cmp_csv, "--plot-data", tmp_path / f"{run_id}-plot.json"], capsys)
        assert code == 0
        outputs.append([open(p, "rb").read() for p in (result, sim, cmp_csv)])
    assert outputs[0] == outputs[1]

    table = pd.read_csv(tmp_path / "a-sim.csv")
    assert table["scope"].tolist() == ["qkv", "o", "u", "d", "total"]
    plot = json.load(open(tmp_path / "a-plot.json"))
    assert plot["x"]["values"][0] == "FPFP"


@pytest.mark.parametrize("m, expected", [(8, 2.0), (16, 1.0)])
def test_simulate_uniform_speedup(tmp_path, capsys, m, expected):
    out = tmp_path / "sim.csv"
    comb = ",".join([str(m)] * 4)
    code, _, _ = run(["simulate", "--shape", "opt-125m", "--comb", comb, "--csv", out], capsys)
    assert code == 0
    table = pd.read_csv(out).set_index("scope")
    assert table.loc["total", "speedup"] == pytest.approx(expected)


def test_simulate_malformed_arch(tmp_path, capsys):
    arch = tmp_path / "arch.json"
    arch.write_text("{ nope")
    code, _, _ = run(["simulate", "--shape", "opt-125m", "--comb", "8,8,8,8", "--arch", arch], capsys)
    assert code == 2


def test_simulate_tile_exceeds_buffer(tmp_path, capsys):
    arch = tmp_path / "arch.json"
    arch.write_text(json.dumps({"act_mantissa_buffer_bits": 4096, "act_exponent_buffer_bits": 64}))
    code, _, err = run(["simulate", "--shape", "opt-125m", "--comb", "8,8,8,8", "--arch", arch], capsys)
    assert code == 4
    assert "K=768" in err


def test_tradeoff_and_sensitivity(workload_dir, tmp_path, capsys):
    out = tmp_path / "tradeoff.csv"
    code, _, _ = run(
        ["tradeoff", "--workload", workload_dir, "--deltas", "0.01,0.05", "--tokens", 256, "--csv", out], capsys
    )
    assert code == 0
    table = pd.read_csv(out)
    assert table["delta"].tolist() == [0.01, 0.05]
    assert list(table.columns) == ["delta", "combination", "feasible", "speedup", "compute_speedup", "energy_efficiency", "bops_reduction"]
    assert table["feasible"].iloc[1]
    assert table["bops_reduction"].iloc[1] > 1.0

    code, out, _ = run(["sensitivity", "--oracle", "threshold:7", "--m-list", "6,8", "--modules", "u"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "module,m,combination,score,relative_score"
    assert lines[1:] == ["u,6,\"[13,13,6,13]\",0,0", "u,8,\"[13,13,8,13]\",1,1"]


def test_sensitivity_bad_module(capsys):
    code, _, _ = run(["sensitivity", "--oracle", "threshold:7", "--modules", "attn"], capsys)
    assert code == 2
