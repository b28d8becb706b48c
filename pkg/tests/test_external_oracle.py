import json
import os
import shlex
import sys
import threading
import time

import pytest

from anda_io.bops import ModelShape, PrecisionCombination
from anda_io.errors import MalformedResponse, NonFiniteScore, OracleFailure, OracleTimeout, UsageError
from anda_io.oracles import oracle_from_cli
from anda_io.oracles.external import ExternalOracle, FilePairOracle
from anda_io.oracles.threshold import ThresholdOracle
from anda_io.search import SearchConfig, search
from anda_io.workload.external import (
    decode_response,
    encode_request,
    external_oracle,
    parse_endpoint,
)

C = PrecisionCombination(7, 7, 6, 5)


def test_request_encoding():
    assert json.loads(encode_request(C)) == {"comb": [7, 7, 6, 5]}
    assert json.loads(encode_request("fp16")) == {"comb": "fp16"}


@pytest.mark.parametrize(
    "line, error",
    [
        ("not json", MalformedResponse),
        ('{"value": 1}', MalformedResponse),
        ('{"score": "high"}', MalformedResponse),
        ('{"score": true}', MalformedResponse),
        ('{"score": NaN}', NonFiniteScore),
        ('{"score": Infinity}', NonFiniteScore),
    ],
)
def test_bad_replies(line, error):
    with pytest.raises(error) as info:
        decode_response(line, C)
    assert info.value.combination == C


def test_good_reply():
    assert decode_response('{"score": 0.75, "extra": 1}\n') == 0.75


@pytest.mark.parametrize("value", ["exec:", "ftp:x", "files:only-one", "nothing"])
def test_bad_endpoints(value):
    with pytest.raises(UsageError):
        parse_endpoint(value)


def test_endpoint_parsing():
    endpoint = parse_endpoint("files:req.jsonl, resp.jsonl", timeout_s=3)
    assert endpoint.transport == "files"
    assert endpoint.response_path == "resp.jsonl"
    assert endpoint.timeout_s == 3


def test_child_process_oracle(echo_command):
    with ExternalOracle(f"exec:{echo_command('--fp-score', '0.9')}") as oracle:
        assert oracle.evaluate("fp16") == 0.9
        assert oracle.evaluate(PrecisionCombination(8, 4, 8, 8)) == 0.25
        assert oracle.evaluate(PrecisionCombination(16, 16, 16, 16)) == 1.0


def test_one_shot_call(echo_command):
    assert external_oracle(f"exec:{echo_command()}", PrecisionCombination.uniform(8)) == 0.5


def test_search_over_child_process_matches_in_process(echo_command):
    shape = ModelShape.opt_ratio(512)
    cfg = SearchConfig(max_iters=None)
    with ExternalOracle(f"exec:{echo_command('--mode', 'threshold', '--min', '7,7,6,5')}") as oracle:
        remote, remote_trace = search(shape, oracle, cfg)
    local, local_trace = search(shape, ThresholdOracle(C), cfg)
    assert remote == local == C
    assert remote_trace.combinations() == local_trace.combinations()


def test_malformed_child_reply(echo_command):
    with ExternalOracle(f"exec:{echo_command('--reply', 'garbage')}") as oracle:
        with pytest.raises(MalformedResponse):
            oracle.evaluate(C)


def test_child_timeout(echo_command):
    endpoint = parse_endpoint(f"exec:{echo_command('--sleep', '5')}", timeout_s=0.3, restarts=1)
    oracle = ExternalOracle(endpoint)
    started = time.monotonic()
    with pytest.raises(OracleTimeout) as info:
        oracle.evaluate(C)
    assert info.value.combination == C
    assert time.monotonic() - started < 4
    oracle.close()


def test_child_that_exits():
    command = shlex.join([sys.executable, "-c", "pass"])
    with ExternalOracle(f"exec:{command}") as oracle:
        with pytest.raises(OracleFailure):
            oracle.evaluate(C)


def _serve_files(request_path, response_path, stop):
    while not stop.is_set():
        if os.path.exists(request_path):
            with open(request_path) as f:
                comb = json.loads(f.read())["comb"]
            os.remove(request_path)
            score = 1.0 if comb == "fp16" else min(comb) / 16
            tmp = response_path + ".tmp"
            with open(tmp, "w") as f:
                f.write(json.dumps({"score": score}) + "\n")
            os.replace(tmp, response_path)
        time.sleep(0.01)


def test_file_pair_oracle(tmp_path):
    req, resp = str(tmp_path / "req.jsonl"), str(tmp_path / "resp.jsonl")
    stop = threading.Event()
    server = threading.Thread(target=_serve_files, args=(req, resp, stop), daemon=True)
    server.start()
    try:
        oracle = oracle_from_cli(f"files:{req},{resp}", {"oracle_timeout": 5.0, "oracle_restarts": 0})
        assert isinstance(oracle, FilePairOracle)
        assert oracle.evaluate("fp16") == 1.0
        assert oracle.evaluate(PrecisionCombination.uniform(4)) == 0.25
        assert not os.path.exists(resp)
    finally:
        stop.set()
        server.join()


def test_file_pair_timeout(tmp_path):
    endpoint = parse_endpoint(
        f"files:{tmp_path / 'req'},{tmp_path / 'resp'}", timeout_s=0.2, poll_interval_s=0.02
    )
    with pytest.raises(OracleTimeout):
        external_oracle(endpoint, C)


def test_oracle_slugs():
    assert isinstance(oracle_from_cli("threshold:6", {}), ThresholdOracle)
    with pytest.raises(UsageError):
        oracle_from_cli("magic", {})
