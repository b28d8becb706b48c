"""
JSON-lines protocol for accuracy oracles that live outside this process.

A request is one UTF-8 line, {"comb": [m_qkv, m_o, m_u, m_d]} or {"comb": "fp16"},
and the reply is one line {"score": <number>}. Two transports carry it: a child
process spoken to over stdin/stdout, or a request/response file pair.
"""
from __future__ import annotations

import json
import math
import os
import queue
import shlex
import subprocess
import threading
from typing import Optional, Union

from tenacity import (
    RetryError,
    Retrying,
    retry_if_exception_type,
    stop_after_attempt,
    stop_after_delay,
    wait_fixed,
    wait_random_exponential,
)
from tqdm import tqdm

from anda_io.bops import PrecisionCombination
from anda_io.constants import (
    DEFAULT_ORACLE_RESTARTS,
    DEFAULT_ORACLE_TIMEOUT_S,
    DEFAULT_POLL_INTERVAL_S,
)
from anda_io.errors import (
    MalformedResponse,
    NonFiniteScore,
    OracleFailure,
    OracleTimeout,
    UsageError,
)
from anda_io.meta_types import OracleEndpoint
from anda_io.names import FP16_SENTINEL, OracleNames

Request = Union[PrecisionCombination, str]


def parse_endpoint(
    value: str,
    timeout_s: float = DEFAULT_ORACLE_TIMEOUT_S,
    restarts: int = DEFAULT_ORACLE_RESTARTS,
    poll_interval_s: float = DEFAULT_POLL_INTERVAL_S,
) -> OracleEndpoint:
    """
    "exec:<command line>" or "files:<request path>,<response path>".
    """
    transport, sep, rest = value.partition(":")
    if not sep or not rest.strip():
        raise UsageError(f"oracle endpoint '{value}' should look like exec:<cmd> or files:<req>,<resp>")
    common = dict(timeout_s=timeout_s, restarts=restarts, poll_interval_s=poll_interval_s)
    if transport == OracleNames.EXEC:
        return OracleEndpoint(transport="exec", command=rest, **common)
    if transport == OracleNames.FILES:
        paths = [p.strip() for p in rest.split(",")]
        if len(paths) != 2 or not all(paths):
            raise UsageError(f"files endpoint needs '<request>,<response>', got '{rest}'")
        return OracleEndpoint(transport="files", request_path=paths[0], response_path=paths[1], **common)
    raise UsageError(f"unknown oracle transport '{transport}'")


def encode_request(request: Request) -> str:
    if request == FP16_SENTINEL:
        return json.dumps({"comb": FP16_SENTINEL})
    return json.dumps({"comb": list(request)})


def decode_response(line: str, request: Request = None) -> float:
    try:
        reply = json.loads(line)
    except json.JSONDecodeError as e:
        raise MalformedResponse(f"oracle reply is not JSON: {line.strip()!r}", cause=e, combination=request)
    if not isinstance(reply, dict) or "score" not in reply:
        raise MalformedResponse(f"oracle reply has no 'score': {line.strip()!r}", combination=request)
    score = reply["score"]
    if isinstance(score, bool) or not isinstance(score, (int, float)):
        raise MalformedResponse(f"oracle score is not a number: {score!r}", combination=request)
    if not math.isfinite(score):
        raise NonFiniteScore(f"oracle returned {score}", combination=request)
    return float(score)


class ChildProcessTransport:
    """
    Keeps one child alive across requests. A request that times out kills the
    child; the next attempt starts a fresh one, up to `restarts` times.
    """

    def __init__(self, endpoint: OracleEndpoint):
        self.endpoint = endpoint
        self.process: Optional[subprocess.Popen] = None
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()

    def _start(self):
        self._lines = queue.Queue()
        self.process = subprocess.Popen(
            shlex.split(self.endpoint.command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        reader = threading.Thread(target=self._pump, args=(self.process, self._lines), daemon=True)
        reader.start()

    @staticmethod
    def _pump(process: subprocess.Popen, lines: queue.Queue):
        for line in process.stdout:
            lines.put(line)
        lines.put(None)

    def _kill(self):
        if self.process is None:
            return
        if self.process.poll() is None:
            self.process.kill()
        self.process.wait()
        self.process = None

    def _exchange_once(self, line: str) -> str:
        if self.process is None or self.process.poll() is not None:
            self._start()
        try:
            self.process.stdin.write(line + "\n")
            self.process.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            self._kill()
            raise OracleFailure("oracle process closed its input", cause=e)
        try:
            reply = self._lines.get(timeout=self.endpoint.timeout_s)
        except queue.Empty:
            tqdm.write(f"Oracle did not answer within {self.endpoint.timeout_s}s, restarting it")
            self._kill()
            raise OracleTimeout(f"no reply within {self.endpoint.timeout_s}s")
        if reply is None:
            code = self.process.wait()
            self.process = None
            raise OracleFailure(f"oracle process exited with code {code}")
        return reply

    def exchange(self, line: str) -> str:
        retrying = Retrying(
            stop=stop_after_attempt(self.endpoint.restarts + 1),
            retry=retry_if_exception_type(OracleTimeout),
            wait=wait_random_exponential(multiplier=0.1, max=2),
            reraise=True,
        )
        for attempt in retrying:
            with attempt:
                return self._exchange_once(line)

    def close(self):
        if self.process is None:
            return
        try:
            self.process.stdin.close()
            self.process.wait(timeout=self.endpoint.timeout_s)
        except (OSError, subprocess.TimeoutExpired):
            pass
        self._kill()


class _ResponsePending(Exception):
    pass


class FilePairTransport:
    """
    Writes the request file atomically, then polls for a complete response line.
    The response file is removed once read.
    """

    def __init__(self, endpoint: OracleEndpoint):
        self.endpoint = endpoint

    def _write_request(self, line: str):
        path = self.endpoint.request_path
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as f:
            f.write(line + "\n")
        os.replace(tmp, path)

    def _read_response(self) -> str:
        try:
            with open(self.endpoint.response_path, encoding="utf-8") as f:
                text = f.read()
        except FileNotFoundError:
            raise _ResponsePending()
        if not text.endswith("\n"):
            raise _ResponsePending()
        os.remove(self.endpoint.response_path)
        return text.splitlines()[0] if text.strip() else text

    def exchange(self, line: str) -> str:
        if os.path.exists(self.endpoint.response_path):
            os.remove(self.endpoint.response_path)
        self._write_request(line)
        retrying = Retrying(
            stop=stop_after_delay(self.endpoint.timeout_s),
            wait=wait_fixed(self.endpoint.poll_interval_s),
            retry=retry_if_exception_type(_ResponsePending),
        )
        try:
            return retrying(self._read_response)
        except RetryError as e:
            raise OracleTimeout(
                f"no response at {self.endpoint.response_path} within {self.endpoint.timeout_s}s",
                cause=e,
            )

    def close(self):
        pass


def open_transport(endpoint: OracleEndpoint):
    if endpoint.transport == OracleNames.EXEC:
        return ChildProcessTransport(endpoint)
    return FilePairTransport(endpoint)


def ask(transport, request: Request) -> float:
    try:
        line = transport.exchange(encode_request(request))
    except OracleFailure as e:
        if e.combination is None:
            e.combination = request
        raise
    return decode_response(line, request)


def external_oracle(endpoint: Union[OracleEndpoint, str], request: Request) -> float:
    """
    One-shot evaluation; long runs should keep a transport open instead.
    """
    if isinstance(endpoint, str):
        endpoint = parse_endpoint(endpoint)
    transport = open_transport(endpoint)
    try:
        return ask(transport, request)
    finally:
        transport.close()
