from __future__ import annotations

from typing import Union

from anda_io.constants import (
    DEFAULT_ORACLE_RESTARTS,
    DEFAULT_ORACLE_TIMEOUT_S,
    DEFAULT_POLL_INTERVAL_S,
)
from anda_io.meta_types import OracleEndpoint
from anda_io.names import OracleNames
from anda_io.oracles.oracle_cls import Oracle, Request
from anda_io.workload.external import ask, open_transport, parse_endpoint


class ExternalOracle(Oracle):
    """
    Child process speaking the JSON-lines oracle protocol on stdin/stdout.
    Requests are serialized; the process stays up until close().
    """

    ORACLE_SLUG = OracleNames.EXEC

    def __init__(self, endpoint: Union[OracleEndpoint, str]):
        if isinstance(endpoint, str):
            endpoint = parse_endpoint(endpoint)
        self.endpoint = endpoint
        self.transport = open_transport(endpoint)

    @classmethod
    def from_cli(cls, value: str, args: dict) -> "ExternalOracle":
        return cls(
            parse_endpoint(
                f"{cls.ORACLE_SLUG}:{value}",
                timeout_s=args.get("oracle_timeout") or DEFAULT_ORACLE_TIMEOUT_S,
                restarts=args.get("oracle_restarts", DEFAULT_ORACLE_RESTARTS),
                poll_interval_s=DEFAULT_POLL_INTERVAL_S,
            )
        )

    def evaluate(self, request: Request) -> float:
        return ask(self.transport, request)

    def close(self):
        self.transport.close()


class FilePairOracle(ExternalOracle):
    ORACLE_SLUG = OracleNames.FILES
