from __future__ import annotations

from typing import Dict, Optional

import numpy as np

from anda_io.constants import DEFAULT_GROUP_SIZE
from anda_io.errors import UsageError
from anda_io.names import OracleNames
from anda_io.oracles.oracle_cls import Oracle, Request
from anda_io.util import expand_shorthand_path, spinner
from anda_io.workload.proxy import proxy_accuracy, reference_outputs
from anda_io.workload.synthetic import CalibrationWorkload, load_workload


class ProxyOracle(Oracle):
    """
    Scores a combination by the NRMSE of the Anda GeMMs against the FP16 path
    on a calibration workload.
    """

    ORACLE_SLUG = OracleNames.PROXY

    def __init__(self, workload: CalibrationWorkload, group_size: int = DEFAULT_GROUP_SIZE):
        self.workload = workload
        self.group_size = group_size
        self._references: Optional[Dict[str, np.ndarray]] = None

    @classmethod
    def from_cli(cls, value: str, args: dict) -> "ProxyOracle":
        directory = value or args.get("workload")
        if not directory:
            raise UsageError("the proxy oracle needs --workload <dir> (or proxy:<dir>)")
        with spinner(f"Loading workload from {directory}"):
            workload = load_workload(expand_shorthand_path(directory))
        return cls(workload, group_size=args.get("gs") or DEFAULT_GROUP_SIZE)

    @property
    def references(self) -> Dict[str, np.ndarray]:
        if self._references is None:
            with spinner("Computing FP16 reference outputs"):
                self._references = reference_outputs(self.workload, self.group_size)
        return self._references

    def evaluate(self, request: Request) -> float:
        return proxy_accuracy(self.workload, request, self.references, self.group_size)
