from __future__ import annotations

from typing import Callable, Union

from anda_io.bops import PrecisionCombination
from anda_io.errors import InvalidParams
from anda_io.names import FP16_SENTINEL, OracleNames
from anda_io.oracles.oracle_cls import Oracle, Request


class ThresholdOracle(Oracle):
    """
    Scores 1.0 when every component reaches its per-module minimum, else 0.0.
    Its feasible set is upward-closed.
    """

    ORACLE_SLUG = OracleNames.THRESHOLD

    def __init__(self, minimums: Union[int, PrecisionCombination], fp_score: float = 1.0):
        if isinstance(minimums, int):
            minimums = PrecisionCombination.uniform(minimums)
        self.minimums = minimums
        self.fp_score = fp_score

    @classmethod
    def from_cli(cls, value: str, args: dict) -> "ThresholdOracle":
        if not value:
            raise InvalidParams("threshold oracle needs a minimum, e.g. threshold:6 or threshold:7,7,6,5")
        parts = value.split(",")
        if len(parts) == 1:
            return cls(int(parts[0]))
        return cls(PrecisionCombination.parse(value))

    def evaluate(self, request: Request) -> float:
        if request == FP16_SENTINEL:
            return self.fp_score
        feasible = all(m >= lo for m, lo in zip(request, self.minimums))
        return 1.0 if feasible else 0.0


class FunctionOracle(Oracle):
    ORACLE_SLUG = OracleNames.FUNCTION
    CLI_EXPOSED = False

    def __init__(self, fn: Callable[[PrecisionCombination], float], fp_score: float = 1.0):
        self.fn = fn
        self.fp_score = fp_score

    @classmethod
    def from_cli(cls, value, args):
        raise NotImplementedError("FunctionOracle wraps a Python callable")

    def evaluate(self, request: Request) -> float:
        if request == FP16_SENTINEL:
            return self.fp_score
        return self.fn(request)
