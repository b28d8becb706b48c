from __future__ import annotations

import abc
import math
import threading
from typing import Dict, Union

from anda_io.bops import PrecisionCombination
from anda_io.errors import AndaError, NonFiniteScore, OracleFailure
from anda_io.names import FP16_SENTINEL

Request = Union[PrecisionCombination, str]


class Oracle(abc.ABC):
    """
    Accuracy oracle: higher scores are better, FP16_SENTINEL asks for the
    unquantized baseline. Must be deterministic per combination.
    """

    CLI_EXPOSED = True

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if not hasattr(cls, "ORACLE_SLUG"):
            raise TypeError(
                f"Class {cls.__name__} lacks required class variable 'ORACLE_SLUG'"
            )

    @abc.abstractmethod
    def evaluate(self, request: Request) -> float:
        raise NotImplementedError()

    @classmethod
    @abc.abstractmethod
    def from_cli(cls, value: str, args: dict) -> "Oracle":
        """
        Build the oracle from the part of `--oracle` after the slug.
        """
        raise NotImplementedError()

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class CachedOracle(Oracle):
    ORACLE_SLUG = "cached"
    CLI_EXPOSED = False

    def __init__(self, inner: Oracle):
        self.inner = inner
        self.cache: Dict[Request, float] = {}
        self.calls = 0
        self._lock = threading.Lock()

    @classmethod
    def wrap(cls, oracle: Oracle) -> "CachedOracle":
        return oracle if isinstance(oracle, CachedOracle) else cls(oracle)

    @classmethod
    def from_cli(cls, value, args):
        raise NotImplementedError("CachedOracle wraps another oracle")

    def evaluate(self, request: Request) -> float:
        with self._lock:
            if request in self.cache:
                return self.cache[request]
        try:
            score = float(self.inner.evaluate(request))
        except OracleFailure as e:
            if e.combination is None:
                e.combination = request
            raise
        except AndaError:
            raise
        except Exception as e:
            raise OracleFailure(f"oracle failed on {request}", cause=e, combination=request)
        if not math.isfinite(score):
            raise NonFiniteScore(f"oracle returned {score}", combination=request)
        with self._lock:
            if request not in self.cache:
                self.calls += 1
                self.cache[request] = score
            return self.cache[request]

    def fp_score(self) -> float:
        return self.evaluate(FP16_SENTINEL)

    def close(self):
        self.inner.close()
