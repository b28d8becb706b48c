import os
import shlex
import sys

import numpy as np
import pytest

from anda_io.bops import PrecisionCombination
from anda_io.oracles.threshold import FunctionOracle

SCRIPTS_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "anda_io", "scripts")
ECHO_ORACLE = os.path.abspath(os.path.join(SCRIPTS_DIR, "echo_oracle.py"))


def random_half_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniformly random finite binary16 bit patterns (zeros and subnormals included)."""
    bits = rng.integers(0, 1 << 16, size=n, dtype=np.uint32).astype(np.uint16)
    exp = (bits >> 10) & 0x1F
    # fold NaN/Inf exponents back into the normal range
    return np.where(exp == 0x1F, bits & ~np.uint16(0x7C00) | np.uint16(0x7800), bits).astype(np.uint16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def echo_command():
    def build(*extra: str) -> str:
        return shlex.join([sys.executable, ECHO_ORACLE, *extra])

    return build


def upward_closed_oracle(minimums: PrecisionCombination) -> FunctionOracle:
    return FunctionOracle(lambda c: 1.0 if all(m >= lo for m, lo in zip(c, minimums)) else 0.0)
