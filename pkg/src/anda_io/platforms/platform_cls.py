from __future__ import annotations

import abc

from anda_io.constants import FP16_EQUIV_MANTISSA, WEIGHT_BITS
from anda_io.errors import TileExceedsBuffer
from anda_io.meta_types import ArchConfig, EnergyParams


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


class Platform(abc.ABC):
    """
    One accelerator under the output-stationary GeMM cost model. `m` is the
    activation mantissa length of the module being run; platforms that keep FP16
    activations ignore it.
    """

    STORES_ANDA = False

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if not hasattr(cls, "PLATFORM_SLUG"):
            raise TypeError(
                f"Class {cls.__name__} lacks required class variable 'PLATFORM_SLUG'"
            )

    def __init__(self, arch: ArchConfig, energy: EnergyParams):
        self.arch = arch
        self.energy = energy

    @property
    def label(self) -> str:
        return self.PLATFORM_SLUG.upper()

    @abc.abstractmethod
    def compute_cycles(self, T: int, N: int, K: int, m: int) -> float:
        raise NotImplementedError()

    @abc.abstractmethod
    def compute_energy(self, T: int, N: int, K: int, m: int, cycles: float) -> float:
        """
        Compute energy in pJ.
        """
        raise NotImplementedError()

    def strip_count(self, T: int) -> int:
        return ceil_div(T, self.arch.mxu_rows)

    def column_strips(self, N: int) -> int:
        return ceil_div(N, self.arch.mxu_cols)

    def activation_bits(self, T: int, K: int, m: int) -> int:
        return FP16_EQUIV_MANTISSA * T * K

    def output_bits(self, T: int, N: int, m_out) -> int:
        return FP16_EQUIV_MANTISSA * T * N

    def output_compression_cycles(self, T: int, N: int, m_out) -> int:
        return 0

    def weight_bits(self, K: int, N: int) -> int:
        groups = ceil_div(K, self.arch.weight_group_size)
        return K * N * WEIGHT_BITS + groups * N * self.arch.scale_bits

    def check_strip(self, K: int, m: int):
        """
        A strip of mxu_rows activation rows at this K must fit the activation buffer.
        """
        need = self.arch.mxu_rows * FP16_EQUIV_MANTISSA * K
        have = self.arch.act_mantissa_buffer_bits + self.arch.act_exponent_buffer_bits
        if need > have:
            raise TileExceedsBuffer(
                f"{self.label}: a {self.arch.mxu_rows}-row activation strip at K={K} needs {need} bits, buffer holds {have}"
            )

    def baseline_cycles(self, T: int, N: int, K: int) -> float:
        return T * N * K / self.arch.peak_macs_per_cycle

    def conversion_events(self, T: int, N: int, K: int) -> int:
        # FP16 activation groups are converted again for every column strip they meet
        return T * ceil_div(K, self.arch.adder_width) * self.column_strips(N)
