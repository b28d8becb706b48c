from anda_io.bpc import BpcConfig, compression_cycles
from anda_io.constants import MAX_LANES_PER_WORD
from anda_io.errors import TileExceedsBuffer
from anda_io.layout import storage_bits
from anda_io.names import PlatformNames
from anda_io.platforms.platform_cls import Platform, ceil_div


class AndaPlatform(Platform):
    """
    16x16 APUs, each folding one 64-lane bit-plane per cycle, so a tile of
    64 K-elements costs M cycles. Activations and outputs live in memory in the
    bit-plane layout; outputs pass through the BPC at the consumer's M.
    """

    PLATFORM_SLUG = PlatformNames.ANDA
    STORES_ANDA = True

    @property
    def label(self) -> str:
        return "Anda"

    def compute_cycles(self, T, N, K, m):
        return (
            self.strip_count(T)
            * self.column_strips(N)
            * ceil_div(K, self.arch.adder_width)
            * m
        )

    def compute_energy(self, T, N, K, m, cycles):
        apus = self.arch.mxu_rows * self.arch.mxu_cols
        return cycles * apus * self.energy.mxu_pj_per_apu_cycle

    def activation_bits(self, T, K, m):
        return storage_bits(m, self.arch.adder_width, T * ceil_div(K, self.arch.adder_width))

    def output_bits(self, T, N, m_out):
        if m_out is None:
            return super().output_bits(T, N, m_out)
        return storage_bits(m_out, self.arch.adder_width, T * ceil_div(N, self.arch.adder_width))

    def bpc_config(self) -> BpcConfig:
        return BpcConfig(
            lanes=self.arch.bpc_lanes,
            lane_width=min(self.arch.adder_width, MAX_LANES_PER_WORD),
            latency=self.arch.bpc_latency_cycles,
        )

    def output_compression_cycles(self, T, N, m_out):
        if m_out is None:
            return 0
        return compression_cycles(T * ceil_div(N, self.arch.adder_width), m_out, self.bpc_config())

    def check_strip(self, K, m):
        groups = self.arch.mxu_rows * ceil_div(K, self.arch.adder_width)
        mantissa_bits = groups * self.arch.adder_width * (m + 1)
        exponent_bits = groups * 8
        if mantissa_bits > self.arch.act_mantissa_buffer_bits or exponent_bits > self.arch.act_exponent_buffer_bits:
            raise TileExceedsBuffer(
                f"Anda: a {self.arch.mxu_rows}-row activation strip at K={K}, M={m} needs "
                f"{mantissa_bits} mantissa / {exponent_bits} exponent bits, buffers hold "
                f"{self.arch.act_mantissa_buffer_bits} / {self.arch.act_exponent_buffer_bits}"
            )
