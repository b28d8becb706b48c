from anda_io.names import PlatformNames
from anda_io.platforms.platform_cls import Platform

# 14-bit FIGNA mantissa with the sign bit counted
FIGNA_MANTISSA = 13


class FIGNAPlatform(Platform):
    """
    Bit-parallel block-FP x INT4 units at a fixed mantissa length. Throughput
    scales as mantissa/16 of the FPFP array; activations stay FP16 in memory and
    are converted per use.
    """

    PLATFORM_SLUG = PlatformNames.FIGNA

    def __init__(self, arch, energy, mantissa_len: int = FIGNA_MANTISSA):
        super().__init__(arch, energy)
        self.mantissa_len = mantissa_len

    @property
    def label(self) -> str:
        if self.mantissa_len == FIGNA_MANTISSA:
            return "FIGNA"
        return f"FIGNA-M{self.mantissa_len}"

    def compute_cycles(self, T, N, K, m):
        return self.baseline_cycles(T, N, K) * self.mantissa_len / 16

    def compute_energy(self, T, N, K, m, cycles):
        mac = T * N * K * self.energy.figna_pj_per_mac_bit * self.mantissa_len
        return mac + self.conversion_events(T, N, K) * self.energy.figna_conversion_pj_per_group
