from anda_io.names import PlatformNames
from anda_io.platforms.platform_cls import Platform, ceil_div


class IFPUPlatform(Platform):
    """
    Bit-serial over the INT4 weight bits: each PE spends ifpu_cycles_per_group
    cycles per ifpu_k_per_pe slice of K. Activations are stored FP16 and converted
    to an extended-mantissa block format on the fly.
    """

    PLATFORM_SLUG = PlatformNames.IFPU

    @property
    def label(self) -> str:
        return "iFPU"

    def compute_cycles(self, T, N, K, m):
        return (
            self.strip_count(T)
            * self.column_strips(N)
            * ceil_div(K, self.arch.ifpu_k_per_pe)
            * self.arch.ifpu_cycles_per_group
        )

    def compute_energy(self, T, N, K, m, cycles):
        mac = T * N * K * self.energy.ifpu_pj_per_mac
        return mac + self.conversion_events(T, N, K) * self.energy.ifpu_conversion_pj_per_group
