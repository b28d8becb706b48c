from anda_io.names import PlatformNames
from anda_io.platforms.platform_cls import Platform


class FPINTPlatform(Platform):
    """Dedicated FP16 x INT4 units; same throughput as FPFP, cheaper MACs."""

    PLATFORM_SLUG = PlatformNames.FPINT

    @property
    def label(self) -> str:
        return "FPINT"

    def compute_cycles(self, T, N, K, m):
        return self.baseline_cycles(T, N, K)

    def compute_energy(self, T, N, K, m, cycles):
        return T * N * K * self.energy.fpint_pj_per_mac
