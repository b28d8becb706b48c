from anda_io.names import PlatformNames
from anda_io.platforms.platform_cls import Platform


class FPFPPlatform(Platform):
    """FP16 activations times dequantized FP16 weights on FP multipliers."""

    PLATFORM_SLUG = PlatformNames.FPFP

    @property
    def label(self) -> str:
        return "FPFP"

    def compute_cycles(self, T, N, K, m):
        return self.baseline_cycles(T, N, K)

    def compute_energy(self, T, N, K, m, cycles):
        return T * N * K * self.energy.fpfp_pj_per_mac
