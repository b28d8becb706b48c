"""
Built-in proxy for accuracy: how closely the Anda data path tracks the FP16 one.

Each module's GeMM is run once on the FP16 reference path and once with its
activations encoded at the module's mantissa length. The per-module NRMSE values
are averaged with weights K*N (the module's MACs per token), and the score is
1 / (1 + mean). The FP16 sentinel scores exactly 1.0.
"""
from __future__ import annotations

from typing import Dict, Optional, Union

import numpy as np

from anda_io.apu import gemm_anda, gemm_fp16_reference
from anda_io.bops import PrecisionCombination
from anda_io.constants import DEFAULT_GROUP_SIZE
from anda_io.names import FP16_SENTINEL
from anda_io.numfmt import AndaParams, encode_tensor, error_stats
from anda_io.workload.synthetic import CalibrationWorkload


def reference_outputs(
    workload: CalibrationWorkload, group_size: int = DEFAULT_GROUP_SIZE
) -> Dict[str, np.ndarray]:
    return {
        mod.module_type: gemm_fp16_reference(mod.activations, mod.weights, group_size)
        for mod in workload.modules
    }


def module_nrmse(
    workload: CalibrationWorkload,
    c: PrecisionCombination,
    references: Optional[Dict[str, np.ndarray]] = None,
    group_size: int = DEFAULT_GROUP_SIZE,
) -> Dict[str, float]:
    references = references if references is not None else reference_outputs(workload, group_size)
    errors = {}
    for mod in workload.modules:
        params = AndaParams(group_size=group_size, mantissa_len=c[mod.module_type])
        out = gemm_anda(encode_tensor(mod.activations, params), mod.weights)
        errors[mod.module_type] = error_stats(references[mod.module_type], out)["nrmse"]
    return errors


def aggregate_nrmse(errors: Dict[str, float], macs: Dict[str, int]) -> float:
    total = sum(macs[name] for name in errors)
    if total == 0:
        return 0.0
    return float(sum(errors[name] * macs[name] for name in errors) / total)


def proxy_accuracy(
    workload: CalibrationWorkload,
    c: Union[PrecisionCombination, str],
    references: Optional[Dict[str, np.ndarray]] = None,
    group_size: int = DEFAULT_GROUP_SIZE,
) -> float:
    if c == FP16_SENTINEL:
        return 1.0
    errors = module_nrmse(workload, c, references, group_size)
    return 1.0 / (1.0 + aggregate_nrmse(errors, workload.macs_per_token()))
