"""Calibration workloads, tensor files and accuracy oracles."""
