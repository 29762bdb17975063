"""Finite-sample confidence intervals that combine real and simulated evaluation scores."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ConfidenceInterval,
    Method,
    PairedDataset,
    SimDataset,
    SummaryStats,
    load_paired_dataset,
    load_sim_dataset,
    resample_paired,
    resample_sim,
    summary_stats,
    write_paired_dataset,
    write_sim_dataset,
)
from .wsr import WsrConfig, wsr_interval  # noqa: E402
from .ppi import (  # noqa: E402
    RiskSplit,
    build_uniform_transform,
    classical_interval,
    optimize_risk_split,
    rectifier_interval,
    suresim_interval,
    suresim_ub_interval,
    two_stage_interval,
    two_stage_ub_interval,
)
from .control_variates import cv_interval, cv_split_interval  # noqa: E402
from .artificial import BankSpec, LabeledBank, generate_bank, partition_bank  # noqa: E402

__all__ = [
    "BankSpec",
    "ConfidenceInterval",
    "LabeledBank",
    "Method",
    "PairedDataset",
    "RiskSplit",
    "SimDataset",
    "SummaryStats",
    "WsrConfig",
    "build_uniform_transform",
    "classical_interval",
    "cv_interval",
    "cv_split_interval",
    "generate_bank",
    "load_paired_dataset",
    "load_sim_dataset",
    "optimize_risk_split",
    "partition_bank",
    "rectifier_interval",
    "resample_paired",
    "resample_sim",
    "summary_stats",
    "suresim_interval",
    "suresim_ub_interval",
    "two_stage_interval",
    "two_stage_ub_interval",
    "wsr_interval",
    "write_paired_dataset",
    "write_sim_dataset",
]
