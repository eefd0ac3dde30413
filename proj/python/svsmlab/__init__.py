# Copyright 2026 The svsmlab Authors
# SPDX-License-Identifier: Apache-2.0
"""Python access to the svsmlab core: FLOP accounting, scaling-law fits,
training runs and the synthetic scene generator."""

from ._core import (
    ConfigError,
    DimensionError,
    DomainError,
    Error,
    FormatError,
    NumericalError,
    UsageError,
    analyze_scaling,
    budget_grid,
    decode_flops,
    effective_batch_report,
    fit_power_law,
    forward_flops,
    grad_check,
    image_mse,
    model_preset,
    model_presets,
    param_count,
    pareto_frontier,
    psnr_from_mse,
    read_run_log,
    registered_grad_checks,
    render_checkpoint,
    sample_episode,
    ssim,
    train,
    train_flops,
    validate_experiment_config,
    write_run_log,
)

__version__ = "0.1.0"
