# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 wffr contributors

"""Bayesian wavelet-space function-on-function regression."""

from wffr._core import (  # noqa: F401
    BFDRResult,
    DlmFit,
    FunctionalDataset,
    McmcConfig,
    NumericalError,
    PosteriorDraws,
    PreprocessReport,
    SimBaSResult,
    ValidationError,
    WaveletOperator,
    WaveletSpec,
    __version__,
    bfdr_flag,
    build_operator,
    dwt_rows,
    fit_dlm_surface,
    fit_ffr,
    generate_dataset,
    idwt_rows,
    pointwise_probability,
    preprocess,
    project_surface,
    run_replicates,
    simbas,
)

__all__ = [
    "BFDRResult",
    "DlmFit",
    "FunctionalDataset",
    "McmcConfig",
    "NumericalError",
    "PosteriorDraws",
    "PreprocessReport",
    "SimBaSResult",
    "ValidationError",
    "WaveletOperator",
    "WaveletSpec",
    "__version__",
    "bfdr_flag",
    "build_operator",
    "dwt_rows",
    "fit_dlm_surface",
    "fit_ffr",
    "generate_dataset",
    "idwt_rows",
    "pointwise_probability",
    "preprocess",
    "project_surface",
    "run_replicates",
    "simbas",
]
