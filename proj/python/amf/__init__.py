"""Python bindings for the adaptive multi-factor toolkit."""

from ._amf import (
    AmfError,
    GibsSelection,
    LassoFit,
    OlsFit,
    adjust_pvalues,
    cumulative_capital,
    gibs_synthetic,
    intercept_test,
    intercept_test_two_step,
    lambda_max,
    lasso_fit,
    minimax_cluster,
    ols,
    soft_threshold,
    welch_test,
)

__all__ = [
    "AmfError",
    "GibsSelection",
    "LassoFit",
    "OlsFit",
    "adjust_pvalues",
    "cumulative_capital",
    "gibs_synthetic",
    "intercept_test",
    "intercept_test_two_step",
    "lambda_max",
    "lasso_fit",
    "minimax_cluster",
    "ols",
    "soft_threshold",
    "welch_test",
]
