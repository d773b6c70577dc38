"""Moment-inequality tests for monotone equilibrium strategies."""

from ._monotest import (
    NumericError,
    SchemaError,
    TestResult,
    UsageError,
    draw_bids_quantile,
    estimate_nu,
    ols_fit,
    rejection_rate,
    run_test,
    run_test_semi,
    run_test_x,
    xi_analytic,
    xi_curve,
)

__all__ = [
    "NumericError",
    "SchemaError",
    "TestResult",
    "UsageError",
    "draw_bids_quantile",
    "estimate_nu",
    "ols_fit",
    "rejection_rate",
    "run_test",
    "run_test_semi",
    "run_test_x",
    "xi_analytic",
    "xi_curve",
]
