"""
Analysis package - acf, lags, test functions, burn-in and CM estimates.
"""

from .diagnostics import (
    autocorrelation,
    temporal_acf,
    interpolate_temporal,
    lag_below,
    lag_table,
    leading_eigvec,
    coordinate_test_function,
    project,
    cm_estimate,
    cm_at_times,
    cm_standard_error,
    cm_agreement,
    display_range,
    plateau_step,
    burn_in_curve,
)

__all__ = [
    # Autocorrelation
    "autocorrelation",
    "temporal_acf",
    "interpolate_temporal",
    "lag_below",
    "lag_table",
    # Test functions
    "leading_eigvec",
    "coordinate_test_function",
    "project",
    # Estimates
    "cm_estimate",
    "cm_at_times",
    "cm_standard_error",
    "cm_agreement",
    "display_range",
    # Burn-in
    "plateau_step",
    "burn_in_curve",
]
