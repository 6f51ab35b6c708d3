"""
Records for the 1-D density p(x) ~ exp(-a x^2 + b x - c |x|).

These are created once per component update, so they are light NamedTuples
rather than validated pydantic models; expquad_sampler.prepare() does the
validation.
"""

from typing import TYPE_CHECKING, Literal, NamedTuple

if TYPE_CHECKING:
    from core.special_functions import LogSigned

SignCase = Literal["++", "-+", "+-", "laplace"]


class ExpQuadParams(NamedTuple):
    """Coefficients (a, b, c) of exp(-a x^2 + b x - c |x|)."""
    a: float
    b: float
    c: float


class NormalizationTerms(NamedTuple):
    """Everything cdf / cdf_inv need, computed once per (a, b, c).

    For each half line h (left: x <= 0, right: x > 0) with offset
    t = sqrt(a) |y| the log of the mass beyond y is

        alpha_h >= 0:  -t (t + 2 alpha_h) + log erfcx(alpha_h + t) - scale_h
        alpha_h <  0:  log erfc(alpha_h + t) - scale_h

    In the "laplace" case (a = 0) alpha_plus and alpha_minus hold the left
    and right exponential rates c + b and c - b instead.
    """
    a: float
    b: float
    c: float
    sqrt_a: float
    alpha_plus: float
    alpha_minus: float
    log_chi: float
    sign_case: SignCase
    log_gamma: "LogSigned"
    log_norm: float
    left_scale: float
    right_scale: float
    log_mass_left: float
    log_mass_right: float
