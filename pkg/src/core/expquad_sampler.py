"""
Exact sampling from p(x) ~ exp(-a x^2 + b x - c |x|) by cdf inversion.

With alpha_+ = (b + c) / (2 sqrt a), alpha_- = (c - b) / (2 sqrt a) and
chi = sqrt(pi / a) / 2 the masses of the two half lines are
chi * erfcx(alpha_+) (left) and chi * erfcx(alpha_-) (right). At most one
alpha is negative because c >= 0, which gives three sign cases:

    ++  gamma = erfcx(alpha_+) + erfcx(alpha_-)
    -+  gamma = erfcx(-alpha_+) - erfcx(alpha_-)
    +-  gamma = erfcx(alpha_+) - erfcx(-alpha_-)

All formulas are evaluated in log domain, whatever the magnitude of the
arguments. The two mixed cases are mirror images (b -> -b, y -> -y) and
share one per-side code path. A fourth case, "laplace", covers a = 0 (a
component the data do not see), where both half lines are exponential.
"""

import logging
import math
from typing import Union

import numpy as np

from core.errors import CancellationError, DomainError, NumericalError, require_finite
from core.special_functions import (
    LOG2,
    LogSigned,
    erfcinv_log,
    log_add,
    log_erfc,
    log_erfcx,
)
from models.params import ExpQuadParams, NormalizationTerms

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)

LOG_HALF = -LOG2
SQRT_PI = math.sqrt(math.pi)
NEWTON_STEPS = 2

_SMALLEST_R = math.nextafter(0.0, 1.0)
_LARGEST_R = math.nextafter(1.0, 0.0)


def prepare(params: Union[ExpQuadParams, tuple]) -> NormalizationTerms:
    """Validate (a, b, c) and cache the normalization terms.

    a = 0 is allowed when c > |b|: the density is then an asymmetric Laplace
    with rate c + b on the left and c - b on the right.

    Raises:
        DomainError: a < 0, c < 0, a = 0 with c <= |b|, or a non-finite coefficient.
        NumericalError: a cached term overflowed.
    """
    a, b, c = (float(v) for v in params)
    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(c)):
        raise DomainError("ExpQuad coefficients must be finite", {"a": a, "b": b, "c": c})
    if a < 0.0 or c < 0.0:
        raise DomainError("ExpQuad needs a >= 0 and c >= 0", {"a": a, "b": b, "c": c})
    if a == 0.0:
        return _prepare_laplace(b, c)

    sqrt_a = math.sqrt(a)
    alpha_plus = (b + c) / (2.0 * sqrt_a)
    alpha_minus = (c - b) / (2.0 * sqrt_a)
    log_chi = 0.5 * (math.log(math.pi) - math.log(a)) - LOG2

    if alpha_plus < 0.0:
        sign_case = "-+"
        gamma = _difference(alpha_neg=alpha_plus, alpha_pos=alpha_minus).negate()
    elif alpha_minus < 0.0:
        sign_case = "+-"
        gamma = _difference(alpha_neg=alpha_minus, alpha_pos=alpha_plus)
    else:
        sign_case = "++"
        gamma = log_add(
            LogSigned(1, log_erfcx(alpha_plus)),
            LogSigned(1, log_erfcx(alpha_minus))
        )

    if sign_case == "++":
        log_nc = gamma.log_abs
        left_scale = right_scale = log_nc
    else:
        alpha_neg = alpha_plus if sign_case == "-+" else alpha_minus
        # erfcx(alpha_pos) - erfcx(-alpha_neg), whichever case we are in
        diff = gamma if sign_case == "+-" else gamma.negate()
        offset = log_add(
            LogSigned(1, LOG2),
            LogSigned(diff.sign, diff.log_abs - alpha_neg * alpha_neg)
        ).log_abs
        log_nc = alpha_neg * alpha_neg + offset
        if sign_case == "-+":
            left_scale, right_scale = offset, log_nc
        else:
            left_scale, right_scale = log_nc, offset

    log_norm = log_chi + log_nc
    log_mass_left = _log_tail(alpha_plus, left_scale, 0.0)
    log_mass_right = _log_tail(alpha_minus, right_scale, 0.0)

    for name, value in (
        ("log_norm", log_norm),
        ("left_scale", left_scale),
        ("right_scale", right_scale),
        ("log_mass_left", log_mass_left),
        ("log_mass_right", log_mass_right),
    ):
        if not math.isfinite(value):
            raise NumericalError(
                f"Non-finite {name} while preparing ExpQuad terms",
                {"a": a, "b": b, "c": c, name: value}
            )

    return NormalizationTerms(
        a=a, b=b, c=c,
        sqrt_a=sqrt_a,
        alpha_plus=alpha_plus,
        alpha_minus=alpha_minus,
        log_chi=log_chi,
        sign_case=sign_case,
        log_gamma=gamma,
        log_norm=log_norm,
        left_scale=left_scale,
        right_scale=right_scale,
        log_mass_left=log_mass_left,
        log_mass_right=log_mass_right,
    )


def _prepare_laplace(b: float, c: float) -> NormalizationTerms:
    """Terms for a = 0: p(x) ~ exp(b x - c |x|), proper only for c > |b|."""
    if not c > abs(b):
        raise DomainError("ExpQuad with a = 0 needs c > |b|", {"a": 0.0, "b": b, "c": c})
    rate_left = c + b
    rate_right = c - b
    log_two_c = LOG2 + math.log(c)
    log_norm = log_two_c - math.log(rate_left) - math.log(rate_right)
    return NormalizationTerms(
        a=0.0, b=b, c=c,
        sqrt_a=0.0,
        alpha_plus=rate_left,
        alpha_minus=rate_right,
        log_chi=0.0,
        sign_case="laplace",
        log_gamma=LogSigned(1, log_norm),
        log_norm=log_norm,
        left_scale=0.0,
        right_scale=0.0,
        log_mass_left=math.log(rate_right) - log_two_c,
        log_mass_right=math.log(rate_left) - log_two_c,
    )


def _laplace_cdf(terms: NormalizationTerms, y: float) -> float:
    if y <= 0.0:
        return math.exp(terms.log_mass_left + terms.alpha_plus * y)
    return -math.expm1(terms.log_mass_right - terms.alpha_minus * y)


def _laplace_cdf_inv(terms: NormalizationTerms, log_r: float, log_one_minus_r: float) -> float:
    if log_r <= terms.log_mass_left:
        return (log_r - terms.log_mass_left) / terms.alpha_plus
    return max((terms.log_mass_right - log_one_minus_r) / terms.alpha_minus, 0.0)


def _difference(alpha_neg: float, alpha_pos: float) -> LogSigned:
    """erfcx(alpha_pos) - erfcx(-alpha_neg); both arguments are >= 0."""
    try:
        return log_add(
            LogSigned(1, log_erfcx(alpha_pos)),
            LogSigned(-1, log_erfcx(-alpha_neg))
        )
    except CancellationError:
        return LogSigned.from_float(_erfcx(alpha_pos) - _erfcx(-alpha_neg))


def _erfcx(x: float) -> float:
    return math.exp(log_erfcx(x))


def _log_tail(alpha: float, scale: float, t: float) -> float:
    """Log of the normalized mass beyond offset t >= 0 on one half line."""
    if alpha >= 0.0:
        return -t * (t + 2.0 * alpha) + log_erfcx(alpha + t) - scale
    return log_erfc(alpha + t) - scale


def _inverse_tail(alpha: float, scale: float, log_q: float, log_mass: float) -> float:
    """Offset t >= 0 whose tail mass is exp(log_q)."""
    log_q = min(log_q, log_mass)
    if alpha < 0.0:
        z = erfcinv_log(min(log_q + scale, LOG2))
        return max(z - alpha, 0.0)

    z = erfcinv_log(min(log_q + scale - alpha * alpha, LOG2))
    t = max(z - alpha, 0.0)
    # z = alpha + t loses the low digits of t when alpha is large; refine in t
    for _ in range(NEWTON_STEPS):
        g = _log_tail(alpha, scale, t) - log_q
        slope = -2.0 / (SQRT_PI * _erfcx(alpha + t))
        t = max(t - g / slope, 0.0)
    return t


def log_density(terms: NormalizationTerms, y: float) -> float:
    """Normalized log density at y."""
    return -terms.a * y * y + terms.b * y - terms.c * abs(y) - terms.log_norm


def cdf(terms: NormalizationTerms, y: float) -> float:
    """P(X <= y). y = 0 belongs to the left branch."""
    y = require_finite(y, "y")
    if terms.sign_case == "laplace":
        value = _laplace_cdf(terms, y)
    elif y <= 0.0:
        value = math.exp(_log_tail(terms.alpha_plus, terms.left_scale, -terms.sqrt_a * y))
    else:
        value = -math.expm1(_log_tail(terms.alpha_minus, terms.right_scale, terms.sqrt_a * y))
    if value != value:
        raise NumericalError("cdf evaluated to NaN", {"a": terms.a, "b": terms.b, "c": terms.c, "y": y})
    return min(max(value, 0.0), 1.0)


def cdf_inv(terms: NormalizationTerms, r: float) -> float:
    """Quantile function on (0, 1)."""
    r = require_finite(r, "r")
    if not 0.0 < r < 1.0:
        raise DomainError("cdf_inv needs r in (0, 1)", {"r": r})

    log_r = math.log(r)
    log_one_minus_r = math.log1p(-r)
    if terms.sign_case == "laplace":
        return _laplace_cdf_inv(terms, log_r, log_one_minus_r)
    if terms.log_mass_left >= LOG_HALF:
        go_right = log_one_minus_r < terms.log_mass_right
    else:
        go_right = not (log_r < terms.log_mass_left)

    if go_right:
        t = _inverse_tail(terms.alpha_minus, terms.right_scale, log_one_minus_r, terms.log_mass_right)
        return t / terms.sqrt_a
    t = _inverse_tail(terms.alpha_plus, terms.left_scale, log_r, terms.log_mass_left)
    return -t / terms.sqrt_a


def sample(terms: NormalizationTerms, rng: np.random.Generator) -> float:
    """One exact draw."""
    r = rng.random()
    while r == 0.0:
        r = rng.random()
    return cdf_inv(terms, r)


def sample_overrelaxed(
    terms: NormalizationTerms,
    current: float,
    n_o: int,
    rng: np.random.Generator
) -> float:
    """Ordered overrelaxation of `current` with n_o auxiliary draws.

    In probability space: r = F(current) has rank K ~ Binomial(n_o, r) among
    n_o fresh uniforms; the uniform with mirrored rank n_o - K is an order
    statistic of the uniforms on one side of r, drawn directly from a Beta.
    """
    if isinstance(n_o, bool) or int(n_o) != n_o or n_o < 1 or n_o % 2 == 0:
        raise DomainError("n_o must be an odd positive integer", {"n_o": n_o})
    n_o = int(n_o)
    current = require_finite(current, "current")

    r = cdf(terms, current)
    below = int(rng.binomial(n_o, r))
    target = n_o - below
    if target == below:
        return current

    if target < below:
        r_new = r * rng.beta(target + 1, below - target)
    else:
        r_new = r + (1.0 - r) * rng.beta(target - below, n_o - target + 1)
    r_new = min(max(r_new, _SMALLEST_R), _LARGEST_R)
    return cdf_inv(terms, r_new)
