"""
Complementary error function family and log-domain helpers.

erfc / erfcx / erfcinv wrap scipy.special (Cephes and the Faddeeva package);
the wrappers add domain checks so that a bad argument fails loudly instead of
returning NaN deep inside a chain. The log-domain helpers follow the identity

    log(x + y) = log(x) + log(1 + sign(y) exp(log|y| - log|x|))

and keep quantities such as exp(alpha**2) representable for |alpha| up to 1e4.
"""

import logging
import math
from typing import NamedTuple

from scipy import special

from core.errors import CancellationError, DomainError, require_finite

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)
LOG_PI = math.log(math.pi)

# Below this log-argument erfcinv(exp(w)) is evaluated by its asymptotic series.
ASYMPTOTIC_SWITCH = -680.0

# log_add refuses results smaller than this fraction of the larger input.
CANCELLATION_TOL = 1e-15


class LogSigned(NamedTuple):
    """sign * exp(log_abs). Zero is (+1, -inf)."""
    sign: int
    log_abs: float

    @classmethod
    def zero(cls) -> "LogSigned":
        return cls(1, -math.inf)

    @classmethod
    def from_float(cls, value: float) -> "LogSigned":
        if value == 0.0:
            return cls.zero()
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    def to_float(self) -> float:
        return self.sign * math.exp(self.log_abs)

    def is_zero(self) -> bool:
        return self.log_abs == -math.inf

    def negate(self) -> "LogSigned":
        if self.is_zero():
            return self
        return LogSigned(-self.sign, self.log_abs)


def erfc(x: float) -> float:
    """Complementary error function, value in (0, 2)."""
    return float(special.erfc(require_finite(x, "x")))


def erfcx(x: float) -> float:
    """Scaled complementary error function exp(x**2) * erfc(x)."""
    return float(special.erfcx(require_finite(x, "x")))


def erfcinv(r: float) -> float:
    """Inverse of erfc on (0, 2)."""
    r = require_finite(r, "r")
    if not 0.0 < r < 2.0:
        raise DomainError("erfcinv argument must lie in (0, 2)", {"r": r})
    return float(special.erfcinv(r))


def log_erfcx(x: float) -> float:
    """log(erfcx(x)) for any finite x.

    Negative arguments go through erfcx(x) = 2 exp(x**2) - erfcx(-x), written
    as x**2 + log 2 + log1p(-erfcx(-x) exp(-x**2) / 2).
    """
    if x >= 0.0:
        return math.log(special.erfcx(x))
    return x * x + LOG2 + math.log1p(-0.5 * special.erfcx(-x) * math.exp(-x * x))


def log_erfc(x: float) -> float:
    """log(erfc(x)) for any finite x, without underflow for large x."""
    if x >= 0.0:
        return math.log(special.erfcx(x)) - x * x
    return math.log(special.erfc(x))


def erfcinv_log(w: float) -> float:
    """erfcinv(exp(w)) for w <= log 2.

    For w < ASYMPTOTIC_SWITCH exp(w) is no longer a normal double, so the
    asymptotic expansion of erfcinv at 0 (DLMF 7.17.10) is used instead.
    """
    w = require_finite(w, "w")
    if w > LOG2:
        raise DomainError("erfcinv_log needs w <= log 2", {"w": w})
    if w == LOG2:
        return -math.inf
    if w >= ASYMPTOTIC_SWITCH:
        return float(special.erfcinv(math.exp(w)))

    theta = -LOG_PI - math.log(-w)
    v = -theta - 2.0
    s = 2.0 / (theta - 2.0 * w)
    a2 = v / 8.0
    a3 = -(v * v + 6.0 * v - 6.0) / 32.0
    a4 = (4.0 * v ** 3 + 27.0 * v * v + 108.0 * v - 300.0) / 384.0
    return s ** -0.5 + a2 * s ** 1.5 + a3 * s ** 2.5 + a4 * s ** 3.5


def log_add(x: LogSigned, y: LogSigned) -> LogSigned:
    """Sum of two log-signed numbers.

    Raises:
        CancellationError: opposite signs cancel to below CANCELLATION_TOL of
            the larger magnitude; the caller should evaluate directly.
    """
    if x.is_zero():
        return y
    if y.is_zero():
        return x

    big, small = (x, y) if x.log_abs >= y.log_abs else (y, x)
    d = small.log_abs - big.log_abs

    if big.sign == small.sign:
        return LogSigned(big.sign, big.log_abs + math.log1p(math.exp(d)))

    if d == 0.0:
        return LogSigned.zero()
    remaining = -math.expm1(d)
    if remaining < CANCELLATION_TOL:
        raise CancellationError(
            "log_add lost all significant digits",
            {"x": tuple(x), "y": tuple(y), "relative": remaining}
        )
    return LogSigned(big.sign, big.log_abs + math.log(remaining))


def log_sub(x: LogSigned, y: LogSigned) -> LogSigned:
    """x - y in log domain."""
    return log_add(x, y.negate())
