"""
Error hierarchy shared by the sampler stack.
Every error carries a message plus a context dict with the diagnostic payload
(parameters, component index, gap estimate, ...).
"""

import logging
import math
from typing import Any, Dict, Optional

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)


class SamplerError(Exception):
    """Base exception for all sampler, model and diagnostic failures."""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        self.message = message
        self.context = dict(context or {})
        super().__init__(self.message)

    def with_context(self, **extra: Any) -> "SamplerError":
        """Attach more payload (e.g. the component index) and return self."""
        self.context.update(extra)
        return self

    def __str__(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{k}={v}" for k, v in self.context.items())
        return f"{self.message} ({details})"


class DomainError(SamplerError):
    """Argument outside the domain of an operation."""
    pass


class NumericalError(SamplerError):
    """Overflow, underflow or loss of precision in a computed quantity."""
    pass


class CancellationError(NumericalError):
    """Catastrophic cancellation in log-domain addition; caller falls back."""
    pass


class ConsistencyError(SamplerError):
    """Internal state disagrees with what it should be."""
    pass


class ConfigurationError(SamplerError):
    """Configuration that cannot be run as requested."""
    pass


class NotConvergedError(SamplerError):
    """Iterative procedure or threshold search did not finish."""
    pass


def require_finite(value: float, name: str, error_cls=DomainError) -> float:
    """Raise if value is NaN or infinite, otherwise return it as float."""
    value = float(value)
    if not math.isfinite(value):
        raise error_cls(f"{name} must be finite", {name: value})
    return value
