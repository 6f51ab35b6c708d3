"""
Chain and diagnostic result models.
"""

import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, validator


class Chain(BaseModel):
    """Recorded samples of one chain plus timing and provenance."""
    samples: np.ndarray  # rows x n, u-coordinates
    burn_in: int
    total: int  # K, post-burn-in samples before thinning
    stride: int = 1
    seed: int
    t_s: float  # wall seconds per sample
    descriptor: str
    unit: Literal["proposal", "sweep"]
    updates_per_sample: int = 1  # component updates in one sample
    log_posterior_trace: Optional[np.ndarray] = None  # burn-in + sampling
    sigma2_trace: Optional[np.ndarray] = None
    acceptance_rate: Optional[float] = None
    final_kappa: Optional[float] = None
    wall_time: float = 0.0
    error: Optional[str] = None

    @validator("t_s")
    def check_t_s(cls, v):
        if not v > 0:
            raise ValueError("t_s must be positive")
        return v

    @validator("stride")
    def check_stride(cls, v):
        if v < 1:
            raise ValueError("stride must be >= 1")
        return v

    class Config:
        arbitrary_types_allowed = True

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def expected_rows(self) -> int:
        return math.ceil(self.total / self.stride)

    @property
    def complete(self) -> bool:
        return self.error is None


class AcfResult(BaseModel):
    """R(tau) for tau = 0..tau_max of a scalar test function of a chain."""
    r: np.ndarray
    t_s: float
    sampler: str = ""
    test_function: str = ""

    @validator("r")
    def check_r(cls, v):
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("r must be a non-empty vector")
        if abs(v[0] - 1.0) > 1e-12:
            raise ValueError("R(0) must be 1")
        return v

    class Config:
        arbitrary_types_allowed = True

    @property
    def tau_max(self) -> int:
        return self.r.size - 1


class LagResult(BaseModel):
    """First lag with R below a threshold, in samples and in seconds."""
    threshold: float
    tau: Optional[int] = None
    t: Optional[float] = None
    converged: bool = False


class TestFunction(BaseModel):
    """Linear test function g(u) = <vector, u>."""
    kind: Literal["eigvec-projection", "coordinate", "custom-linear"]
    vector: np.ndarray
    label: str = ""
    eigenvalue: Optional[float] = None
    gap_ratio: Optional[float] = None  # lambda_2 / lambda_1 estimate
    degenerate: bool = False

    __test__ = False  # not a test class for collectors

    @validator("vector")
    def check_unit(cls, v):
        v = np.asarray(v, dtype=float)
        norm = float(np.linalg.norm(v))
        if not norm > 0:
            raise ValueError("test function direction must be nonzero")
        return v / norm

    class Config:
        arbitrary_types_allowed = True


class BurnInCurve(BaseModel):
    """Per-step mean of the log posterior over independent chains."""
    mean_trace: np.ndarray
    n_chains: int
    descriptor: str
    unit: Literal["proposal", "sweep"]
    plateau: Optional[int] = None
    seeds: list = Field(default_factory=list)

    class Config:
        arbitrary_types_allowed = True
