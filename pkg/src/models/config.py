"""
Sampler and chain configuration models.
"""

import math
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, validator

SamplerKind = Literal["mh-iso", "mh-ncom", "mh-si", "rngibbs", "sysgibbs"]

MH_KINDS = {"mh-iso": "iso", "mh-ncom": "ncom", "mh-si": "si"}
GIBBS_KINDS = {"rngibbs": "random", "sysgibbs": "systematic"}


class MhConfig(BaseModel):
    """Random-walk Metropolis-Hastings proposal and step-size adaptation."""
    variant: Literal["iso", "ncom", "si"] = "iso"
    kappa: float = 1.0
    n_star: Optional[int] = None  # None -> floor(n ** (7/12))
    adapt: bool = True
    adapt_window: int = 10000
    up_factor: float = 1.2
    down_factor: float = 0.8
    low_rate: float = 0.15
    high_rate: float = 0.35

    @validator("kappa")
    def check_kappa(cls, v):
        if not (v > 0 and math.isfinite(v)):
            raise ValueError("kappa must be positive")
        return v

    @validator("n_star")
    def check_n_star(cls, v):
        if v is not None and v < 1:
            raise ValueError("n_star must be a positive integer")
        return v

    @validator("adapt_window")
    def check_window(cls, v):
        if v < 1:
            raise ValueError("adapt_window must be positive")
        return v

    @validator("up_factor")
    def check_up(cls, v):
        if v < 1.0:
            raise ValueError("up_factor must be >= 1")
        return v

    @validator("down_factor")
    def check_down(cls, v):
        if not 0.0 < v <= 1.0:
            raise ValueError("down_factor must lie in (0, 1]")
        return v

    @validator("high_rate")
    def check_rates(cls, v, values):
        low = values.get("low_rate")
        if low is None or not 0.0 < low < v < 1.0:
            raise ValueError("need 0 < low_rate < high_rate < 1")
        return v

    def resolve_n_star(self, n: int) -> int:
        """Components moved per Ncom proposal, clipped to [1, n]."""
        if self.n_star is not None:
            return min(self.n_star, n)
        return max(1, min(n, int(math.floor(n ** (7.0 / 12.0)))))

    class Config:
        validate_assignment = True


class GibbsConfig(BaseModel):
    """Single-component Gibbs scan order and overrelaxation."""
    scan: Literal["random", "systematic"] = "random"
    n_o: int = 1

    @validator("n_o")
    def check_n_o(cls, v):
        if v < 1 or v % 2 == 0:
            raise ValueError("n_o must be an odd positive integer")
        return v


class HierarchicalConfig(BaseModel):
    """Inverse-gamma hyperprior on the noise variance."""
    alpha: float = 1.0
    beta: float = 1.0
    enabled: bool = False

    @validator("alpha", "beta")
    def check_positive(cls, v):
        if not (v > 0 and math.isfinite(v)):
            raise ValueError("alpha and beta must be positive")
        return v


class ChainConfig(BaseModel):
    """Burn-in, sample count, thinning and recording options for one chain."""
    burn_in: int = 0
    samples: int = 1000
    thin: int = 1
    init: Optional[List[float]] = None  # None -> u = 0
    adapt_after_burn_in: bool = False
    record_samples: bool = True
    record_log_posterior: bool = True
    stream_path: Optional[str] = None
    cache_mode: Optional[Literal["dense-gram", "operator"]] = None  # None -> by size
    refresh_every: Optional[int] = None  # None -> one sweep
    debug: bool = False

    @validator("burn_in", "samples")
    def check_counts(cls, v):
        if v < 0:
            raise ValueError("burn_in and samples must be non-negative")
        return v

    @validator("thin")
    def check_thin(cls, v):
        if v < 1:
            raise ValueError("thin must be >= 1")
        return v


class SamplerSpec(BaseModel):
    """Which sampler to run, with its configuration."""
    kind: SamplerKind
    mh: Optional[MhConfig] = None
    gibbs: Optional[GibbsConfig] = None
    hierarchical: HierarchicalConfig = Field(default_factory=HierarchicalConfig)

    @validator("mh")
    def check_mh(cls, v, values):
        kind = values.get("kind")
        if v is not None and kind in MH_KINDS and v.variant != MH_KINDS[kind]:
            raise ValueError(f"MH variant {v.variant!r} does not match sampler {kind!r}")
        return v

    @validator("gibbs")
    def check_gibbs(cls, v, values):
        kind = values.get("kind")
        if v is not None and kind in GIBBS_KINDS and v.scan != GIBBS_KINDS[kind]:
            raise ValueError(f"Gibbs scan {v.scan!r} does not match sampler {kind!r}")
        return v

    @property
    def is_mh(self) -> bool:
        return self.kind in MH_KINDS

    def mh_config(self) -> MhConfig:
        return self.mh if self.mh is not None else MhConfig(variant=MH_KINDS[self.kind])

    def gibbs_config(self) -> GibbsConfig:
        return self.gibbs if self.gibbs is not None else GibbsConfig(scan=GIBBS_KINDS[self.kind])

    def descriptor(self) -> str:
        """Short name such as MH-Iso, RnGibbs, SysGibbsO7 or RnGibbs+Sigma2."""
        if self.is_mh:
            name = {"iso": "MH-Iso", "ncom": "MH-Ncom", "si": "MH-Si"}[MH_KINDS[self.kind]]
        else:
            gibbs = self.gibbs_config()
            name = "RnGibbs" if gibbs.scan == "random" else "SysGibbs"
            if gibbs.n_o > 1:
                name += f"O{gibbs.n_o}"
        if self.hierarchical.enabled:
            name += "+Sigma2"
        return name

    @classmethod
    def create(
        cls,
        kind: str,
        n_o: int = 1,
        kappa0: float = 1.0,
        adapt: bool = True,
        adapt_window: int = 10000,
        sigma2_block: bool = False,
        alpha: float = 1.0,
        beta: float = 1.0,
    ) -> "SamplerSpec":
        hierarchical = HierarchicalConfig(alpha=alpha, beta=beta, enabled=sigma2_block)
        if kind in MH_KINDS:
            return cls(kind=kind, mh=MhConfig(variant=MH_KINDS[kind], kappa=kappa0, adapt=adapt,
                                           adapt_window=adapt_window),
                       hierarchical=hierarchical)
        return cls(kind=kind, gibbs=GibbsConfig(scan=GIBBS_KINDS.get(kind, "random"), n_o=n_o),
                   hierarchical=hierarchical)
