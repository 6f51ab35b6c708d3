"""
Single-component Gibbs updates and the inverse-gamma noise-variance block.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy import stats

from core.errors import ConfigurationError, NumericalError, SamplerError
from core.expquad_sampler import prepare, sample, sample_overrelaxed
from core.posterior_model import (
    CoefficientCache,
    PosteriorModel,
    commit_component,
    conditional_params,
)
from models.config import GibbsConfig, HierarchicalConfig

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)


def next_component(step: int, n: int, config: GibbsConfig, rng: np.random.Generator) -> int:
    """Random scan: uniform index. Systematic scan: step mod n."""
    if config.scan == "random":
        return int(rng.integers(n))
    return step % n


def gibbs_update(
    xi: np.ndarray,
    model: PosteriorModel,
    cache: CoefficientCache,
    config: GibbsConfig,
    rng: np.random.Generator,
    step: int = 0,
) -> np.ndarray:
    """Redraw one coordinate of xi from its exact conditional; xi is updated in place."""
    i = next_component(step, xi.size, config, rng)
    old = float(xi[i])
    try:
        terms = prepare(conditional_params(i, xi, cache, model))
        if config.n_o == 1:
            new = sample(terms, rng)
        else:
            new = sample_overrelaxed(terms, old, config.n_o, rng)
    except SamplerError as e:
        raise e.with_context(component=i)

    commit_component(i, old, new, cache, model)
    xi[i] = new
    return xi


def gibbs_sweep(
    xi: np.ndarray,
    model: PosteriorModel,
    cache: CoefficientCache,
    config: GibbsConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """n single-component updates: one sample of a Gibbs chain."""
    for step in range(xi.size):
        gibbs_update(xi, model, cache, config, rng, step)
    return xi


def sample_sigma2(
    u: np.ndarray,
    model: PosteriorModel,
    config: HierarchicalConfig,
    rng: np.random.Generator,
    cache: Optional[CoefficientCache] = None,
) -> float:
    """Draw sigma^2 | u, m ~ InvGamma(alpha + k/2, ||m - A u||^2 / 2 + beta).

    When a cache is passed its working sigma^2 is replaced, which rescales
    every sigma-dependent coefficient.
    """
    if not config.enabled:
        raise ConfigurationError("sigma^2 block requested while the hyperprior is disabled", {})

    residual = model.data - model.operator.apply(u)
    shape = config.alpha + 0.5 * model.k
    scale = 0.5 * float(residual @ residual) + config.beta
    if not (scale > 0 and math.isfinite(scale)):
        raise NumericalError("Inverse-gamma scale is not positive and finite", {"scale": scale})

    draw = float(stats.invgamma.rvs(shape, scale=scale, random_state=rng))
    if not (draw > 0 and math.isfinite(draw)):
        raise NumericalError("sigma^2 draw underflowed", {"shape": shape, "scale": scale, "draw": draw})

    if cache is not None:
        cache.set_sigma2(draw)
    logger.debug(f"[SIGMA2] shape={shape:.3f} scale={scale:.4g} draw={draw:.4g}")
    return draw
