"""
Random-walk Metropolis-Hastings in u-coordinates.

Proposals are symmetric, so the acceptance ratio is the posterior ratio:
    iso   every component gets N(0, kappa^2)
    ncom  n_star distinct random components get N(0, kappa^2)
    si    one random component gets N(0, kappa^2)
"""

import logging
import math
from typing import NamedTuple, Optional

import numpy as np

from core.posterior_model import PosteriorModel, log_posterior
from models.config import MhConfig

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)


class MhStepResult(NamedTuple):
    state: np.ndarray
    accepted: bool
    log_posterior: float


def propose(state: np.ndarray, config: MhConfig, rng: np.random.Generator,
            kappa: float, n_star: int) -> np.ndarray:
    """Symmetric random-walk proposal for the configured variant."""
    proposal = state.copy()
    n = state.size
    if config.variant == "iso":
        proposal += kappa * rng.standard_normal(n)
    elif config.variant == "ncom":
        idx = rng.choice(n, size=n_star, replace=False)
        proposal[idx] += kappa * rng.standard_normal(n_star)
    else:
        i = int(rng.integers(n))
        proposal[i] += kappa * rng.standard_normal()
    return proposal


def mh_step(
    state: np.ndarray,
    model: PosteriorModel,
    config: MhConfig,
    rng: np.random.Generator,
    log_p: Optional[float] = None,
    kappa: Optional[float] = None,
    n_star: Optional[int] = None,
    sigma2: Optional[float] = None,
) -> MhStepResult:
    """One proposal plus accept/reject.

    Args:
        state: current u
        log_p: log posterior at state, recomputed when None
        kappa: proposal std, config.kappa when None
        n_star: components per Ncom proposal, resolved from n when None
        sigma2: working noise variance, model's when None
    """
    kappa = config.kappa if kappa is None else kappa
    n_star = config.resolve_n_star(state.size) if n_star is None else n_star
    if log_p is None:
        log_p = log_posterior(state, model, sigma2)

    proposal = propose(state, config, rng, kappa, n_star)
    log_p_new = log_posterior(proposal, model, sigma2)

    theta = rng.random()
    # theta == 0 gives -inf and always accepts
    log_theta = math.log(theta) if theta > 0.0 else -math.inf
    if log_theta <= log_p_new - log_p:
        return MhStepResult(proposal, True, log_p_new)
    return MhStepResult(state, False, log_p)


def adapt_kappa(accepted: int, window: int, kappa: float, config: MhConfig) -> float:
    """Scale kappa by the window's acceptance rate band."""
    rate = accepted / window
    if rate > config.high_rate:
        new_kappa = kappa * config.up_factor
    elif rate < config.low_rate:
        new_kappa = kappa * config.down_factor
    else:
        new_kappa = kappa

    if new_kappa != kappa:
        logger.info(f"[MH] Acceptance rate {rate:.3f} over {window} proposals: kappa {kappa:.4g} -> {new_kappa:.4g}")
    else:
        logger.debug(f"[MH] Acceptance rate {rate:.3f}: kappa stays {kappa:.4g}")
    return new_kappa
