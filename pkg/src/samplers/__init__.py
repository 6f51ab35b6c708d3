"""
Samplers package - Metropolis-Hastings, single-component Gibbs and chain orchestration.
"""

from .mh import propose, mh_step, adapt_kappa
from .gibbs import gibbs_update, gibbs_sweep, sample_sigma2
from .runner import run_chain, run_chains, derive_seeds, make_rng

__all__ = [
    # Metropolis-Hastings
    "propose",
    "mh_step",
    "adapt_kappa",
    # Gibbs
    "gibbs_update",
    "gibbs_sweep",
    "sample_sigma2",
    # Orchestration
    "run_chain",
    "run_chains",
    "derive_seeds",
    "make_rng",
]
