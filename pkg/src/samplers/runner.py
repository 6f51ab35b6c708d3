"""
Chain orchestration: burn-in, sampling, thinning, timing and trace capture.

One "sample" is one proposal for the MH variants and one sweep of n
component updates for the Gibbs variants.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional

import numpy as np

from core.chain_io import ChainWriter, chain_metadata
from core.posterior_model import (
    DENSE_GRAM_LIMIT,
    PosteriorModel,
    build_cache,
    log_posterior,
)
from models.chain import Chain
from models.config import ChainConfig, SamplerSpec
from samplers.gibbs import gibbs_sweep, sample_sigma2
from samplers.mh import adapt_kappa, mh_step

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)

RNG_ALGORITHM = "PCG64"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def derive_seeds(seed: int, n_chains: int) -> List[int]:
    """Independent per-chain seeds from one master seed (SeedSequence.spawn)."""
    children = np.random.SeedSequence(seed).spawn(n_chains)
    return [int(child.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFFFFFFFFFF) for child in children]


class _Recorder:
    """Collects thinned post-burn-in rows, traces and the optional unthinned stream (burn-in included)."""

    def __init__(self, n: int, config: ChainConfig, seed: int, stream_path: Optional[str]):
        self.burn_in = config.burn_in
        self.stride = config.thin
        self.record_samples = config.record_samples
        self.record_trace = config.record_log_posterior
        rows = math.ceil(config.samples / config.thin) if config.record_samples else 0
        self.rows = np.empty((rows, n))
        self.count = 0
        self.trace: List[float] = []
        self.sigma2: List[float] = []
        self.writer = ChainWriter(stream_path, n, 1, seed) if stream_path else None

    def wants_state(self, step: int) -> bool:
        """Whether step needs u materialized."""
        if self.record_trace or self.writer is not None:
            return True
        j = step - self.burn_in
        return self.record_samples and j >= 0 and j % self.stride == 0

    def record(self, step: int, u: Optional[np.ndarray], log_p: Optional[float], sigma2: Optional[float]) -> None:
        if self.record_trace and log_p is not None:
            self.trace.append(log_p)
        if sigma2 is not None:
            self.sigma2.append(sigma2)
        if self.writer is not None:
            self.writer.write_row(u)
        j = step - self.burn_in
        if j < 0:
            return
        if self.record_samples and j % self.stride == 0:
            self.rows[self.count] = u
            self.count += 1


def run_chain(model: PosteriorModel, spec: SamplerSpec, config: ChainConfig, seed: int) -> Chain:
    """Run one chain; deterministic given seed.

    On failure the samples recorded so far are returned with `error` set.
    """
    rng = make_rng(seed)
    n = model.n
    u0 = np.zeros(n) if config.init is None else np.array(config.init, dtype=float)
    recorder = _Recorder(n, config, seed, config.stream_path)
    descriptor = spec.descriptor()
    steps = config.burn_in + config.samples
    state = {"done": 0, "accepted": 0, "kappa": None}
    error = None

    logger.info(f"[RUNNER] Starting {descriptor} (n={n}, burn-in={config.burn_in}, K={config.samples}, seed={seed})")
    start = time.perf_counter()
    try:
        if spec.is_mh:
            _run_mh(model, spec, config, rng, u0, recorder, state)
        else:
            _run_gibbs(model, spec, config, rng, u0, recorder, state)
    except Exception as e:
        error = f"{type(e).__name__}: {e}"
        logger.error(f"[RUNNER] {descriptor} aborted after {state['done']} samples: {e}", exc_info=True)
    wall = time.perf_counter() - start

    t_s = max(wall / max(state["done"], 1), 1e-12)
    post_burn_in = max(state["done"] - config.burn_in, 0)
    chain = Chain(
        samples=recorder.rows[:recorder.count] if config.record_samples else np.empty((0, n)),
        burn_in=config.burn_in,
        total=config.samples if error is None else post_burn_in,
        stride=config.thin,
        seed=seed,
        t_s=t_s,
        descriptor=descriptor,
        unit="proposal" if spec.is_mh else "sweep",
        updates_per_sample=1 if spec.is_mh else n,
        log_posterior_trace=np.array(recorder.trace) if config.record_log_posterior else None,
        sigma2_trace=np.array(recorder.sigma2) if spec.hierarchical.enabled else None,
        acceptance_rate=state["accepted"] / state["done"] if spec.is_mh and state["done"] else None,
        final_kappa=state["kappa"],
        wall_time=wall,
        error=error,
    )
    if recorder.writer is not None:
        recorder.writer.close(t_s, {**chain_metadata(chain), "rows_include_burn_in": True})
    logger.info(f"[RUNNER] Finished {descriptor}: {state['done']}/{steps} samples, t_s={t_s:.3e}s")
    return chain


def _run_mh(model, spec, config, rng, u0, recorder, state) -> None:
    mh = spec.mh_config()
    hier = spec.hierarchical
    kappa = mh.kappa
    n_star = mh.resolve_n_star(model.n)
    sigma2 = model.noise_sigma ** 2
    u = u0
    log_p = log_posterior(u, model, sigma2)
    window_accepted = 0
    state["kappa"] = kappa

    for step in range(config.burn_in + config.samples):
        result = mh_step(u, model, mh, rng, log_p=log_p, kappa=kappa, n_star=n_star, sigma2=sigma2)
        u, log_p = result.state, result.log_posterior
        if result.accepted:
            window_accepted += 1
            state["accepted"] += 1

        if hier.enabled:
            sigma2 = sample_sigma2(u, model, hier, rng)
            log_p = log_posterior(u, model, sigma2)

        adapting = mh.adapt and (step < config.burn_in or config.adapt_after_burn_in)
        if (step + 1) % mh.adapt_window == 0:
            if adapting:
                kappa = adapt_kappa(window_accepted, mh.adapt_window, kappa, mh)
                state["kappa"] = kappa
            window_accepted = 0

        recorder.record(step, u, log_p, sigma2 if hier.enabled else None)
        state["done"] = step + 1


def _run_gibbs(model, spec, config, rng, u0, recorder, state) -> None:
    gibbs = spec.gibbs_config()
    hier = spec.hierarchical
    mode = config.cache_mode or ("dense-gram" if model.n <= DENSE_GRAM_LIMIT else "operator")
    xi = model.basis.apply_inverse(u0)
    cache = build_cache(model, mode, xi, refresh_every=config.refresh_every, debug=config.debug)
    sigma2 = model.noise_sigma ** 2

    for step in range(config.burn_in + config.samples):
        gibbs_sweep(xi, model, cache, gibbs, rng)
        u = None
        if hier.enabled or recorder.wants_state(step):
            u = model.basis.apply(xi)
        if hier.enabled:
            sigma2 = sample_sigma2(u, model, hier, rng, cache)
        log_p = log_posterior(u, model, sigma2) if recorder.record_trace else None
        recorder.record(step, u, log_p, sigma2 if hier.enabled else None)
        state["done"] = step + 1


def run_chains(
    model: PosteriorModel,
    spec: SamplerSpec,
    config: ChainConfig,
    n_chains: int,
    seed: int,
    max_workers: Optional[int] = None,
) -> List[Chain]:
    """Independent chains on a thread pool, seeds from derive_seeds(seed, n_chains)."""
    seeds = derive_seeds(seed, n_chains)
    configs = []
    for i in range(n_chains):
        if config.stream_path:
            base = Path(config.stream_path)
            stream = str(base.with_name(f"{base.stem}_{i}{base.suffix}"))
            configs.append(config.model_copy(update={"stream_path": stream}))
        else:
            configs.append(config)

    logger.info(f"[RUNNER] Launching {n_chains} {spec.descriptor()} chains")
    with ThreadPoolExecutor(max_workers=max_workers or n_chains) as pool:
        futures = [pool.submit(run_chain, model, spec, configs[i], seeds[i]) for i in range(n_chains)]
        return [f.result() for f in futures]
