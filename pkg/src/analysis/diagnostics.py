"""
Chain diagnostics: autocorrelation of scalar test functions, lags, burn-in
curves and conditional-mean estimates.

The acf estimator is

    R(tau) = sum_{i < K - tau} (g_i - mu)(g_{i+tau} - mu) / ((K - tau) rho)

with mu and rho the mean and (biased) variance over all K values, so R(0) = 1.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import fft

from core.errors import (
    ConfigurationError,
    DomainError,
    NotConvergedError,
    SamplerError,
)
from core.posterior_model import PosteriorModel
from models.chain import AcfResult, BurnInCurve, Chain, LagResult, TestFunction
from models.config import ChainConfig, SamplerSpec
from samplers.runner import derive_seeds, run_chains

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)

TAU_MAX_LIMIT = 1_000_000
LAG_THRESHOLD = 0.01

POWER_MAX_ITER = 10000
POWER_TOL = 1e-10
GAP_ITER = 200
# lambda_2 / lambda_1 above this counts as a repeated top eigenvalue
DEGENERATE_GAP = 0.999

PLATEAU_TAIL = 0.2
PLATEAU_SD = 2.0

CM_BATCHES = 5


# ============================================================================
# AUTOCORRELATION
# ============================================================================

def autocorrelation(
    series: Sequence[float],
    tau_max: Optional[int] = None,
    t_s: float = 1.0,
    sampler: str = "",
    test_function: str = "",
) -> AcfResult:
    """R(tau) for tau = 0..tau_max, via one zero-padded FFT.

    Args:
        series: scalar test function values g_1..g_K
        tau_max: largest lag, min(K - 1, 10^6) when None
        t_s: seconds per sample, carried along for temporal curves
    """
    x = np.asarray(series, dtype=float).ravel()
    k = x.size
    if k < 2:
        raise DomainError("Autocorrelation needs at least two values", {"K": k})
    if not np.all(np.isfinite(x)):
        raise DomainError("Series contains non-finite values", {"K": k})
    if tau_max is None:
        tau_max = min(k - 1, TAU_MAX_LIMIT)
    if not 1 <= tau_max < k:
        raise DomainError("tau_max must satisfy 1 <= tau_max < K", {"tau_max": tau_max, "K": k})

    centered = x - x.mean()
    rho = float(centered @ centered) / k
    if not rho > 0.0 or rho <= 1e-28 * max(float(np.max(np.abs(x))), 1.0) ** 2:
        raise DomainError("Series has zero variance", {"K": k, "variance": rho})

    size = fft.next_fast_len(2 * k, real=True)
    spectrum = fft.rfft(centered, size)
    acov = fft.irfft(spectrum * np.conj(spectrum), size)[:tau_max + 1]
    lags = np.arange(tau_max + 1)
    r = acov / ((k - lags) * rho)
    r[0] = 1.0

    logger.debug(f"[ACF] K={k} tau_max={tau_max} R(1)={r[1]:.4f}")
    return AcfResult(r=r, t_s=t_s, sampler=sampler, test_function=test_function)


def temporal_acf(acf: AcfResult) -> pd.DataFrame:
    """R*(t) = R(t / t_s) tabulated at t = tau * t_s."""
    if not acf.t_s > 0:
        raise DomainError("t_s must be positive", {"t_s": acf.t_s})
    tau = np.arange(acf.r.size)
    return pd.DataFrame({"tau": tau, "t": tau * acf.t_s, "R": acf.r})


def interpolate_temporal(curve: pd.DataFrame, t_grid: Sequence[float]) -> np.ndarray:
    """Step-interpolate R*(t) onto a common time grid.

    Each grid point takes the value at the last tabulated time not after it;
    points beyond the curve are NaN.
    """
    t = curve["t"].to_numpy()
    r = curve["R"].to_numpy()
    grid = np.asarray(t_grid, dtype=float)
    idx = np.searchsorted(t, grid, side="right") - 1
    out = np.full(grid.shape, np.nan)
    inside = (idx >= 0) & (grid <= t[-1])
    out[inside] = r[idx[inside]]
    return out


def lag_below(acf: AcfResult, threshold: float = LAG_THRESHOLD, require: bool = False) -> LagResult:
    """First lag with R(tau) < threshold, in samples and in seconds.

    A curve that never crosses within tau_max gives converged=False, or
    NotConvergedError when require is set.
    """
    below = np.flatnonzero(acf.r < threshold)
    if below.size == 0:
        if require:
            raise NotConvergedError(
                "Autocorrelation never dropped below the threshold",
                {"threshold": threshold, "tau_max": acf.tau_max, "sampler": acf.sampler},
            )
        logger.warning(f"[ACF] {acf.sampler or 'chain'}: R stays >= {threshold} up to tau_max={acf.tau_max}")
        return LagResult(threshold=threshold)
    tau = int(below[0])
    return LagResult(threshold=threshold, tau=tau, t=tau * acf.t_s, converged=True)


def lag_table(acfs: Sequence[AcfResult], threshold: float = LAG_THRESHOLD) -> pd.DataFrame:
    """One row per acf: sampler, test function, tau and t at the threshold."""
    rows = []
    for acf in acfs:
        lag = lag_below(acf, threshold)
        rows.append({
            "sampler": acf.sampler,
            "test_function": acf.test_function,
            "threshold": threshold,
            "tau": lag.tau,
            "t": lag.t,
            "t_s": acf.t_s,
            "converged": lag.converged,
        })
    return pd.DataFrame(rows, columns=["sampler", "test_function", "threshold", "tau", "t", "t_s", "converged"])


# ============================================================================
# TEST FUNCTIONS
# ============================================================================

def _covariance_operator(samples: np.ndarray, shrinkage: float):
    """v -> C v for the (optionally shrunk) sample covariance, never forming C."""
    centered = samples - samples.mean(axis=0)
    k, n = centered.shape
    scale = 1.0 / max(k - 1, 1)
    trace = float(np.einsum("ij,ij->", centered, centered)) * scale
    target = shrinkage * trace / n

    def apply(v: np.ndarray) -> np.ndarray:
        cv = centered.T @ (centered @ v) * scale
        if shrinkage:
            return (1.0 - shrinkage) * cv + target * v
        return cv

    return apply


def _power_iteration(apply, v0: np.ndarray, max_iter: int, tol: float) -> Tuple[np.ndarray, float, int, bool]:
    v = v0 / np.linalg.norm(v0)
    eigenvalue = 0.0
    for it in range(1, max_iter + 1):
        w = apply(v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return v, 0.0, it, True
        w /= norm
        eigenvalue = norm
        if 1.0 - abs(float(w @ v)) < tol:
            return w, eigenvalue, it, True
        v = w
    return v, eigenvalue, max_iter, False


def leading_eigvec(
    samples: np.ndarray,
    shrinkage: float = 0.0,
    max_iter: int = POWER_MAX_ITER,
    tol: float = POWER_TOL,
    seed: int = 0,
    label: str = "nu_1",
) -> TestFunction:
    """Direction of largest sample variance, by power iteration on the implicit covariance.

    The sign is fixed so the largest-magnitude entry is positive. The gap
    ratio lambda_2 / lambda_1 is estimated by one deflated power iteration;
    a ratio above DEGENERATE_GAP marks the result as degenerate.

    Raises:
        ConfigurationError: K <= n without shrinkage
        NotConvergedError: no convergence in max_iter iterations
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[0] < 2:
        raise DomainError("samples must be a K x n matrix with K >= 2", {"shape": samples.shape})
    k, n = samples.shape
    if not 0.0 <= shrinkage < 1.0:
        raise DomainError("shrinkage must lie in [0, 1)", {"shrinkage": shrinkage})
    if k <= n and shrinkage == 0.0:
        raise ConfigurationError("Covariance is rank deficient; enable shrinkage", {"K": k, "n": n})

    apply = _covariance_operator(samples, shrinkage)
    rng = np.random.Generator(np.random.PCG64(seed))
    v, eig1, iters, converged = _power_iteration(apply, rng.standard_normal(n), max_iter, tol)

    def deflated(x: np.ndarray) -> np.ndarray:
        return apply(x) - eig1 * (v @ x) * v

    _, eig2, _, _ = _power_iteration(deflated, rng.standard_normal(n), min(max_iter, GAP_ITER), tol)
    gap_ratio = eig2 / eig1 if eig1 > 0 else 1.0

    if not converged:
        raise NotConvergedError(
            "Power iteration did not converge",
            {"iterations": max_iter, "gap_ratio": gap_ratio, "eigenvalue": eig1},
        )

    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    degenerate = gap_ratio > DEGENERATE_GAP
    if degenerate:
        logger.warning(f"[EIGVEC] Top eigenvalue is (nearly) repeated: gap ratio {gap_ratio:.6f}")
    logger.info(f"[EIGVEC] Converged in {iters} iterations (K={k}, n={n}, eigenvalue={eig1:.4g}, gap ratio={gap_ratio:.4f})")
    return TestFunction(
        kind="eigvec-projection",
        vector=v,
        label=label,
        eigenvalue=eig1,
        gap_ratio=gap_ratio,
        degenerate=degenerate,
    )


def coordinate_test_function(i: int, n: int) -> TestFunction:
    if not 0 <= i < n:
        raise DomainError("Coordinate index out of range", {"i": i, "n": n})
    vector = np.zeros(n)
    vector[i] = 1.0
    return TestFunction(kind="coordinate", vector=vector, label=f"u[{i}]")


def project(samples: np.ndarray, test_function: Union[TestFunction, np.ndarray]) -> np.ndarray:
    """g(u_i) = <vector, u_i> for every row."""
    vector = test_function.vector if isinstance(test_function, TestFunction) else np.asarray(test_function, dtype=float)
    samples = np.asarray(samples, dtype=float)
    if samples.shape[-1] != vector.size:
        raise DomainError("Test function length differs from n", {"n": samples.shape[-1], "length": vector.size})
    return samples @ vector


# ============================================================================
# CONDITIONAL MEAN
# ============================================================================

def cm_estimate(chain: Union[Chain, np.ndarray]) -> np.ndarray:
    """Sample mean of the recorded post-burn-in rows (u-coordinates)."""
    samples = chain.samples if isinstance(chain, Chain) else np.asarray(chain, dtype=float)
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise DomainError("CM estimate needs at least one sample", {"shape": samples.shape})
    return samples.mean(axis=0)


def cm_at_times(samples: np.ndarray, t_s: float, times: Sequence[float], burn_in: int) -> Dict[float, np.ndarray]:
    """CM estimates a fixed compute budget would have produced.

    samples is an unthinned stream that starts at step 0 (burn-in included).
    A budget T allows K* = floor(T / t_s) steps, of which the first
    min(K0, K*/2) are discarded.
    """
    samples = np.asarray(samples, dtype=float)
    if not t_s > 0:
        raise DomainError("t_s must be positive", {"t_s": t_s})
    estimates = {}
    for budget in times:
        k_star = min(int(math.floor(budget / t_s)), samples.shape[0])
        k0 = min(burn_in, k_star // 2)
        if k_star - k0 < 1:
            raise DomainError("Budget too small for a single sample", {"time": budget, "t_s": t_s})
        estimates[float(budget)] = samples[k0:k_star].mean(axis=0)
        logger.debug(f"[ACF] CM at t={budget:g}s from steps [{k0}, {k_star})")
    return estimates


def cm_standard_error(samples: np.ndarray, batches: int = CM_BATCHES) -> np.ndarray:
    """Batch-means standard error of the sample mean, per coordinate.

    Rows are cut into `batches` consecutive blocks of equal length (the
    remainder is dropped); the spread of the block means carries the
    autocorrelation the plain sample variance misses.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or batches < 2 or samples.shape[0] < 2 * batches:
        raise DomainError(
            "Batch means need a K x n matrix with K >= 2 * batches",
            {"shape": samples.shape, "batches": batches}
        )
    size = samples.shape[0] // batches
    means = samples[:size * batches].reshape(batches, size, -1).mean(axis=1)
    return np.sqrt(means.var(axis=0, ddof=1) / batches)


def cm_agreement(first: np.ndarray, second: np.ndarray, batches: int = CM_BATCHES) -> Tuple[float, float]:
    """Relative L2 distance of two chains' CM estimates, and the distance
    their Monte Carlo error alone would produce (both relative to the first CM).
    """
    cm_first, cm_second = cm_estimate(first), cm_estimate(second)
    scale = float(np.linalg.norm(cm_first))
    if not scale > 0:
        raise DomainError("CM estimate of the first chain is zero", {})
    se_first = cm_standard_error(first, batches)
    se_second = cm_standard_error(second, batches)
    expected = float(np.sqrt(np.sum(se_first ** 2 + se_second ** 2)))
    return float(np.linalg.norm(cm_first - cm_second)) / scale, expected / scale


def display_range(image: np.ndarray, lower: float = 0.1, upper: float = 99.9) -> Tuple[float, float]:
    """Percentile value range for putting reconstructions on one colour scale."""
    lo, hi = np.percentile(np.asarray(image, dtype=float), [lower, upper])
    return float(lo), float(hi)


# ============================================================================
# BURN-IN
# ============================================================================

def plateau_step(trace: Sequence[float], tail_fraction: float = PLATEAU_TAIL, n_sd: float = PLATEAU_SD) -> int:
    """Smallest step after which the trace stays within n_sd tail standard deviations of the tail mean."""
    trace = np.asarray(trace, dtype=float)
    if trace.size == 0:
        raise DomainError("Empty trace", {})
    if not 0.0 < tail_fraction <= 1.0:
        raise DomainError("tail_fraction must lie in (0, 1]", {"tail_fraction": tail_fraction})
    tail = trace[-max(1, int(math.ceil(tail_fraction * trace.size))):]
    band = n_sd * float(tail.std())
    outside = np.flatnonzero(np.abs(trace - tail.mean()) > band)
    return int(outside[-1] + 1) if outside.size else 0


def burn_in_curve(
    model: PosteriorModel,
    spec: SamplerSpec,
    n_chains: int,
    max_steps: int,
    seed: int,
    init: Optional[List[float]] = None,
    max_workers: Optional[int] = None,
) -> BurnInCurve:
    """Mean log-posterior trace over independent, identically initialized chains."""
    if n_chains < 1 or max_steps < 1:
        raise DomainError("n_chains and max_steps must be >= 1", {"n_chains": n_chains, "max_steps": max_steps})

    config = ChainConfig(
        burn_in=0,
        samples=max_steps,
        init=init,
        adapt_after_burn_in=True,
        record_samples=False,
        record_log_posterior=True,
    )
    chains = run_chains(model, spec, config, n_chains, seed, max_workers=max_workers)
    failed = [c for c in chains if c.error]
    if failed:
        raise SamplerError("Burn-in chain failed", {"failed": len(failed), "first_error": failed[0].error})

    mean_trace = np.mean(np.vstack([c.log_posterior_trace for c in chains]), axis=0)
    plateau = plateau_step(mean_trace)
    unit = chains[0].unit
    logger.info(f"[BURNIN] {spec.descriptor()}: plateau after {plateau} {unit}s ({n_chains} chains, {max_steps} steps)")
    return BurnInCurve(
        mean_trace=mean_trace,
        n_chains=n_chains,
        descriptor=spec.descriptor(),
        unit=unit,
        plateau=plateau,
        seeds=derive_seeds(seed, n_chains),
    )
