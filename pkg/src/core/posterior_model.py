"""
Posterior model for linear inverse problems with L1-type priors.

    p(u | m) ~ exp(-||m - A u||^2 / (2 sigma^2) - lambda ||D u||_1)

In coefficients u = V xi this is exp(-||m_bar - Psi xi||^2 - lambda sum_pen |xi_i|)
with m_bar = m / (sqrt(2) sigma) and Psi = A V / (sqrt(2) sigma). Along one
coordinate the posterior is exp(-a x^2 + b x - c |x|) with

    a = ||psi_i||^2
    b = 2 [psi_i^T m_bar - (psi_i^T Psi_[-i]) xi_[-i]]
    c = lambda if coordinate i is penalized, else 0.

The cache keeps sigma-free quantities (||A v_i||^2, (AV)^T (AV), (AV)^T m,
A V xi) so that the hierarchical sigma^2 block only has to swap sigma^2.
"""

import logging
import math
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, PrivateAttr, validator
from scipy import sparse

from core.errors import ConfigurationError, ConsistencyError
from core.operators import BasisTransform, Column, LinearOperator
from models.params import ExpQuadParams

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)

CacheMode = Literal["dense-gram", "operator"]

# n x n float64 Gram matrix up to 4096^2 (128 MB)
DENSE_GRAM_LIMIT = 4096


class PosteriorModel(BaseModel):
    """Forward operator, data, noise level and L1 prior D, V, lambda."""
    operator: Any
    data: np.ndarray
    noise_sigma: float
    lambda_value: float
    prior_matrix: Any
    basis: Any

    _av_dense: Optional[np.ndarray] = PrivateAttr(default=None)

    @validator("noise_sigma", "lambda_value")
    def check_positive(cls, v):
        if not (v > 0 and math.isfinite(v)):
            raise ValueError("noise_sigma and lambda_value must be positive and finite")
        return float(v)

    @validator("operator")
    def check_operator(cls, v):
        if not isinstance(v, LinearOperator):
            raise ValueError("operator must be a LinearOperator")
        return v

    @validator("basis")
    def check_basis(cls, v, values):
        if not isinstance(v, BasisTransform):
            raise ValueError("basis must be a BasisTransform")
        op = values.get("operator")
        if op is not None and v.dim != op.input_dim:
            raise ValueError("basis dimension must equal the operator input dimension")
        return v

    @validator("data", pre=True)
    def check_data(cls, v, values):
        v = np.asarray(v, dtype=float)
        op = values.get("operator")
        if op is not None and v.shape != (op.output_dim,):
            raise ValueError("data length must equal the operator output dimension")
        if not np.all(np.isfinite(v)):
            raise ValueError("data must be finite")
        return v

    class Config:
        arbitrary_types_allowed = True

    @property
    def n(self) -> int:
        return self.operator.input_dim

    @property
    def k(self) -> int:
        return self.operator.output_dim

    @property
    def prior_rows(self) -> int:
        return self.prior_matrix.shape[0]

    @property
    def penalized(self) -> np.ndarray:
        return self.basis.penalized

    @property
    def scaled_data(self) -> np.ndarray:
        return self.data / (math.sqrt(2.0) * self.noise_sigma)

    def apply_psi(self, xi: np.ndarray) -> np.ndarray:
        return self.operator.apply(self.basis.apply(xi)) / (math.sqrt(2.0) * self.noise_sigma)

    def av_dense(self) -> np.ndarray:
        """A V as a dense k x n array (computed once)."""
        if self._av_dense is None:
            self._av_dense = self.basis.right_multiply(self.operator.to_dense())
        return self._av_dense

    def psi_column_raw(self, i: int) -> Column:
        """Nonzero part of A V e_i, without the 1/(sqrt(2) sigma) factor."""
        if self.basis.is_identity:
            return self.operator.column(i)
        av = self.av_dense()
        return np.arange(self.k), av[:, i]

    def psi_column_norms_raw(self) -> np.ndarray:
        if self.basis.is_identity:
            return self.operator.column_norms()
        av = self.av_dense()
        return np.einsum("ij,ij->j", av, av)

    def with_sigma(self, noise_sigma: float) -> "PosteriorModel":
        clone = PosteriorModel(
            operator=self.operator,
            data=self.data,
            noise_sigma=noise_sigma,
            lambda_value=self.lambda_value,
            prior_matrix=self.prior_matrix,
            basis=self.basis,
        )
        clone._av_dense = self._av_dense
        return clone

    def check_prior_structure(self, atol: float = 1e-12) -> None:
        """D V restricted to penalized columns is the identity, the rest is zero."""
        mask = self.penalized
        if int(mask.sum()) != self.prior_rows:
            raise ConsistencyError(
                "Number of penalized coefficients must equal the rows of D",
                {"penalized": int(mask.sum()), "prior_rows": self.prior_rows}
            )
        dv = np.asarray(self.basis.right_multiply(_as_dense(self.prior_matrix)))
        if not np.allclose(dv[:, mask], np.eye(self.prior_rows), atol=atol) or \
                not np.allclose(dv[:, ~mask], 0.0, atol=atol):
            raise ConsistencyError("D V is not [I | 0] on the penalized/free split", {})


def _as_dense(matrix) -> np.ndarray:
    return matrix.toarray() if sparse.issparse(matrix) else np.asarray(matrix, dtype=float)


class CoefficientCache:
    """Precomputed parts of (a, b, c) plus the running state of one chain."""

    def __init__(
        self,
        mode: CacheMode,
        col_norms_raw: np.ndarray,
        c_values: np.ndarray,
        xi: np.ndarray,
        sigma2: float,
        gram_raw: Optional[np.ndarray] = None,
        data_projection: Optional[np.ndarray] = None,
        running_raw: Optional[np.ndarray] = None,
        refresh_every: int = 0,
        debug: bool = False,
    ):
        self.mode = mode
        self.col_norms_raw = col_norms_raw
        self.c_values = c_values
        self.xi = xi
        self.sigma2 = float(sigma2)
        self.gram_raw = gram_raw
        self.data_projection = data_projection
        self.running_raw = running_raw
        self.refresh_every = int(refresh_every)
        self.debug = debug
        self.commits = 0
        self.refreshes = 0
        self.last_drift = 0.0

    @property
    def col_norms(self) -> np.ndarray:
        """||psi_i||^2 at the working sigma^2."""
        return self.col_norms_raw / (2.0 * self.sigma2)

    @property
    def gram(self) -> Optional[np.ndarray]:
        """Phi = Psi^T Psi at the working sigma^2 (dense mode only)."""
        if self.gram_raw is None:
            return None
        return self.gram_raw / (2.0 * self.sigma2)

    @property
    def running_image(self) -> np.ndarray:
        """Psi xi (operator mode) or xi (dense mode)."""
        if self.mode == "operator":
            return self.running_raw / math.sqrt(2.0 * self.sigma2)
        return self.xi

    def set_sigma2(self, sigma2: float) -> None:
        if not (sigma2 > 0 and math.isfinite(sigma2)):
            raise ConsistencyError("Working sigma^2 must be positive and finite", {"sigma2": sigma2})
        self.sigma2 = float(sigma2)


def build_cache(
    model: PosteriorModel,
    mode: CacheMode,
    xi0: np.ndarray,
    dense_limit: int = DENSE_GRAM_LIMIT,
    refresh_every: Optional[int] = None,
    debug: bool = False,
) -> CoefficientCache:
    """Precompute column norms and either the Gram matrix or the running image.

    Raises:
        ConfigurationError: dense-gram requested above dense_limit.
        ConsistencyError: an unpenalized column of A V vanishes (ker D and ker A
            intersect). A vanishing penalized column is fine: its conditional
            is a Laplace density.
    """
    n = model.n
    xi0 = np.array(xi0, dtype=float)
    if xi0.shape != (n,):
        raise ConsistencyError("xi0 has the wrong length", {"expected": n, "got": xi0.shape})

    gram_raw = data_projection = running_raw = None
    if mode == "dense-gram":
        if n > dense_limit:
            raise ConfigurationError(
                f"Dense Gram matrix for n={n} exceeds the limit of {dense_limit}; use operator mode",
                {"n": n, "dense_limit": dense_limit}
            )
        av = model.av_dense()
        gram_raw = av.T @ av
        data_projection = av.T @ model.data
        col_norms_raw = np.diag(gram_raw).copy()
    elif mode == "operator":
        col_norms_raw = np.asarray(model.psi_column_norms_raw(), dtype=float)
        running_raw = model.operator.apply(model.basis.apply(xi0))
    else:
        raise ConfigurationError(f"Unknown cache mode {mode!r}", {"mode": mode})

    unseen = col_norms_raw <= 0.0
    if np.any(unseen & ~model.penalized):
        bad = int(np.flatnonzero(unseen & ~model.penalized)[0])
        raise ConsistencyError(
            "Column of A V vanishes; ker D and ker A intersect",
            {"component": bad}
        )
    if np.any(unseen):
        logger.info(f"[CACHE] {int(unseen.sum())} component(s) unseen by the data; their conditionals are Laplace")

    c_values = model.lambda_value * model.penalized.astype(float)
    cache = CoefficientCache(
        mode=mode,
        col_norms_raw=col_norms_raw,
        c_values=c_values,
        xi=xi0,
        sigma2=model.noise_sigma ** 2,
        gram_raw=gram_raw,
        data_projection=data_projection,
        running_raw=running_raw,
        refresh_every=n if refresh_every is None else refresh_every,
        debug=debug,
    )
    logger.info(f"[CACHE] Built {mode} cache for n={n}, k={model.k}")
    return cache


def conditional_params(i: int, xi: np.ndarray, cache: CoefficientCache, model: PosteriorModel) -> ExpQuadParams:
    """(a, b, c) of the conditional density of xi_i given the other coordinates."""
    if cache.debug and not np.array_equal(cache.xi, xi):
        raise ConsistencyError(
            "Cache state differs from the chain state",
            {"component": i, "max_diff": float(np.max(np.abs(cache.xi - xi)))}
        )

    norm_i = cache.col_norms_raw[i]
    if cache.mode == "dense-gram":
        projection = cache.data_projection[i] - cache.gram_raw[i] @ xi + xi[i] * norm_i
    else:
        idx, vals = model.psi_column_raw(i)
        residual = model.data[idx] - cache.running_raw[idx]
        projection = vals @ residual + xi[i] * norm_i

    return ExpQuadParams(
        a=norm_i / (2.0 * cache.sigma2),
        b=projection / cache.sigma2,
        c=float(cache.c_values[i]),
    )


def commit_component(i: int, old: float, new: float, cache: CoefficientCache, model: PosteriorModel) -> None:
    """Record xi_i: old -> new in the cache, refreshing every refresh_every commits."""
    if cache.debug and cache.xi[i] != old:
        raise ConsistencyError("Committed old value differs from the cache", {"component": i})
    if new == old:
        return

    cache.xi[i] = new
    if cache.mode == "operator":
        idx, vals = model.psi_column_raw(i)
        cache.running_raw[idx] += vals * (new - old)

    cache.commits += 1
    if cache.refresh_every and cache.commits % cache.refresh_every == 0:
        refresh(cache, model)


def refresh(cache: CoefficientCache, model: PosteriorModel) -> float:
    """Recompute the running image from xi; returns the drift removed."""
    if cache.mode != "operator":
        return 0.0
    fresh = model.operator.apply(model.basis.apply(cache.xi))
    drift = float(np.max(np.abs(fresh - cache.running_raw))) if fresh.size else 0.0
    cache.running_raw = fresh
    cache.refreshes += 1
    cache.last_drift = drift
    logger.debug(f"[CACHE] Refresh {cache.refreshes}: drift {drift:.3e}")
    return drift


def log_posterior(u: np.ndarray, model: PosteriorModel, sigma2: Optional[float] = None) -> float:
    """-||m - A u||^2 / (2 sigma^2) - lambda ||D u||_1, unnormalized."""
    sigma2 = model.noise_sigma ** 2 if sigma2 is None else sigma2
    residual = model.data - model.operator.apply(u)
    prior = np.abs(model.prior_matrix @ u).sum()
    return float(-(residual @ residual) / (2.0 * sigma2) - model.lambda_value * prior)


def log_posterior_xi(xi: np.ndarray, model: PosteriorModel, sigma2: Optional[float] = None) -> float:
    """log_posterior in coefficient representation."""
    return log_posterior(model.basis.apply(xi), model, sigma2)
