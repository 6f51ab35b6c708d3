"""
1-D CCD-style deblurring with a total-variation prior.

The unknown is sampled at x_i = i h, i = 1..n, h = 1 / (n + 1), n = 2^L_u - 1.
Each of the k = 2^L_m - 2 detector pixels integrates u over
[j / (k + 2), (j + 1) / (k + 2)], j = 1..k, by the trapezoidal rule. The
ground truth is the indicator of [1/3, 2/3]; clean data are its exact
pixel integrals, so the data never come from the inversion grid.
"""

import logging

import numpy as np
from scipy import sparse

from core.operators import MatrixOperator, StepBasis, first_difference_matrix
from core.posterior_model import PosteriorModel
from models.scenario import Scenario1dConfig, ScenarioBundle
from scenarios.lambda_schedule import lambda_schedule

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)

STEP_LEFT = 1.0 / 3.0
STEP_RIGHT = 2.0 / 3.0


def forward_matrix_1d(config: Scenario1dConfig) -> sparse.csr_matrix:
    """k x n trapezoidal pixel-integration matrix."""
    n, k, h = config.n, config.k, config.h
    per_pixel = 2 ** (config.L_u - config.L_m)
    rows, cols, vals = [], [], []
    for r in range(k):
        j = r + 1
        first = j * per_pixel - 1
        weights = np.full(per_pixel + 1, h)
        weights[0] = weights[-1] = h / 2
        rows.extend([r] * (per_pixel + 1))
        cols.extend(range(first, first + per_pixel + 1))
        vals.extend(weights)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(k, n))


def clean_data_1d(config: Scenario1dConfig) -> np.ndarray:
    """Exact integral of the step over each pixel: interval-overlap lengths."""
    k = config.k
    width = 1.0 / (k + 2)
    left = np.arange(1, k + 1) * width
    right = left + width
    return np.clip(np.minimum(right, STEP_RIGHT) - np.maximum(left, STEP_LEFT), 0.0, None)


def discretize_ground_truth_1d(n: int) -> np.ndarray:
    """Step function sampled at the n interior grid points."""
    x = np.arange(1, n + 1) / (n + 1)
    return ((x >= STEP_LEFT) & (x <= STEP_RIGHT)).astype(float)


def operator_1d(config: Scenario1dConfig):
    """(A, D, V) for the configuration; data-independent."""
    return (
        MatrixOperator(forward_matrix_1d(config)),
        first_difference_matrix(config.n),
        StepBasis(config.n),
    )


def build_1d(config: Scenario1dConfig) -> ScenarioBundle:
    """Posterior model, ground truth and clean data of the 1-D problem."""
    operator, prior_matrix, basis = operator_1d(config)
    clean = clean_data_1d(config)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    data = clean + config.noise_sigma * rng.standard_normal(config.k)
    lam = lambda_schedule(config.lambda_rule, config.n)

    model = PosteriorModel(
        operator=operator,
        data=data,
        noise_sigma=config.noise_sigma,
        lambda_value=lam,
        prior_matrix=prior_matrix,
        basis=basis,
    )
    logger.info(f"[SCENARIO] 1-D deblurring: n={config.n}, k={config.k}, lambda={lam:g}, sigma={config.noise_sigma:g}, seed={config.seed}")
    return ScenarioBundle(
        kind="1d",
        config=config,
        model=model,
        ground_truth=discretize_ground_truth_1d(config.n),
        clean_data=clean,
    )
