"""
2-D Gaussian deblurring of circular spots with an impulse prior (D = I, V = I).

Reconstruction pixels are the grid x grid cells of the unit square with
centers at ((i + 1/2) / grid, (j + 1/2) / grid). Data are generated on a
grid refined fine_factor times: the phantom is rendered there, blurred with
a reflective Gaussian filter and block-averaged back to the coarse pixels.
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np
from scipy import ndimage, sparse

from core.errors import ConfigurationError
from core.operators import IdentityBasis, SeparableConvolutionOperator
from core.posterior_model import PosteriorModel
from models.scenario import Scenario2dConfig, ScenarioBundle, Spot

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)
logger = logging.getLogger(__name__)

PHANTOM_MAX_TRIES = 10000
RENDER_SUPERSAMPLE = 4
FILTER_TRUNCATE = 4.0


def default_phantom(
    rng: np.random.Generator,
    n_spots: int = 12,
    radius_range: Tuple[float, float] = (0.03, 0.06),
    intensity_range: Tuple[float, float] = (0.8, 1.2),
) -> List[Spot]:
    """Non-overlapping discs inside the unit square, placed by rejection."""
    spots: List[Spot] = []
    tries = 0
    while len(spots) < n_spots:
        tries += 1
        if tries > PHANTOM_MAX_TRIES:
            raise ConfigurationError("Could not place non-overlapping spots", {"placed": len(spots), "wanted": n_spots})
        radius = rng.uniform(*radius_range)
        cx, cy = rng.uniform(radius, 1.0 - radius, size=2)
        if any(np.hypot(cx - s.center_x, cy - s.center_y) < radius + s.radius for s in spots):
            continue
        spots.append(Spot(center_x=cx, center_y=cy, radius=radius, intensity=rng.uniform(*intensity_range)))
    return spots


def render_phantom(spots: Sequence[Spot], grid: int, supersample: int = 1) -> np.ndarray:
    """Mean intensity per pixel, from supersample^2 point samples each.

    Rows index y, columns index x.
    """
    fine = grid * supersample
    centers = (np.arange(fine) + 0.5) / fine
    x, y = np.meshgrid(centers, centers)
    image = np.zeros((fine, fine))
    for s in spots:
        inside = (x - s.center_x) ** 2 + (y - s.center_y) ** 2 <= s.radius ** 2
        image[inside] = s.intensity
    if supersample > 1:
        image = block_average(image, supersample)
    return image


def block_average(image: np.ndarray, factor: int) -> np.ndarray:
    rows, cols = image.shape
    return image.reshape(rows // factor, factor, cols // factor, factor).mean(axis=(1, 3))


def clean_data_2d(spots: Sequence[Spot], config: Scenario2dConfig) -> np.ndarray:
    """Blur on the refined grid, then integrate over the coarse pixels."""
    fine_grid = config.grid * config.fine_factor
    fine = render_phantom(spots, fine_grid, RENDER_SUPERSAMPLE)
    sigma_px = config.blur_sigma * fine_grid
    blurred = ndimage.gaussian_filter(fine, sigma=sigma_px, mode="reflect", truncate=FILTER_TRUNCATE)
    return block_average(blurred, config.fine_factor)


def operator_2d(config: Scenario2dConfig):
    """(A, D, V) for the configuration; data-independent."""
    return (
        SeparableConvolutionOperator(config.grid, config.blur_sigma),
        sparse.identity(config.n, format="csr"),
        IdentityBasis(config.n),
    )


def build_2d(config: Scenario2dConfig) -> ScenarioBundle:
    """Posterior model, ground truth and clean data of the 2-D problem."""
    operator, prior_matrix, basis = operator_2d(config)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    spots = list(config.spots) if config.spots is not None else default_phantom(
        rng, config.n_spots, config.radius_range, config.intensity_range
    )
    if not spots:
        raise ConfigurationError("Phantom has no spots", {})

    clean = clean_data_2d(spots, config)
    peak = float(clean.max())
    if not peak > 0:
        raise ConfigurationError("Clean data are identically zero", {"spots": len(spots)})
    noise_sigma = config.rel_noise * peak
    data = clean + noise_sigma * rng.standard_normal(clean.shape)

    model = PosteriorModel(
        operator=operator,
        data=data.ravel(),
        noise_sigma=noise_sigma,
        lambda_value=config.lambda_value,
        prior_matrix=prior_matrix,
        basis=basis,
    )
    ground_truth = render_phantom(spots, config.grid, config.fine_factor)
    logger.info(
        f"[SCENARIO] 2-D deblurring: grid={config.grid}, spots={len(spots)}, "
        f"blur={config.blur_sigma:g}, sigma={noise_sigma:.4g}, lambda={config.lambda_value:g}, seed={config.seed}"
    )
    return ScenarioBundle(
        kind="2d",
        config=config,
        model=model,
        ground_truth=ground_truth.ravel(),
        clean_data=clean.ravel(),
        spots=spots,
    )
