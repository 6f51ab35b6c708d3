"""
Scenarios package - the 1-D TV and 2-D impulse-prior deblurring problems.
"""

from .lambda_schedule import lambda_schedule, scaled_lambda, LAMBDA_TABLE
from .deblur_1d import build_1d, discretize_ground_truth_1d, forward_matrix_1d
from .deblur_2d import build_2d, default_phantom, render_phantom
from .scenario_io import save_scenario, load_scenario

__all__ = [
    # Prior weight
    "lambda_schedule",
    "scaled_lambda",
    "LAMBDA_TABLE",
    # Builders
    "build_1d",
    "discretize_ground_truth_1d",
    "forward_matrix_1d",
    "build_2d",
    "default_phantom",
    "render_phantom",
    # Persistence
    "save_scenario",
    "load_scenario",
]
