"""
Scenario configuration models for the 1-D and 2-D deblurring problems.
"""

import math
from typing import Any, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, validator

LAMBDA_RULE_HELP = "fixed:<value> | scaled | table (alias table-value)"


def parse_lambda_rule(rule: str) -> Tuple[str, Optional[float]]:
    """Split 'fixed:400' into ('fixed', 400.0); 'scaled' and 'table' (or 'table-value') carry no value."""
    rule = rule.strip().lower()
    if rule in ("table", "table-value"):
        return "table", None
    if rule == "scaled":
        return rule, None
    if rule.startswith("fixed:"):
        value = float(rule.split(":", 1)[1])
        if not (value > 0 and math.isfinite(value)):
            raise ValueError("fixed lambda must be positive")
        return "fixed", value
    raise ValueError(f"Unknown lambda rule {rule!r}; expected {LAMBDA_RULE_HELP}")


class Scenario1dConfig(BaseModel):
    """1-D CCD-style deblurring with a total-variation prior."""
    L_m: int = 5
    L_u: int
    lambda_rule: str = "scaled"
    noise_sigma: float = 0.001
    seed: int = 0

    @validator("L_m")
    def check_L_m(cls, v):
        if v < 2:
            raise ValueError("L_m must be >= 2")
        return v

    @validator("L_u")
    def check_L_u(cls, v, values):
        L_m = values.get("L_m")
        if L_m is not None and v <= L_m:
            raise ValueError("L_u must exceed L_m")
        return v

    @validator("lambda_rule")
    def check_rule(cls, v):
        parse_lambda_rule(v)
        return v

    @validator("noise_sigma")
    def check_sigma(cls, v):
        if not v > 0:
            raise ValueError("noise_sigma must be positive")
        return v

    @property
    def n(self) -> int:
        return 2 ** self.L_u - 1

    @property
    def k(self) -> int:
        return 2 ** self.L_m - 2

    @property
    def h(self) -> float:
        return 1.0 / (self.n + 1)


class Spot(BaseModel):
    """Disc of constant intensity in the unit square."""
    center_x: float
    center_y: float
    radius: float
    intensity: float

    @validator("radius")
    def check_radius(cls, v):
        if not v > 0:
            raise ValueError("radius must be positive")
        return v


class Scenario2dConfig(BaseModel):
    """2-D Gaussian deblurring with an impulse (D = I) prior."""
    grid: int = 511
    blur_sigma: float = 0.015
    rel_noise: float = 0.1
    fine_factor: int = 4
    lambda_value: float = 10.0
    spots: Optional[List[Spot]] = None  # None -> seeded default phantom
    n_spots: int = 12
    radius_range: Tuple[float, float] = (0.03, 0.06)
    intensity_range: Tuple[float, float] = (0.8, 1.2)
    seed: int = 0

    @validator("grid")
    def check_grid(cls, v):
        if v < 3 or v % 2 == 0:
            raise ValueError("grid must be odd and >= 3")
        return v

    @validator("fine_factor")
    def check_fine(cls, v):
        if v < 2:
            raise ValueError("fine_factor must be >= 2")
        return v

    @validator("blur_sigma", "lambda_value")
    def check_positive(cls, v):
        if not v > 0:
            raise ValueError("blur_sigma and lambda_value must be positive")
        return v

    @validator("rel_noise")
    def check_noise(cls, v):
        if not v > 0:
            raise ValueError("rel_noise must be positive")
        return v

    @property
    def n(self) -> int:
        return self.grid * self.grid


class ScenarioBundle(BaseModel):
    """A built scenario: posterior model plus the arrays it was generated from."""
    kind: Literal["1d", "2d"]
    config: Union[Scenario1dConfig, Scenario2dConfig]
    model: Any  # PosteriorModel
    ground_truth: np.ndarray
    clean_data: np.ndarray
    spots: List[Spot] = Field(default_factory=list)

    class Config:
        arbitrary_types_allowed = True

    @property
    def shape(self) -> Tuple[int, ...]:
        """Display shape of u: (n,) in 1-D, (grid, grid) in 2-D."""
        if self.kind == "2d":
            return (self.config.grid, self.config.grid)
        return (self.config.n,)
