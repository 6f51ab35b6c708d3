"""
Models package - configuration schemas, chain records and hot-path parameter tuples.
"""

# Conditional density parameters
from .params import ExpQuadParams, NormalizationTerms

# Sampler and chain configuration
from .config import (
    MhConfig, GibbsConfig, HierarchicalConfig, ChainConfig, SamplerSpec
)

# Chains and diagnostic results
from .chain import Chain, AcfResult, LagResult, TestFunction, BurnInCurve

# Scenarios
from .scenario import (
    Scenario1dConfig, Scenario2dConfig, Spot, ScenarioBundle, parse_lambda_rule
)

# Provenance
from .manifest import RunManifest, format_key_values, parse_key_values

__all__ = [
    # Params
    "ExpQuadParams",
    "NormalizationTerms",
    # Config
    "MhConfig",
    "GibbsConfig",
    "HierarchicalConfig",
    "ChainConfig",
    "SamplerSpec",
    # Chain
    "Chain",
    "AcfResult",
    "LagResult",
    "TestFunction",
    "BurnInCurve",
    # Scenario
    "Scenario1dConfig",
    "Scenario2dConfig",
    "Spot",
    "ScenarioBundle",
    "parse_lambda_rule",
    # Manifest
    "RunManifest",
    "format_key_values",
    "parse_key_values",
]
