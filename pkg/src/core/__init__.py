"""
Core module initialization.
"""

from .errors import (
    SamplerError,
    DomainError,
    NumericalError,
    CancellationError,
    ConsistencyError,
    ConfigurationError,
    NotConvergedError,
)

from .special_functions import (
    LogSigned,
    erfc,
    erfcx,
    erfcinv,
    erfcinv_log,
    log_erfc,
    log_erfcx,
    log_add,
    log_sub,
)

from .expquad_sampler import prepare, log_density, cdf, cdf_inv, sample, sample_overrelaxed

from .operators import (
    LinearOperator,
    MatrixOperator,
    SeparableConvolutionOperator,
    BasisTransform,
    IdentityBasis,
    StepBasis,
    DenseBasis,
    check_adjoint,
    first_difference_matrix,
)

from .posterior_model import (
    PosteriorModel,
    CoefficientCache,
    build_cache,
    conditional_params,
    commit_component,
    refresh,
    log_posterior,
    log_posterior_xi,
)

from .chain_io import ChainWriter, write_chain, read_chain, read_metadata

__all__ = [
    # Errors
    "SamplerError",
    "DomainError",
    "NumericalError",
    "CancellationError",
    "ConsistencyError",
    "ConfigurationError",
    "NotConvergedError",
    # Special functions
    "LogSigned",
    "erfc",
    "erfcx",
    "erfcinv",
    "erfcinv_log",
    "log_erfc",
    "log_erfcx",
    "log_add",
    "log_sub",
    # 1-D conditional sampler
    "prepare",
    "log_density",
    "cdf",
    "cdf_inv",
    "sample",
    "sample_overrelaxed",
    # Operators and bases
    "LinearOperator",
    "MatrixOperator",
    "SeparableConvolutionOperator",
    "BasisTransform",
    "IdentityBasis",
    "StepBasis",
    "DenseBasis",
    "check_adjoint",
    "first_difference_matrix",
    # Posterior
    "PosteriorModel",
    "CoefficientCache",
    "build_cache",
    "conditional_params",
    "commit_component",
    "refresh",
    "log_posterior",
    "log_posterior_xi",
    # Chain dumps
    "ChainWriter",
    "write_chain",
    "read_chain",
    "read_metadata",
]
