"""Gradient-based MCMC on the Stiefel manifold.

Unconstrained parameterizations (polar, householder, cayley, givens) of
orthonormal-column matrices, posterior models over them, a No-U-Turn sampler,
effective-sample-size diagnostics, and a benchmark harness comparing the
parameterizations' sampling efficiency.
"""

from .compose import UnconstrainedTarget, build_unconstrained
from .diagnostics import EssReport, autocovariance, ess_univariate, min_ess_report
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateSeriesError,
    DomainError,
    SamplerError,
    SingularMatrixError,
    StiefelError,
)
from .nuts import ChainResult, SamplerConfig, mix_seed, sample
from .params import (
    KINDS,
    MapResult,
    ParamSpec,
    backward,
    evaluate,
    forward,
    param_count,
    phi_length,
    pullback,
)
from .targets import (
    EigenmodelTarget,
    MatrixCompletionTarget,
    PpcaTarget,
    UniformTarget,
)

__all__ = [
    "KINDS",
    "MapResult",
    "ParamSpec",
    "backward",
    "evaluate",
    "forward",
    "param_count",
    "phi_length",
    "pullback",
    "UnconstrainedTarget",
    "build_unconstrained",
    "UniformTarget",
    "EigenmodelTarget",
    "PpcaTarget",
    "MatrixCompletionTarget",
    "SamplerConfig",
    "ChainResult",
    "sample",
    "mix_seed",
    "EssReport",
    "autocovariance",
    "ess_univariate",
    "min_ess_report",
    "StiefelError",
    "DomainError",
    "SingularMatrixError",
    "ConvergenceError",
    "SamplerError",
    "DegenerateSeriesError",
    "ConfigError",
]

__version__ = "0.1.0"
