"""Exception types shared across the library.

The split matters to the sampler: ``DomainError`` (and its subclasses) marks
points where a parameterization or posterior is undefined, which a sampling
run treats as a divergent transition rather than a crash.  Everything else is
a genuine failure and propagates.
"""

from __future__ import annotations


class StiefelError(Exception):
    """Base class for all library-specific errors."""


class DomainError(StiefelError):
    """A map or density was evaluated outside its valid domain.

    Examples: rank-deficient polar factor, zero Householder direction,
    a non-invertible Cayley pencil, a zero Givens coordinate pair.
    Samplers convert this into a divergence signal.
    """


class SingularMatrixError(DomainError):
    """A linear solve or factorization hit a (numerically) singular matrix."""


class ConvergenceError(StiefelError):
    """An iterative factorization failed to converge."""


class SamplerError(StiefelError):
    """The sampler could not make progress (e.g. warmup diverged throughout)."""


class DegenerateSeriesError(StiefelError):
    """A series statistic was requested for a constant series."""


class ConfigError(StiefelError):
    """A benchmark configuration is invalid; the message names the bad key."""
