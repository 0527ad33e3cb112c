"""Unconstrained parameterizations of the Stiefel manifold V(J, K).

Four coordinate systems map a free vector ``phi`` to an orthonormal J x K
matrix, each with the density adjustment that makes a standard-normal-like
kernel on ``phi`` induce the uniform (Haar) distribution on the manifold:

- ``polar``: overparameterized J*K Gaussian matrix, orthonormalized through
  its polar factor.
- ``householder``: a product of sign-corrected Householder reflections; the
  Gaussian kernel needs no Jacobian term.
- ``cayley``: skew-symmetric coordinates pushed through the Cayley transform;
  the Jacobian is a Gram log-determinant.
- ``givens``: angle coordinates for a product of plane rotations, with each
  angle represented by a 2-d coordinate pair to remove boundary effects.

Every kind exposes the same three-operation surface used by the samplers:
``evaluate`` (map + log adjustment), ``pullback`` (gradient of
``<upsilon_bar, Upsilon(phi)> + adjust_weight * log_adjust(phi)``), and the
``forward``/``backward`` pair that shares work when both are needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cayley, givens, householder, polar

__all__ = [
    "KINDS",
    "ParamSpec",
    "MapResult",
    "param_count",
    "phi_length",
    "origin",
    "evaluate",
    "pullback",
    "forward",
    "backward",
]

KINDS = ("polar", "householder", "cayley", "givens")

_MODULES = {
    "polar": polar,
    "householder": householder,
    "cayley": cayley,
    "givens": givens,
}


@dataclass(frozen=True)
class ParamSpec:
    """A parameterization kind applied to V(J, K).

    ``givens_polar_area`` toggles the optional polar-area term (``+ log r``
    per coordinate pair) in the Givens log adjustment; it only affects the
    auxiliary radius distribution, not the distribution of the mapped matrix,
    and exists for sensitivity checks.
    """

    kind: str
    J: int
    K: int
    givens_polar_area: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown parameterization kind {self.kind!r}")
        if not (isinstance(self.J, int) and isinstance(self.K, int)):
            raise ValueError("J and K must be integers")
        if not (1 <= self.K <= self.J):
            raise ValueError(f"need 1 <= K <= J, got J={self.J}, K={self.K}")
        if self.kind == "cayley" and self.K == self.J:
            raise ValueError(
                "the cayley parameterization requires K < J (the square case "
                "is excluded)"
            )


@dataclass(frozen=True)
class MapResult:
    """Mapped point and its density adjustment.

    ``upsilon`` is J x K with orthonormal columns.  ``log_adjust`` is the log
    factor that multiplies the model posterior in phi-space (Gaussian kernels,
    Jacobian terms); it is ``-inf`` when phi falls in a rejected region.
    """

    upsilon: np.ndarray
    log_adjust: float


def param_count(spec: ParamSpec) -> int:
    """Number of essential parameters of the given kind on V(J, K).

    polar: J*K; householder: J*K - K*(K-1)/2;
    cayley and givens: K*(K-1)/2 + K*(J-K), which equals the manifold
    dimension J*K - K*(K+1)/2.  For givens this counts angle coordinates;
    each is carried by a 2-d pair, so the unconstrained vector has twice
    this length (see :func:`phi_length`).
    """
    j, k = spec.J, spec.K
    if spec.kind == "polar":
        return j * k
    if spec.kind == "householder":
        return j * k - k * (k - 1) // 2
    # cayley / givens
    return k * (k - 1) // 2 + k * (j - k)


def phi_length(spec: ParamSpec) -> int:
    """Length of the unconstrained vector consumed by :func:`evaluate`."""
    n = param_count(spec)
    return 2 * n if spec.kind == "givens" else n


def origin(spec: ParamSpec) -> np.ndarray:
    """An interior point of the map's domain that chains perturb around.

    Zero for polar, householder, and cayley.  The givens domain excludes
    phi = 0 (zero radii) and the half-planes where an exponentiated cosine
    is nonpositive, so its origin is the identity configuration instead
    (theta = 0, r = 1 per pair).
    """
    if spec.kind == "givens":
        return givens.origin_phi(spec.J, spec.K)
    return np.zeros(phi_length(spec))


def _check_phi(spec: ParamSpec, phi) -> np.ndarray:
    phi = np.ascontiguousarray(phi, dtype=float)
    if phi.ndim != 1 or phi.shape[0] != phi_length(spec):
        raise ValueError(
            f"phi must be a vector of length {phi_length(spec)} for "
            f"{spec.kind} on V({spec.J}, {spec.K}), got shape {phi.shape}"
        )
    return phi


def forward(spec: ParamSpec, phi):
    """Evaluate the map, returning ``(MapResult, cache)``.

    The cache holds the intermediates :func:`backward` needs, so a
    value-and-gradient evaluation does the expensive factorizations once.
    """
    phi = _check_phi(spec, phi)
    if spec.kind == "givens":
        upsilon, log_adjust, cache = givens.forward(
            phi, spec.J, spec.K, polar_area=spec.givens_polar_area
        )
    else:
        upsilon, log_adjust, cache = _MODULES[spec.kind].forward(phi, spec.J, spec.K)
    return MapResult(upsilon, log_adjust), cache


def backward(spec: ParamSpec, cache, upsilon_bar, adjust_weight: float = 1.0):
    """Gradient of ``<upsilon_bar, Upsilon(phi)> + adjust_weight * log_adjust``
    with respect to phi, reusing a cache from :func:`forward`."""
    upsilon_bar = np.asarray(upsilon_bar, dtype=float)
    if upsilon_bar.shape != (spec.J, spec.K):
        raise ValueError(
            f"upsilon_bar must have shape ({spec.J}, {spec.K}), "
            f"got {upsilon_bar.shape}"
        )
    return _MODULES[spec.kind].backward(cache, upsilon_bar, float(adjust_weight))


def evaluate(spec: ParamSpec, phi) -> MapResult:
    """Map phi to V(J, K) and return the mapped point with its log adjustment."""
    result, _ = forward(spec, phi)
    return result


def pullback(spec: ParamSpec, phi, upsilon_bar, adjust_weight: float = 1.0):
    """One-call version of :func:`forward` + :func:`backward`."""
    _, cache = forward(spec, phi)
    return backward(spec, cache, upsilon_bar, adjust_weight)
