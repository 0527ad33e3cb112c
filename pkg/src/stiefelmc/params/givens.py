"""Givens rotation coordinates with 2-d angle pairs.

Upsilon is a product of plane rotations applied to I_{JxK},

    Upsilon = R_{1,2} R_{1,3} ... R_{1,J} R_{2,3} ... R_{K,J} I_{JxK},

one rotation per index pair (k, j), k = 1..K, j = k+1..J (the rightmost
rotation acts first).  R_{k,j} is the standard Givens rotation: identity
except rows/columns k and j, where it applies
[[cos t, sin t], [-sin t, cos t]] to rows (k, j).

Each angle is carried by a coordinate pair (fb, fs) with r = hypot(fb, fs)
and theta = atan2(fs, fb), which removes the angular boundary.  The log
adjustment combines the rotation-volume term with a Gaussian kernel on the
radii,

    log_adjust = sum_(k,j) (j - k - 1) log cos(theta_kj)
               + sum_(k,j) log N(r_kj | 1, 0.1^2),

and is -inf where an angle with a positive exponent has cos(theta) <= 0.
The exponent j - k - 1 is the convention under which the analytic term
matches the Gram log-volume of the map over theta-space up to the constant
K(K-1)/2 * log(sqrt 2): pairs with j <= K rotate two active columns and
contribute tangent norm sqrt(2).  Both the convention and the constant are
pinned by finite-difference tests at (J, K) = (4, 2) and (5, 3).  The
polar-area variant adds log r per pair; it retunes the radius distribution
only and leaves the distribution of Upsilon unchanged.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..errors import DomainError
from ._givens_kernels import rotation_backward, rotation_forward

# Radius kernel: r ~ N(R_LOC, R_SCALE^2).
R_LOC = 1.0
R_SCALE = 0.1
MIN_RADIUS = 1e-300

_R_LOGNORM = -0.5 * np.log(2.0 * np.pi * R_SCALE**2)


@lru_cache(maxsize=None)
def _pairs(J: int, K: int):
    """(k, j) index arrays (0-based, product order) and cos-power exponents."""
    kk = []
    jj = []
    for k in range(K):
        for j in range(k + 1, J):
            kk.append(k)
            jj.append(j)
    kidx = np.asarray(kk, dtype=np.intp)
    jidx = np.asarray(jj, dtype=np.intp)
    expo = (jidx - kidx - 1).astype(float)
    return kidx, jidx, expo


def pair_count(J: int, K: int) -> int:
    return K * (K - 1) // 2 + K * (J - K)


def origin_phi(J: int, K: int) -> np.ndarray:
    """The identity configuration: theta = 0, r = 1 for every pair.

    Unlike the other coordinate systems, phi = 0 is outside this map's
    domain (zero radii, undefined angles), so chains start from small
    perturbations of this point instead of the zero vector.
    """
    phi = np.zeros(2 * pair_count(J, K))
    phi[0::2] = 1.0
    return phi


def upsilon_from_theta(theta: np.ndarray, J: int, K: int) -> np.ndarray:
    """The rotation product alone, as a function of the angles."""
    kidx, jidx, _ = _pairs(J, K)
    theta = np.ascontiguousarray(theta, dtype=float)
    if theta.shape != kidx.shape:
        raise ValueError(
            f"expected {kidx.shape[0]} angles for V({J}, {K}), got {theta.shape}"
        )
    m, _, _ = rotation_forward(theta, kidx, jidx, J, K)
    return m


def rotation_log_volume(theta: np.ndarray, J: int, K: int) -> float:
    """sum (j - k - 1) log cos(theta_kj); -inf outside the cos > 0 region.

    This is the geometric part of the log adjustment: the Gram log-volume of
    d Upsilon / d theta minus the constant K(K-1)/2 * log(sqrt 2).
    """
    _, _, expo = _pairs(J, K)
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)
    pos = expo > 0
    if np.any(c[pos] <= 0.0):
        return float("-inf")
    return float(expo[pos] @ np.log(c[pos]))


def forward(phi: np.ndarray, J: int, K: int, polar_area: bool = False):
    kidx, jidx, expo = _pairs(J, K)
    fb = np.ascontiguousarray(phi[0::2])
    fs = np.ascontiguousarray(phi[1::2])
    r = np.hypot(fb, fs)
    if np.any(r < MIN_RADIUS):
        raise DomainError("givens coordinate pair at the origin: angle undefined")
    theta = np.arctan2(fs, fb)
    upsilon, rows_k, rows_j = rotation_forward(theta, kidx, jidx, J, K)

    log_volume = rotation_log_volume(theta, J, K)
    log_adjust = log_volume + float(
        np.sum(_R_LOGNORM - 0.5 * ((r - R_LOC) / R_SCALE) ** 2)
    )
    if polar_area:
        log_adjust += float(np.log(r).sum())
    cache = (fb, fs, r, theta, rows_k, rows_j, J, K, polar_area)
    return upsilon, log_adjust, cache


def backward(cache, upsilon_bar: np.ndarray, adjust_weight: float) -> np.ndarray:
    fb, fs, r, theta, rows_k, rows_j, J, K, polar_area = cache
    kidx, jidx, expo = _pairs(J, K)
    dtheta = rotation_backward(
        theta, kidx, jidx, rows_k, rows_j, np.ascontiguousarray(upsilon_bar), J, K
    )
    if adjust_weight != 0.0:
        c = np.cos(theta)
        s = np.sin(theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            dtheta = dtheta + adjust_weight * np.where(expo > 0, -expo * s / c, 0.0)
        dr = adjust_weight * (-(r - R_LOC) / R_SCALE**2)
        if polar_area:
            dr = dr + adjust_weight / r
    else:
        dr = np.zeros_like(r)
    r2 = r * r
    gb = dtheta * (-fs / r2) + dr * (fb / r)
    gs = dtheta * (fb / r2) + dr * (fs / r)
    grad = np.empty(2 * r.shape[0])
    grad[0::2] = gb
    grad[1::2] = gs
    return grad
