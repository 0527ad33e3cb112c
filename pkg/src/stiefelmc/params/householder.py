"""Householder factorization: Upsilon as a product of reflectors.

phi concatenates direction vectors (v_J, v_{J-1}, ..., v_{J-K+1}) with
v_n in R^n, applied as

    Upsilon = H_J(v_J) H_{J-1}(v_{J-1}) ... H_{J-K+1}(v_{J-K+1}) I_{JxK},

where H_n embeds an n x n block in the lower-right corner of I_J:

    Htilde_n = I_n - 2 u_n u_n',  u_n = w_n / ||w_n||,  w_n = v_n - ||v_n|| e_1,

so that Htilde_n e_1 = v_n / ||v_n||.  This sign choice keeps the map smooth
everywhere except the ray v_n = +||v_n|| e_1 (where the reflector degenerates
to the identity); the opposite choice would put the discontinuity of the
trailing columns on the whole hyperplane v_n1 = 0, which a sampler crossing
it reads as a density cliff.  w_n1 is computed cancellation-free near the
ray.  Independent standard normal v_n make Upsilon uniform on V(J, K), so
log_adjust = -phi'phi / 2 with no Jacobian term.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError

# Directions shorter than this are rejected as degenerate.
MIN_NORM = 1e-300


def _block_offsets(J: int, K: int):
    # Block i (i = 0 .. K-1) stores v_{J-i}, of length J - i.
    offsets = []
    off = 0
    for i in range(K):
        offsets.append(off)
        off += J - i
    return offsets


def _reflector(v: np.ndarray, nv: float):
    """Unit u with (I - 2uu') e_1 = v/||v||, or None on the degenerate ray."""
    w = v.copy()
    if v[0] > 0.0:
        # v_1 - ||v|| loses precision when v is nearly parallel to e_1;
        # rewrite it through the perpendicular norm.
        perp2 = float(v[1:] @ v[1:])
        if perp2 == 0.0:
            return None, 0.0
        w[0] = -perp2 / (v[0] + nv)
    else:
        w[0] = v[0] - nv
    wnorm = float(np.linalg.norm(w))
    return w / wnorm, wnorm


def forward(phi: np.ndarray, J: int, K: int):
    offsets = _block_offsets(J, K)
    m = np.eye(J, K)
    steps = []
    # Application order: n = J-K+1 first (block index K-1), n = J last.
    for i in range(K - 1, -1, -1):
        n = J - i
        v = phi[offsets[i] : offsets[i] + n]
        nv = float(np.linalg.norm(v))
        if nv < MIN_NORM:
            raise DomainError(
                f"householder direction v_{n} has norm below {MIN_NORM:g}"
            )
        u, wnorm = _reflector(v, nv)
        if u is None:
            # v on the ray: the reflector is the identity, nothing to apply.
            steps.append((i, v, nv, None, 0.0, None))
            continue
        x = m[i:, :].copy()
        m[i:, :] = x - 2.0 * np.outer(u, u @ x)
        steps.append((i, v, nv, u, wnorm, x))
    log_adjust = -0.5 * float(phi @ phi)
    cache = (phi, J, K, offsets, steps)
    return m, log_adjust, cache


def backward(cache, upsilon_bar: np.ndarray, adjust_weight: float) -> np.ndarray:
    phi, J, K, offsets, steps = cache
    grad = -adjust_weight * phi
    gm = upsilon_bar.copy()
    # Reverse the application order recorded in steps.
    for i, v, nv, u, wnorm, x in reversed(steps):
        if u is None:
            continue  # identity reflector: no v-gradient beyond the adjustment
        b = gm[i:, :]
        grad_u = -2.0 * (x @ (u @ b) + b @ (u @ x))
        gm[i:, :] = b - 2.0 * np.outer(u, u @ b)
        grad_w = (grad_u - u * (u @ grad_u)) / wnorm
        # w = v - ||v|| e_1, so dw/dv = I - e_1 (v/||v||)'.
        grad_v = grad_w - (grad_w[0] / nv) * v
        grad[offsets[i] : offsets[i] + (J - i)] += grad_v
    return grad
