"""Compiled scan kernels for the Givens rotation product.

The rotation product is a long sequential scan of tiny 2-row updates, which
is pathological for vectorized numpy but trivial for a compiled loop.  Both
kernels are deterministic elementwise arithmetic; ``cache=True`` persists the
compiled artifacts next to this file so worker processes reuse them.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def rotation_forward(theta, kidx, jidx, J, K):
    """Apply the rotation product to I_{JxK}, recording the two rows each
    rotation consumed (needed by the reverse-mode pass).

    Rotations are listed in product order (leftmost first); application
    walks the list backwards so the last-listed rotation acts first.
    """
    n = theta.shape[0]
    m = np.zeros((J, K))
    for d in range(K):
        m[d, d] = 1.0
    rows_k = np.empty((n, K))
    rows_j = np.empty((n, K))
    for t in range(n - 1, -1, -1):
        k = kidx[t]
        j = jidx[t]
        c = np.cos(theta[t])
        s = np.sin(theta[t])
        for col in range(K):
            a = m[k, col]
            b = m[j, col]
            rows_k[t, col] = a
            rows_j[t, col] = b
            m[k, col] = c * a + s * b
            m[j, col] = -s * a + c * b
    return m, rows_k, rows_j


@numba.njit(cache=True)
def rotation_backward(theta, kidx, jidx, rows_k, rows_j, cot, J, K):
    """Reverse-mode pass: angle gradients of <cot, Upsilon(theta)>.

    ``cot`` is consumed as the cotangent of the final product and pulled
    back through each rotation in reverse application order.
    """
    n = theta.shape[0]
    g = cot.copy()
    dtheta = np.zeros(n)
    for t in range(n):
        k = kidx[t]
        j = jidx[t]
        c = np.cos(theta[t])
        s = np.sin(theta[t])
        acc = 0.0
        for col in range(K):
            a = rows_k[t, col]
            b = rows_j[t, col]
            gk = g[k, col]
            gj = g[j, col]
            # d/dtheta of the updated rows: row_k -> -s*a + c*b,
            # row_j -> -c*a - s*b.
            acc += gk * (-s * a + c * b) + gj * (-c * a - s * b)
            # Pull the cotangent through R': rows mix with the transpose.
            g[k, col] = c * gk - s * gj
            g[j, col] = s * gk + c * gj
        dtheta[t] = acc
    return dtheta
