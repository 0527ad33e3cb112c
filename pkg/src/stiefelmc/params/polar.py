"""Polar expansion: Upsilon is the orthogonal polar factor of a J x K matrix.

phi holds vec(Y) (column-major) for an unconstrained J x K matrix Y.  With the
thin SVD Y = U diag(s) V', the polar factor is Upsilon = U V', and a standard
normal kernel on phi makes Upsilon uniform on V(J, K), so

    log_adjust = -phi'phi / 2

with no Jacobian term.  The gradient of ``<G, Upsilon(Y)>`` goes through
F = (Y'Y)^{1/2}: with Fbar = -sym(F^{-1} Y'G F^{-1}), the Sylvester relation
F Pbar + Pbar F = Fbar (diagonal in the right-singular-vector basis, where F
has eigenvalues s) yields

    d<G, Upsilon>/dY = G F^{-1} + 2 Y Pbar.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from .. import linalg

# Smallest acceptable ratio of extreme singular values before the polar
# factor is declared undefined.
RANK_RTOL = 1e-10


def forward(phi: np.ndarray, J: int, K: int):
    y = phi.reshape((J, K), order="F")
    u, s, vt = linalg.svd(y)
    if s[0] <= 0.0 or s[-1] <= RANK_RTOL * s[0]:
        raise DomainError(
            f"polar factor undefined: matrix is rank deficient "
            f"(singular values in [{s[-1]:.3e}, {s[0]:.3e}])"
        )
    upsilon = u @ vt
    log_adjust = -0.5 * float(phi @ phi)
    cache = (phi, y, s, vt)
    return upsilon, log_adjust, cache


def backward(cache, upsilon_bar: np.ndarray, adjust_weight: float) -> np.ndarray:
    phi, y, s, vt = cache
    v = vt.T
    # Fbar = -sym(F^{-1} Y'G F^{-1}) expressed in the V basis, where
    # F^{-1} = V diag(1/s) V'.
    a_v = v.T @ (y.T @ upsilon_bar) @ v
    fbar_v = -a_v / s[:, None] / s[None, :]
    fbar_v = 0.5 * (fbar_v + fbar_v.T)
    pbar_v = fbar_v / (s[:, None] + s[None, :])
    pbar = v @ pbar_v @ v.T
    grad_y = upsilon_bar @ (v / s) @ v.T + 2.0 * (y @ pbar)
    return grad_y.ravel(order="F") - adjust_weight * phi
