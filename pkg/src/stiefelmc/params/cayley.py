"""Cayley transform coordinates for V(J, K), K < J.

phi = (b, vec(A')) parameterizes the skew-symmetric

    X = [[B, -A'], [A, 0]],

with B the K x K skew matrix whose strict lower triangle (column-major) is b,
and A a (J-K) x K block stored row-major.  The map takes the first K columns
of the Cayley transform:

    Upsilon = (I + X)(I - X)^{-1} I_{JxK} = 2 Z - I_{JxK},
    Z = (I - X)^{-1} I_{JxK}.

Writing C = (I - X)^{-1}, each coordinate c enters X through a two-entry
skew generator W_c = E_{pq} - E_{qp}, and the map differential is
d Upsilon = 2 C dX Z.  The density adjustment is the Gram log-volume of this
differential,

    log_adjust = (1/2) log det(4 T),   T_{cc'} = <C W_c Z, C W_{c'} Z>,

which collapses to gathers from G1 = Z Z' and G2 = C'C:

    T_{cc'} = G2[p,p'] G1[q,q'] - G2[p,q'] G1[q,p']
            - G2[q,p'] G1[p,q'] + G2[q,q'] G1[p,p'].

The gradient of log_adjust contracts S = T^{-1} against the same generator
structure; both terms below reduce to matrix products plus index scatters,
keeping a full value-and-gradient evaluation at O(J^3 + m^3) for
m = dim(phi) = K(K-1)/2 + K(J-K).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from ..errors import DomainError
from .. import linalg

_LOG4 = float(np.log(4.0))


@lru_cache(maxsize=None)
def _indices(J: int, K: int):
    """Generator positions (p_c, q_c) for each coordinate, plus flattened
    scatter index arrays for the four terms of the log-adjust gradient."""
    p = []
    q = []
    # b block: strict lower triangle of B, column-major.
    for col in range(K):
        for row in range(col + 1, K):
            p.append(row)
            q.append(col)
    # A block: vec(A') ordering, i.e. A row-major.
    for row in range(J - K):
        for col in range(K):
            p.append(K + row)
            q.append(col)
    p = np.asarray(p, dtype=np.intp)
    q = np.asarray(q, dtype=np.intp)
    ipp = (p[:, None] * J + p[None, :]).ravel()
    ipq = (p[:, None] * J + q[None, :]).ravel()
    iqp = (q[:, None] * J + p[None, :]).ravel()
    iqq = (q[:, None] * J + q[None, :]).ravel()
    return p, q, ipp, ipq, iqp, iqq


def build_skew(phi: np.ndarray, J: int, K: int) -> np.ndarray:
    """Assemble X = [[B, -A'], [A, 0]] from phi = (b, vec(A'))."""
    p, q = _indices(J, K)[:2]
    x = np.zeros((J, J))
    x[p, q] = phi
    x[q, p] = -phi
    return x


def forward(phi: np.ndarray, J: int, K: int):
    p, q = _indices(J, K)[:2]
    m = phi.shape[0]
    x = build_skew(phi, J, K)
    pencil = np.eye(J) - x
    c = linalg.solve(pencil, np.eye(J))
    z = np.ascontiguousarray(c[:, :K])
    upsilon = 2.0 * z
    upsilon[np.arange(K), np.arange(K)] -= 1.0

    g1 = z @ z.T
    g2 = c.T @ c
    t = (
        g2[np.ix_(p, p)] * g1[np.ix_(q, q)]
        - g2[np.ix_(p, q)] * g1[np.ix_(q, p)]
        - g2[np.ix_(q, p)] * g1[np.ix_(p, q)]
        + g2[np.ix_(q, q)] * g1[np.ix_(p, p)]
    )
    try:
        chol = np.linalg.cholesky(t)
    except np.linalg.LinAlgError as exc:
        raise DomainError(
            f"cayley Jacobian Gram matrix is not positive definite at this "
            f"point (J={J}, K={K})"
        ) from exc
    log_adjust = 0.5 * m * _LOG4 + float(np.log(np.diag(chol)).sum())
    cache = (phi, J, K, c, z, g1, g2, chol)
    return upsilon, log_adjust, cache


def backward(cache, upsilon_bar: np.ndarray, adjust_weight: float) -> np.ndarray:
    phi, J, K, c, z, g1, g2, chol = cache
    p, q, ipp, ipq, iqp, iqq = _indices(J, K)

    # <G, Upsilon> term: d<G, Upsilon>/dphi_r = 2 tr(W_r Z G' C).
    m0 = z @ (upsilon_bar.T @ c)
    grad = 2.0 * (m0[q, p] - m0[p, q])
    if adjust_weight == 0.0:
        return grad

    s = sla.cho_solve((chol, True), np.eye(phi.shape[0]), check_finite=False)

    # Term 1: tr(W_r C Ntil G2) with Ntil assembled from S against G1 gathers.
    jj = J * J
    ntil = (
        np.bincount(ipp, weights=(s * g1[np.ix_(q, q)]).ravel(), minlength=jj)
        - np.bincount(ipq, weights=(s * g1[np.ix_(q, p)]).ravel(), minlength=jj)
        - np.bincount(iqp, weights=(s * g1[np.ix_(p, q)]).ravel(), minlength=jj)
        + np.bincount(iqq, weights=(s * g1[np.ix_(p, p)]).ravel(), minlength=jj)
    ).reshape(J, J)
    m1 = c @ ntil @ g2
    adj = m1[q, p] - m1[p, q]

    # Term 2: tr(W_r Z A2 C) with A2 accumulated from S against G2 gathers.
    zq = z[q]
    zp = z[p]
    alpha = (s * g2[np.ix_(p, p)]) @ zq - (s * g2[np.ix_(p, q)]) @ zp
    beta = (s * g2[np.ix_(q, p)]) @ zq - (s * g2[np.ix_(q, q)]) @ zp
    a2t = np.zeros((J, K))
    for col in range(K):
        a2t[:, col] = np.bincount(q, weights=alpha[:, col], minlength=J) - np.bincount(
            p, weights=beta[:, col], minlength=J
        )
    m2 = z @ (a2t.T @ c)
    adj += m2[q, p] - m2[p, q]

    return grad + adjust_weight * adj
