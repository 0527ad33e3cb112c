"""Dense linear algebra with explicit failure semantics.

Thin wrappers around LAPACK (via numpy) that pin down the error behavior the
rest of the library relies on: singularity and non-convergence surface as
typed exceptions carrying the matrix dimensions, and every routine's accuracy
contract is collected in one tolerance record so tests and callers agree on
the numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, SingularMatrixError

__all__ = ["Tolerances", "TOL", "svd", "sym_eig", "solve", "inv_sqrt_sym"]


@dataclass(frozen=True)
class Tolerances:
    """Accuracy and singularity thresholds used by :mod:`stiefelmc.linalg`.

    svd_reconstruction_rtol
        ``||U diag(s) Vt - A||_F <= rtol * ||A||_F`` for :func:`svd`.
    eig_orthonormality_tol
        ``||V.T V - I||_max`` bound for :func:`sym_eig` eigenvectors.
    eig_reconstruction_tol
        ``||V diag(w) V.T - S||_max / ||S||_F`` bound for :func:`sym_eig`.
    solve_residual_rtol
        ``||A X - B||_F <= rtol * ||B||_F`` bound for :func:`solve`.
    solve_pivot_rtol
        a pivot below ``rtol * ||A||_inf`` counts as singular in :func:`solve`.
    inv_sqrt_residual_tol
        ``||M P M - I||_max`` bound for :func:`inv_sqrt_sym`.
    inv_sqrt_eigratio_floor
        smallest acceptable eigenvalue ratio ``w_min / w_max`` before
        :func:`inv_sqrt_sym` declares the input singular.
    """

    svd_reconstruction_rtol: float = 1e-10
    eig_orthonormality_tol: float = 1e-12
    eig_reconstruction_tol: float = 1e-10
    solve_residual_rtol: float = 1e-10
    solve_pivot_rtol: float = 1e-14
    inv_sqrt_residual_tol: float = 1e-8
    inv_sqrt_eigratio_floor: float = 1e-12


TOL = Tolerances()


def _as_matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin singular value decomposition ``A = U diag(s) Vt``.

    Returns
    -------
    (U, s, Vt)
        ``U`` is ``m x r``, ``s`` descending, ``Vt`` is ``r x n`` with
        ``r = min(m, n)``.

    Raises
    ------
    ConvergenceError
        If the underlying iteration does not converge; the message names the
        matrix dimensions.
    """
    a = _as_matrix(a, "a")
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(
            f"SVD did not converge for a {a.shape[0]} x {a.shape[1]} matrix"
        ) from exc
    return u, s, vt


def sym_eig(s) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix, ``S = V diag(w) V.T``.

    The input is symmetrized (``(S + S.T) / 2``) before factorization, so
    slight asymmetry from accumulated round-off is tolerated.  Eigenvalues are
    returned in ascending order.
    """
    s = _as_matrix(s, "s")
    if s.shape[0] != s.shape[1]:
        raise ValueError(f"s must be square, got shape {s.shape}")
    sym = 0.5 * (s + s.T)
    try:
        w, v = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(
            f"symmetric eigendecomposition did not converge for a "
            f"{s.shape[0]} x {s.shape[1]} matrix"
        ) from exc
    return w, v


def solve(a, b) -> np.ndarray:
    """Solve ``A X = B`` for square ``A`` with partial-pivot LU.

    Raises
    ------
    SingularMatrixError
        If a pivot falls below ``solve_pivot_rtol * ||A||_inf``.
    """
    a = _as_matrix(a, "a")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"a must be square, got shape {a.shape}")
    b_arr = np.asarray(b, dtype=float)
    squeeze = b_arr.ndim == 1
    b2 = b_arr[:, None] if squeeze else b_arr
    if b2.shape[0] != a.shape[0]:
        raise ValueError(f"b has {b2.shape[0]} rows, expected {a.shape[0]}")

    import warnings

    import scipy.linalg as sla

    with warnings.catch_warnings():
        # lu_factor warns on exact singularity; the pivot check below turns
        # that case into a typed error, so the warning is redundant.
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    norm_a = np.abs(a).sum(axis=1).max() if a.size else 0.0
    pivots = np.abs(np.diag(lu))
    if a.size and (pivots.min() <= TOL.solve_pivot_rtol * norm_a):
        raise SingularMatrixError(
            f"matrix of shape {a.shape} is singular to working precision "
            f"(min pivot {pivots.min():.3e}, ||A||_inf {norm_a:.3e})"
        )
    x = sla.lu_solve((lu, piv), b2, check_finite=False)
    return x[:, 0] if squeeze else x


def inv_sqrt_sym(p) -> np.ndarray:
    """Inverse symmetric square root ``M = P^{-1/2}`` of an SPD matrix.

    Computed through the eigendecomposition of ``P``; satisfies
    ``M P M = I`` to ``inv_sqrt_residual_tol``.

    Raises
    ------
    SingularMatrixError
        If the eigenvalue ratio ``w_min / w_max`` falls below
        ``inv_sqrt_eigratio_floor`` (or any eigenvalue is non-positive).
    """
    w, v = sym_eig(p)
    w_max = w[-1]
    if w_max <= 0.0 or w[0] <= 0.0 or w[0] / w_max < TOL.inv_sqrt_eigratio_floor:
        raise SingularMatrixError(
            f"matrix of shape {np.shape(p)} is not safely positive definite "
            f"(eigenvalue range [{w[0]:.3e}, {w_max:.3e}])"
        )
    return (v / np.sqrt(w)) @ v.T
