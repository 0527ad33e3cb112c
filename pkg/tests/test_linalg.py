"""Dense linear algebra wrappers: accuracy contracts and failure semantics."""

import numpy as np
import pytest

from stiefelmc import linalg
from stiefelmc.errors import SingularMatrixError

from conftest import philox


def test_svd_reconstructs_and_orders():
    rng = philox(1)
    for m, n in [(5, 3), (3, 5), (7, 7), (1, 4)]:
        a = rng.standard_normal((m, n))
        u, s, vt = linalg.svd(a)
        r = min(m, n)
        assert u.shape == (m, r) and s.shape == (r,) and vt.shape == (r, n)
        assert np.all(np.diff(s) <= 0)
        err = np.linalg.norm(u @ np.diag(s) @ vt - a) / np.linalg.norm(a)
        assert err <= linalg.TOL.svd_reconstruction_rtol


def test_svd_rejects_bad_input():
    with pytest.raises(ValueError):
        linalg.svd(np.ones(3))
    with pytest.raises(ValueError):
        linalg.svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_sym_eig_contract():
    rng = philox(2)
    a = rng.standard_normal((6, 6))
    s = a + a.T
    w, v = linalg.sym_eig(s)
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs(v.T @ v - np.eye(6))) <= linalg.TOL.eig_orthonormality_tol
    rec = np.max(np.abs((v * w) @ v.T - s)) / np.linalg.norm(s)
    assert rec <= linalg.TOL.eig_reconstruction_tol


def test_sym_eig_tolerates_roundoff_asymmetry():
    rng = philox(3)
    a = rng.standard_normal((4, 4))
    s = a + a.T
    skewed = s + 1e-14 * rng.standard_normal((4, 4))
    w1, _ = linalg.sym_eig(s)
    w2, _ = linalg.sym_eig(skewed)
    assert np.allclose(w1, w2, atol=1e-12)
    with pytest.raises(ValueError):
        linalg.sym_eig(rng.standard_normal((3, 4)))


def test_solve_residual_and_singularity():
    rng = philox(4)
    a = rng.standard_normal((8, 8)) + 8 * np.eye(8)
    b = rng.standard_normal((8, 3))
    x = linalg.solve(a, b)
    assert np.linalg.norm(a @ x - b) <= linalg.TOL.solve_residual_rtol * np.linalg.norm(b)

    v = rng.standard_normal(8)
    xv = linalg.solve(a, v)
    assert xv.shape == (8,)
    assert np.allclose(a @ xv, v, atol=1e-10)

    singular = np.ones((3, 3))
    with pytest.raises(SingularMatrixError):
        linalg.solve(singular, np.ones(3))
    with pytest.raises(ValueError):
        linalg.solve(rng.standard_normal((3, 4)), np.ones(3))
    with pytest.raises(ValueError):
        linalg.solve(a, rng.standard_normal(7))


def test_inv_sqrt_sym_inverts():
    rng = philox(5)
    b = rng.standard_normal((6, 6))
    p = b @ b.T + 6 * np.eye(6)
    m = linalg.inv_sqrt_sym(p)
    assert np.max(np.abs(m @ p @ m - np.eye(6))) <= linalg.TOL.inv_sqrt_residual_tol
    assert np.allclose(m, m.T, atol=1e-12)


def test_inv_sqrt_sym_rejects_singular():
    u = np.ones((3, 3))  # rank one
    with pytest.raises(SingularMatrixError):
        linalg.inv_sqrt_sym(u)
    with pytest.raises(SingularMatrixError):
        linalg.inv_sqrt_sym(-np.eye(3))


def test_tolerance_record_is_frozen():
    with pytest.raises(Exception):
        linalg.TOL.svd_reconstruction_rtol = 1.0
