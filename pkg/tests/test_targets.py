"""Posterior models: frozen single-point oracles, invariances, and gradients.

Oracle values are computed independently (closed forms, math.erfc, dense
Gaussian evaluation) and frozen here, never read back from the implementation.
"""

import math

import numpy as np
import pytest
import scipy.stats

from stiefelmc import targets
from stiefelmc.compose import build_unconstrained
from stiefelmc.errors import DomainError

from conftest import fd_gradient, philox, rel_err, seeded_interior_point


# --- stable log normal CDF -------------------------------------------------------

def _log_phi_oracle(x):
    # independent route: erfc from libm, exact to ~1e-15 down to x ~ -37.
    # For x > 0 the result is log of a value near 1; go through log1p of the
    # complementary tail so relative precision survives.
    if x > 0:
        return math.log1p(-0.5 * math.erfc(x / math.sqrt(2.0)))
    return math.log(0.5 * math.erfc(-x / math.sqrt(2.0)))


def test_log_normal_cdf_frozen_points():
    assert targets.log_normal_cdf(0.0) == pytest.approx(-math.log(2.0), abs=1e-15)
    # deep tail: no underflow, matches the frozen value and the asymptotic
    # expansion -x^2/2 - log(-x sqrt(2 pi)) + log(1 - 1/x^2)
    v = targets.log_normal_cdf(-30.0)
    assert v == pytest.approx(-454.32124395634327, rel=1e-12)
    asym = -450.0 - math.log(30.0 * math.sqrt(2 * math.pi)) + math.log1p(-1 / 900.0)
    assert v == pytest.approx(asym, abs=1e-4)
    assert targets.log_normal_cdf(5.0) == pytest.approx(_log_phi_oracle(5.0), rel=1e-10)


def test_log_normal_cdf_accuracy_across_range():
    xs = np.concatenate([
        np.linspace(-37.0, -10.0, 41),
        np.linspace(-10.0, 8.0, 73),
    ])
    for x in xs:
        got = targets.log_normal_cdf(float(x))
        want = _log_phi_oracle(float(x))
        assert abs(got - want) <= 1e-12 * abs(want), x


def test_log_normal_cdf_two_sided_consistency():
    for x in np.linspace(-8.0, 8.0, 33):
        total = math.exp(targets.log_normal_cdf(float(x))) + math.exp(
            targets.log_normal_cdf(float(-x))
        )
        assert abs(total - 1.0) <= 1e-12


# --- uniform ---------------------------------------------------------------------

def test_uniform_logpost_is_zero_with_zero_gradient():
    t = targets.UniformTarget(5, 2)
    ups = np.linalg.qr(philox(0).standard_normal((5, 2)))[0]
    lp, ups_bars, aux_bars = t.logpost([ups], [])
    assert lp == 0.0
    assert np.array_equal(ups_bars[0], np.zeros((5, 2)))
    assert aux_bars == []


def test_uniform_composed_with_polar_is_gaussian_kernel():
    target = build_unconstrained(targets.UniformTarget(5, 2), "polar")
    assert target.dim == 10
    rng = philox(1)
    for _ in range(5):
        x = rng.standard_normal(10)
        lp, grad = target.logdensity_and_gradient(x)
        assert lp == pytest.approx(-0.5 * x @ x, abs=1e-12)
        assert np.allclose(grad, -x, atol=1e-9)


# --- network eigenmodel ----------------------------------------------------------

def test_eigenmodel_two_node_reduction():
    # one edge, zero lifted score: the likelihood term is exactly log 0.5;
    # subtract the closed-form prior terms to isolate it
    y = np.array([[0.0, 1.0], [1.0, 0.0]])
    t = targets.EigenmodelTarget(y, K=1)
    ups = np.array([[1.0], [0.0]])
    lp, _, _ = t.logpost([ups], [np.array([2.0]), np.array([0.0])])
    prior_mu = -0.5 * math.log(2 * math.pi * 100.0)
    prior_lam = -0.5 * (math.log(2 * math.pi * 2.0) + 4.0 / 2.0)
    assert lp - prior_mu - prior_lam == pytest.approx(math.log(0.5), abs=1e-12)


def test_eigenmodel_column_sign_flip_invariance():
    rng = philox(2)
    a = rng.standard_normal((7, 7))
    y = ((a + a.T) > 0).astype(float)
    np.fill_diagonal(y, 0.0)
    t = targets.EigenmodelTarget(y, K=3)
    ups = np.linalg.qr(rng.standard_normal((7, 3)))[0]
    lam = rng.standard_normal(3)
    mu = rng.standard_normal(1)
    lp, _, _ = t.logpost([ups], [lam, mu])
    flipped = ups * np.array([1.0, -1.0, 1.0])
    lp2, _, _ = t.logpost([flipped], [lam, mu])
    assert lp2 == lp  # products of paired signs cancel exactly


def test_eigenmodel_saturates_from_below_with_all_edges():
    # complete graph: pushing mu up drives every edge probability to 1, so
    # the likelihood term climbs to 0 from below
    y = 1.0 - np.eye(4)
    t = targets.EigenmodelTarget(y, K=1)
    ups = np.linalg.qr(philox(3).standard_normal((4, 1)))[0]

    def isolate(mu):
        lp, _, _ = t.logpost([ups], [np.array([0.0]), np.array([mu])])
        prior_mu = -0.5 * (math.log(2 * math.pi * 100.0) + mu**2 / 100.0)
        prior_lam = -0.5 * math.log(2 * math.pi * 4.0)  # lam = 0, variance J = 4
        return lp - prior_mu - prior_lam

    assert isolate(3.0) < isolate(6.0) < 0.0
    # at mu = 40 every edge term underflows to exactly zero and only
    # cancellation noise from reconstructing the priors is left
    assert abs(isolate(40.0)) < 1e-12


def test_eigenmodel_validates_graph():
    with pytest.raises(ValueError):
        targets.EigenmodelTarget(np.array([[0.0, 2.0], [2.0, 0.0]]), K=1)
    with pytest.raises(ValueError):
        targets.EigenmodelTarget(np.array([[0.0, 1.0], [0.0, 0.0]]), K=1)
    with pytest.raises(ValueError):
        targets.EigenmodelTarget(np.zeros((2, 3)), K=1)


def test_eigenmodel_composite_gradient_matches_fd():
    rng = philox(4)
    a = rng.standard_normal((10, 10))
    y = ((a + a.T) > 0).astype(float)
    np.fill_diagonal(y, 0.0)
    target = build_unconstrained(targets.EigenmodelTarget(y, K=3), "polar")
    x = seeded_interior_point(target, rng)
    _, grad = target.logdensity_and_gradient(x)
    fd = fd_gradient(lambda p: target.logdensity_and_gradient(p)[0], x)
    assert rel_err(fd, grad) < 1e-6


# --- probabilistic PCA -----------------------------------------------------------

def test_ppca_single_point_oracle():
    # J=2, K=1, W = e1, lam = 1, sigma2 = 1, one zero observation:
    # marginal covariance diag(2, 1), log N(0; 0, C) = -log(2 pi) - log(2)/2
    t = targets.PpcaTarget(np.zeros((1, 2)), 1, ordered=False)
    lp, _, _ = t.logpost([np.array([[1.0], [0.0]])],
                         [np.array([1.0]), np.array([1.0])])
    expected = -math.log(2 * math.pi) - 0.5 * math.log(2.0)
    assert expected == pytest.approx(-2.1844506566893183, abs=1e-15)
    assert lp == pytest.approx(expected, abs=1e-12)


def test_ppca_empty_dataset_contributes_nothing():
    t = targets.PpcaTarget(np.zeros((0, 3)), 2)
    w = np.linalg.qr(philox(5).standard_normal((3, 2)))[0]
    lp, _, _ = t.logpost([w], [np.array([2.0, 1.0]), np.array([0.5])])
    assert lp == 0.0


def test_ppca_matches_dense_gaussian():
    rng = philox(6)
    N, J, K = 12, 18, 3
    y = rng.standard_normal((N, J))
    t = targets.PpcaTarget(y, K, ordered=False)
    w = np.linalg.qr(rng.standard_normal((J, K)))[0]
    lam = np.array([4.0, 2.0, 1.0])
    sigma2 = 0.7
    lp, _, _ = t.logpost([w], [lam, np.array([sigma2])])
    cov = (w * lam**2) @ w.T + sigma2 * np.eye(J)
    dense = scipy.stats.multivariate_normal(mean=np.zeros(J), cov=cov).logpdf(y).sum()
    assert abs(lp - dense) <= 1e-8 * abs(dense)


def test_ppca_with_mean_shifts_observations():
    rng = philox(7)
    y = rng.standard_normal((6, 3))
    mu = np.array([0.3, -0.8, 1.1])
    t0 = targets.PpcaTarget(y - mu, 1, ordered=False)
    t1 = targets.PpcaTarget(y, 1, with_mean=True, ordered=False)
    w = np.linalg.qr(rng.standard_normal((3, 1)))[0]
    lam, s2 = np.array([2.0]), np.array([0.5])
    lp0, _, _ = t0.logpost([w], [lam, s2])
    lp1, _, _ = t1.logpost([w], [lam, s2, mu])
    assert lp1 == pytest.approx(lp0, rel=1e-12)


def test_ppca_rejects_nonpositive_scales():
    t = targets.PpcaTarget(np.zeros((2, 2)), 1, ordered=False)
    w = np.array([[1.0], [0.0]])
    with pytest.raises(DomainError):
        t.logpost([w], [np.array([-1.0]), np.array([1.0])])
    with pytest.raises(DomainError):
        t.logpost([w], [np.array([1.0]), np.array([0.0])])


def test_ppca_aux_blocks_and_ordering_flag():
    t = targets.PpcaTarget(np.zeros((3, 4)), 2)
    assert [(b.name, b.size, b.transform) for b in t.aux_blocks] == [
        ("lambda", 2, "ordered_positive"),
        ("sigma2", 1, "positive"),
    ]
    t2 = targets.PpcaTarget(np.zeros((3, 4)), 2, ordered=False, with_mean=True)
    assert [b.transform for b in t2.aux_blocks] == ["positive", "positive", "identity"]


def test_ppca_composite_gradient_matches_fd():
    rng = philox(8)
    y = rng.standard_normal((10, 5))
    target = build_unconstrained(targets.PpcaTarget(y, 2), "householder")
    x = seeded_interior_point(target, rng)
    _, grad = target.logdensity_and_gradient(x)
    fd = fd_gradient(lambda p: target.logdensity_and_gradient(p)[0], x)
    assert rel_err(fd, grad) < 1e-6


# --- matrix completion -----------------------------------------------------------

def _frames(rng, J, T, K):
    return (
        np.linalg.qr(rng.standard_normal((J, K)))[0],
        np.linalg.qr(rng.standard_normal((T, K)))[0],
    )


def test_mc_zero_residual_oracle():
    # fully observed zeros, rank-1 scores at lam -> 0+, sigma2 = 1:
    # only the Gaussian normalization survives
    t = targets.MatrixCompletionTarget(np.zeros((2, 2)), np.ones((2, 2), bool), 1)
    phi = np.array([[1.0], [0.0]])
    psi = np.array([[1.0], [0.0]])
    lp, _, _ = t.logpost([phi, psi], [np.array([1e-300]), np.array([1.0]), np.empty(0)])
    assert lp == pytest.approx(-2.0 * math.log(2 * math.pi), abs=1e-12)
    assert lp == pytest.approx(-3.6757541328186907, abs=1e-12)


def test_mc_factor_permutation_invariance():
    rng = philox(9)
    y = rng.standard_normal((5, 7))
    obs = rng.random((5, 7)) > 0.25
    t = targets.MatrixCompletionTarget(y, obs, 2)
    phi, psi = _frames(rng, 5, 7, 2)
    lam = np.array([3.0, 1.5])
    miss = rng.standard_normal(int((~obs).sum()))
    lp1, _, _ = t.logpost([phi, psi], [lam, np.array([0.7]), miss])
    lp2, _, _ = t.logpost(
        [phi[:, ::-1], psi[:, ::-1]], [lam[::-1], np.array([0.7]), miss]
    )
    assert lp2 == pytest.approx(lp1, rel=1e-12)


def test_mc_missing_entries_assemble_row_major():
    y = np.array([[1.0, 0.0], [0.0, 4.0]])
    obs = np.array([[True, False], [False, True]])
    t = targets.MatrixCompletionTarget(y, obs, 1)
    phi = np.array([[1.0], [0.0]])
    psi = np.array([[1.0], [0.0]])
    a, b = 10.0, 20.0
    lp, _, aux_bars = t.logpost(
        [phi, psi], [np.array([1e-300]), np.array([1.0]), np.array([a, b])]
    )
    # residual is the assembled Y itself; (0,1) must receive `a`, (1,0) `b`
    expected = -2.0 * math.log(2 * math.pi) - (1.0 + a * a + b * b + 16.0) / 2.0
    assert lp == pytest.approx(expected, abs=1e-12)
    assert np.allclose(aux_bars[2], [-a, -b], atol=1e-12)


def test_mc_rejects_nonpositive_scales():
    t = targets.MatrixCompletionTarget(np.zeros((2, 2)), np.ones((2, 2), bool), 1)
    phi = np.array([[1.0], [0.0]])
    with pytest.raises(DomainError):
        t.logpost([phi, phi], [np.array([0.0]), np.array([1.0]), np.empty(0)])
    with pytest.raises(DomainError):
        t.logpost([phi, phi], [np.array([1.0]), np.array([-2.0]), np.empty(0)])


def test_mc_requires_coverage():
    # a fully missing row (or column) leaves the factorization unidentified
    obs = np.array([[False, False], [True, True]])
    with pytest.raises(ValueError):
        targets.MatrixCompletionTarget(np.zeros((2, 2)), obs, 1)


def test_mc_composite_gradient_matches_fd():
    rng = philox(10)
    y = rng.standard_normal((6, 8))
    obs = np.ones((6, 8), dtype=bool)
    obs.ravel()[rng.choice(48, size=10, replace=False)] = False
    target = build_unconstrained(targets.MatrixCompletionTarget(y, obs, 2), "cayley")
    x = seeded_interior_point(target, rng)
    _, grad = target.logdensity_and_gradient(x)
    fd = fd_gradient(lambda p: target.logdensity_and_gradient(p)[0], x)
    assert rel_err(fd, grad) < 1e-6


def test_mc_stiefel_shapes():
    t = targets.MatrixCompletionTarget(np.zeros((4, 9)), np.ones((4, 9), bool), 2)
    assert tuple(t.stiefel_shapes) == ((4, 2), (9, 2))
    assert [(b.name, b.size) for b in t.aux_blocks] == [
        ("lambda", 2), ("sigma2", 1), ("y_missing", 0),
    ]
