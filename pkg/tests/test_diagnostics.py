"""Autocovariance and ESS estimators against closed-form series."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stiefelmc.diagnostics import (
    EssReport,
    autocovariance,
    ess_univariate,
    min_ess_report,
)
from stiefelmc.errors import DegenerateSeriesError

from conftest import philox


# --- autocovariance ---------------------------------------------------------


def test_autocovariance_of_alternating_series():
    x = np.array([1.0, -1.0] * 50)
    acov = autocovariance(x, 3)
    assert acov[0] == pytest.approx(1.0, rel=1e-12)
    # lag-1 products are all -1 with the 1/n normalization shaving one term
    assert acov[1] == pytest.approx(-(99 / 100), rel=1e-12)
    assert acov[2] == pytest.approx(98 / 100, rel=1e-12)


def test_autocovariance_white_noise_decorrelates():
    x = philox(8).standard_normal(100_000)
    acov = autocovariance(x, 5)
    rho = acov[1:] / acov[0]
    assert np.abs(rho).max() < 0.01  # ~3 sigma at 1/sqrt(n)


def test_autocovariance_fft_matches_direct():
    for n in (32, 33, 101, 1024, 2047):
        x = philox(n).standard_normal(n)
        a = autocovariance(x, n - 1, method="direct")
        b = autocovariance(x, n - 1, method="fft")
        np.testing.assert_allclose(b, a, atol=1e-10)


def test_autocovariance_validation():
    x = np.arange(10.0)
    with pytest.raises(ValueError, match="max_lag"):
        autocovariance(x, 10)
    with pytest.raises(ValueError, match="max_lag"):
        autocovariance(x, -1)
    with pytest.raises(ValueError, match="method"):
        autocovariance(x, 2, method="welch")
    with pytest.raises(ValueError, match="1-d"):
        autocovariance(np.zeros((5, 2)), 1)
    with pytest.raises(ValueError, match="too short"):
        autocovariance(np.zeros(3), 1)
    with pytest.raises(DegenerateSeriesError):
        autocovariance(np.full(50, 2.5), 3)


# --- ESS --------------------------------------------------------------------


def test_ess_of_iid_noise_is_near_n():
    n = 20_000
    x = philox(3).standard_normal(n)
    ess = ess_univariate(x)
    assert 0.9 * n <= ess <= n


def test_ess_of_ar1_matches_theory():
    # AR(1) with coefficient a has ESS/n -> (1-a)/(1+a); at a=0.9 that is 1/19
    a = 0.9
    n = 100_000
    rng = philox(17)
    e = rng.standard_normal(n + 500)
    x = np.empty(n + 500)
    x[0] = e[0]
    for i in range(1, n + 500):
        x[i] = a * x[i - 1] + e[i]
    ess = ess_univariate(x[500:])
    want = n * (1 - a) / (1 + a)
    assert 0.8 * want < ess < 1.2 * want


def test_ess_clamps_to_n_for_antithetic_series():
    # alternating series has negative lag-1 correlation; tau < 1 must clamp
    x = np.array([1.0, -1.0] * 500) + 0.001 * philox(1).standard_normal(1000)
    assert ess_univariate(x) == 1000.0


def test_ess_constant_series_reports_n():
    assert ess_univariate(np.full(64, 3.14)) == 64.0


def test_ess_is_affine_invariant():
    x = philox(23).standard_normal(5000).cumsum()  # strongly correlated walk
    a = ess_univariate(x)
    b = ess_univariate(2.5 * x - 117.0)
    assert a == pytest.approx(b, rel=1e-12)


def test_ess_short_series_rejected():
    with pytest.raises(ValueError, match="too short"):
        ess_univariate(np.arange(3.0))


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(8, 400),
    scale=st.floats(0.1, 100.0),
)
def test_ess_stays_in_bounds(seed, n, scale):
    x = scale * philox(seed).standard_normal(n)
    ess = ess_univariate(x)
    assert 0.0 < ess <= n + 1e-9


# --- reports ----------------------------------------------------------------


def test_min_ess_report_field_arithmetic():
    draws = philox(2).standard_normal((2000, 3))
    rep = min_ess_report(draws, elapsed=4.0, iters=500)
    assert isinstance(rep, EssReport)
    assert rep.per_dim_ess.shape == (3,)
    assert rep.min_ess == rep.per_dim_ess.min()
    assert rep.min_ess_per_iter == rep.min_ess / 500
    assert rep.min_ess_per_sec == rep.min_ess / 4.0
    assert rep.n == 2000
    assert not rep.stuck


def test_min_ess_report_picks_the_worst_dimension():
    rng = philox(4)
    fast = rng.standard_normal(4000)
    slow = rng.standard_normal(4000)
    for i in range(1, 4000):
        slow[i] = 0.95 * slow[i - 1] + slow[i]
    rep = min_ess_report(np.column_stack([fast, slow]), elapsed=1.0, iters=4000)
    assert rep.per_dim_ess[1] < rep.per_dim_ess[0]
    assert rep.min_ess == rep.per_dim_ess[1]


def test_min_ess_report_flags_stuck_columns():
    rng = philox(6)
    draws = np.column_stack([rng.standard_normal(100), np.full(100, 7.0)])
    rep = min_ess_report(draws, elapsed=1.0, iters=100)
    assert rep.stuck
    assert rep.per_dim_ess[1] == 100.0  # constant column scores n, not an error


def test_min_ess_report_foi_selects_columns():
    rng = philox(9)
    sticky = np.full(512, 1.0)
    draws = np.column_stack([rng.standard_normal(512), sticky])
    full = min_ess_report(draws, elapsed=1.0, iters=512)
    only_first = min_ess_report(draws, elapsed=1.0, iters=512, foi=[0])
    assert full.stuck and not only_first.stuck
    assert only_first.per_dim_ess.shape == (1,)
    sliced = min_ess_report(draws, elapsed=1.0, iters=512, foi=slice(0, 1))
    assert sliced.min_ess == only_first.min_ess


def test_min_ess_report_accepts_1d_series():
    rep = min_ess_report(philox(5).standard_normal(256), elapsed=2.0, iters=256)
    assert rep.per_dim_ess.shape == (1,)


def test_min_ess_report_validation():
    ok = philox(0).standard_normal((16, 2))
    with pytest.raises(ValueError, match="elapsed"):
        min_ess_report(ok, elapsed=0.0, iters=16)
    with pytest.raises(ValueError, match="iters"):
        min_ess_report(ok, elapsed=1.0, iters=0)
    with pytest.raises(ValueError, match="at least 4"):
        min_ess_report(ok[:3], elapsed=1.0, iters=3)
    with pytest.raises(ValueError, match="no columns"):
        min_ess_report(ok, elapsed=1.0, iters=16, foi=[])
    with pytest.raises(ValueError, match="2-d"):
        min_ess_report(np.zeros((4, 2, 2)), elapsed=1.0, iters=4)
