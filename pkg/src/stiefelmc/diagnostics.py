"""Effective-sample-size estimation and the efficiency metrics built on it.

ESS uses the Geyer initial-positive-sequence estimator, univariate per
dimension: ESS = n / (1 + 2 Σ ρ_k) with the autocorrelation sum truncated
before the first non-positive pair Γ_m = ρ_{2m} + ρ_{2m+1}, and the result
clamped to (0, n].  Constant series (stuck chains) report ESS = n together
with a ``stuck`` flag instead of erroring, so benchmark tables still emit a
row.  Efficiency is summarized as the minimum ESS across monitored
dimensions, normalized by kept iterations and by wall-clock seconds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateSeriesError

__all__ = ["EssReport", "autocovariance", "ess_univariate", "min_ess_report"]


def _demeaned(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d series, got shape {x.shape}")
    if x.size < 4:
        raise ValueError(f"series too short for autocovariance (n={x.size} < 4)")
    d = x - x.mean()
    if np.all(d == 0.0):
        raise DegenerateSeriesError("series is constant")
    return d


def autocovariance(x, max_lag: int, method: str = "direct") -> np.ndarray:
    """Biased (1/n) sample autocovariances at lags 0..max_lag.

    ``method='fft'`` computes the same quantity through a zero-padded FFT;
    the two agree to about 1e-10 and the direct sum is the reference.
    """
    d = _demeaned(x)
    n = d.size
    max_lag = int(max_lag)
    if not 0 <= max_lag < n:
        raise ValueError(f"max_lag must be in [0, {n - 1}], got {max_lag}")
    if method == "direct":
        return np.array([d[: n - k] @ d[k:] for k in range(max_lag + 1)]) / n
    if method == "fft":
        nfft = 1 << int(2 * n - 1).bit_length()
        f = np.fft.rfft(d, nfft)
        acov = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1] / n
        return acov
    raise ValueError(f"method must be 'direct' or 'fft', got {method!r}")


def _geyer_tau(rho: np.ndarray) -> tuple[float, bool]:
    """(running 1+2Σρ over positive pairs, whether a non-positive pair was hit)."""
    tau = -1.0
    m = 0
    while 2 * m < rho.size:
        gamma = rho[2 * m] + (rho[2 * m + 1] if 2 * m + 1 < rho.size else 0.0)
        if gamma <= 0.0:
            return tau, True
        tau += 2.0 * gamma
        m += 1
    return tau, False


def ess_univariate(x) -> float:
    """Effective sample size of one series; ESS = n for a constant series."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4:
        raise ValueError(f"series too short for ESS (n={n} < 4)")
    try:
        # Grow the lag window geometrically; the truncation rule almost
        # always fires long before n-1 lags are needed.
        max_lag = min(128, n - 1)
        while True:
            acov = autocovariance(x, max_lag)
            tau, terminated = _geyer_tau(acov / acov[0])
            if terminated or max_lag == n - 1:
                break
            max_lag = min(2 * max_lag, n - 1)
    except DegenerateSeriesError:
        return float(n)
    if tau <= 0.0:
        return float(n)
    return float(min(n, n / tau))


@dataclass(frozen=True)
class EssReport:
    """Per-dimension ESS with the worst case normalized per iteration and
    per second of sampling time.

    ``stuck`` is set when any monitored dimension was constant (its ESS is
    reported as n)."""

    per_dim_ess: np.ndarray
    min_ess: float
    min_ess_per_iter: float
    min_ess_per_sec: float
    n: int
    elapsed_seconds: float
    stuck: bool


def min_ess_report(draws, elapsed: float, iters: int, foi=None) -> EssReport:
    """Summarize sampling efficiency of an n x d draw matrix.

    ``foi`` optionally selects columns (an index array or slice); the default
    uses every column.  ``iters`` is the kept-draw count used for the
    per-iteration normalization, and ``elapsed`` the wall-clock seconds for
    the per-second one.
    """
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    if draws.ndim != 2:
        raise ValueError(f"draws must be 2-d, got shape {draws.shape}")
    if foi is not None:
        draws = draws[:, foi]
    n, d = draws.shape
    if n < 4:
        raise ValueError(f"need at least 4 draws, got {n}")
    if d == 0:
        raise ValueError("function-of-interest selection left no columns")
    if not elapsed > 0.0:
        raise ValueError(f"elapsed must be positive, got {elapsed}")
    if not iters >= 1:
        raise ValueError(f"iters must be >= 1, got {iters}")

    stuck = False
    ess = np.empty(d)
    for j in range(d):
        col = draws[:, j]
        if np.all(col == col[0]):
            stuck = True
            ess[j] = float(n)
        else:
            ess[j] = ess_univariate(col)
    min_ess = float(ess.min())
    return EssReport(
        per_dim_ess=ess,
        min_ess=min_ess,
        min_ess_per_iter=min_ess / iters,
        min_ess_per_sec=min_ess / elapsed,
        n=n,
        elapsed_seconds=float(elapsed),
        stuck=stuck,
    )
