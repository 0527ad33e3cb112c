"""Shared helpers: independent finite-difference oracles and point seeding.

The FD helpers here are deliberately separate from any library code so that
gradient and Jacobian tests check the implementation against an independent
computation.
"""

import numpy as np
import pytest


def fd_gradient(f, x, h=1e-5):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def fd_jacobian(f, x, h=1e-5):
    """Central finite-difference Jacobian of a vector function (rows = outputs)."""
    x = np.asarray(x, dtype=float)
    cols = [
        (f(x + h * e) - f(x - h * e)) / (2.0 * h)
        for e in np.eye(x.size)
    ]
    return np.stack(cols, axis=1)


def rel_err(approx, exact):
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    return np.linalg.norm(approx - exact) / max(1.0, np.linalg.norm(exact))


def philox(seed):
    return np.random.default_rng(np.random.Philox(key=seed))


def seeded_interior_point(target, rng, scale=0.15, attempts=200):
    """A point near the target's origin with finite log density."""
    origin = target.origin()
    for _ in range(attempts):
        x = origin + scale * rng.standard_normal(target.dim)
        lp, _ = target.logdensity_and_gradient(x)
        if np.isfinite(lp):
            return x
    raise AssertionError("no interior point found")


@pytest.fixture
def rng():
    return philox(20260815)
