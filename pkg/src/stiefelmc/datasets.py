"""CSV ingestion and seeded synthetic datasets for the benchmark problems.

Synthetic generators draw every orthonormal factor uniformly (Haar) through
the polar trick: a standard-normal J x K matrix orthonormalized by its polar
factor is Haar-distributed.  All generators are deterministic in their seed
and return the ground truth alongside the observations so recovery tests can
score against it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg

__all__ = [
    "load_csv_matrix",
    "save_csv_matrix",
    "haar_stiefel",
    "PpcaData",
    "EigenmodelData",
    "PanelData",
    "synth_ppca",
    "synth_eigenmodel",
    "synth_matrix_completion",
    "PPCA_PRESETS",
]

MISSING_TOKEN = "NA"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & ((1 << 64) - 1)))


def haar_stiefel(J: int, K: int, rng: np.random.Generator) -> np.ndarray:
    """A Haar-uniform J x K orthonormal frame (polar factor of a Gaussian)."""
    g = rng.standard_normal((J, K))
    u, _, vt = linalg.svd(g)
    return u @ vt


# --- CSV ---------------------------------------------------------------------

def _parse_cell(cell: str, missing_token: str):
    cell = cell.strip()
    if cell == missing_token:
        return np.nan, True
    try:
        return float(cell), False
    except ValueError:
        return None, False


def load_csv_matrix(path, missing_token: str = MISSING_TOKEN):
    """Read a rectangular numeric CSV; returns ``(matrix, mask)``.

    ``mask`` is True at missing cells (rendered as ``missing_token``), which
    hold NaN in the matrix.  A header row is auto-detected: if every cell of
    the first row fails numeric parsing (and none is the missing token), the
    row is skipped.  Ragged rows and non-numeric cells raise ValueError with
    the offending line number.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise ValueError(f"{path}: no data rows")

    start = 0
    parsed_first = [_parse_cell(c, missing_token) for c in rows[0]]
    if all(v is None for v, _ in parsed_first):
        start = 1
        if len(rows) == 1:
            raise ValueError(f"{path}: header row but no data rows")

    width = len(rows[start])
    data = []
    mask = []
    for i, row in enumerate(rows[start:], start=start + 1):
        if len(row) != width:
            raise ValueError(
                f"{path}: ragged row at line {i}: expected {width} cells, got {len(row)}"
            )
        vals = []
        miss = []
        for j, cell in enumerate(row):
            v, is_missing = _parse_cell(cell, missing_token)
            if v is None:
                raise ValueError(
                    f"{path}: non-numeric cell {cell.strip()!r} at line {i}, column {j + 1}"
                )
            vals.append(v)
            miss.append(is_missing)
        data.append(vals)
        mask.append(miss)
    return np.asarray(data, dtype=float), np.asarray(mask, dtype=bool)


def save_csv_matrix(path, matrix, mask=None, header=None,
                    missing_token: str = MISSING_TOKEN) -> None:
    """Write a matrix as CSV, rendering masked cells as the missing token."""
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header is not None:
            w.writerow(header)
        for i in range(matrix.shape[0]):
            row = []
            for j in range(matrix.shape[1]):
                if (mask is not None and mask[i, j]) or np.isnan(matrix[i, j]):
                    row.append(missing_token)
                else:
                    row.append(repr(float(matrix[i, j])))
            w.writerow(row)


# --- synthetic generators ------------------------------------------------------

@dataclass(frozen=True)
class PpcaData:
    y: np.ndarray            # N x J observations
    w_true: np.ndarray       # J x K loadings frame
    lam_true: np.ndarray     # K singular values, descending
    sigma2_true: float


@dataclass(frozen=True)
class EigenmodelData:
    y: np.ndarray            # J x J symmetric 0/1 adjacency, zero diagonal
    u_true: np.ndarray
    lam_true: np.ndarray
    mu_true: float


@dataclass(frozen=True)
class PanelData:
    y: np.ndarray            # J x T panel with noise, fully populated
    observed: np.ndarray     # J x T bool; False entries are held out
    phi_true: np.ndarray
    psi_true: np.ndarray
    lam_true: np.ndarray
    sigma_true: float


# The two simulation settings used for factor-recovery checks.
PPCA_PRESETS = {
    "synthetic1": dict(N=150, J=5, K=2, lam=(9.0, 1.0), sigma2=0.01**2),
    "synthetic2": dict(N=100, J=50, K=3, lam=(5.0, 3.0, 1.5), sigma2=1.0),
}


def synth_ppca(seed: int, N: int, J: int, K: int, lam, sigma2: float) -> PpcaData:
    """y_i = W diag(lam) z_i + eps_i with Haar W, z ~ N(0,I), eps ~ N(0, sigma2 I)."""
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (K,):
        raise ValueError(f"lam must have length K={K}, got shape {lam.shape}")
    rng = _rng(seed)
    w = haar_stiefel(J, K, rng)
    z = rng.standard_normal((N, K))
    y = z * lam @ w.T + np.sqrt(sigma2) * rng.standard_normal((N, J))
    order = np.argsort(lam)[::-1]
    return PpcaData(y=y, w_true=w[:, order], lam_true=lam[order], sigma2_true=float(sigma2))


def synth_eigenmodel(seed: int, J: int, K: int) -> EigenmodelData:
    """A probit-eigenmodel graph: edges Bernoulli(Phi(U diag(lam) U' + mu)).

    lam is drawn N(0, J) per the model's own prior; mu is N(0, 1) so graphs
    keep a mix of present and absent edges.
    """
    rng = _rng(seed)
    u = haar_stiefel(J, K, rng)
    lam = np.sqrt(J) * rng.standard_normal(K)
    mu = float(rng.standard_normal())
    m = (u * lam) @ u.T + mu
    from scipy.special import ndtr

    prob = ndtr(m)
    y = (rng.random((J, J)) < prob).astype(float)
    y = np.triu(y, 1)
    y = y + y.T
    return EigenmodelData(y=y, u_true=u, lam_true=lam, mu_true=mu)


def synth_matrix_completion(
    seed: int, J: int, T: int, K: int, lam, sigma: float,
    mask_fraction: float = 0.1,
) -> PanelData:
    """A low-rank panel Y = Phi diag(lam) Psi' + noise with a held-out mask.

    ``mask_fraction`` of the J*T entries are marked unobserved, chosen
    uniformly without replacement.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (K,):
        raise ValueError(f"lam must have length K={K}, got shape {lam.shape}")
    if not 0.0 <= mask_fraction < 1.0:
        raise ValueError(f"mask_fraction must be in [0, 1), got {mask_fraction}")
    rng = _rng(seed)
    phi = haar_stiefel(J, K, rng)
    psi = haar_stiefel(T, K, rng)
    y = (phi * lam) @ psi.T + sigma * rng.standard_normal((J, T))
    observed = np.ones((J, T), dtype=bool)
    n_mask = int(round(mask_fraction * J * T))
    if n_mask:
        flat = rng.choice(J * T, size=n_mask, replace=False)
        observed.flat[flat] = False
    return PanelData(
        y=y, observed=observed, phi_true=phi, psi_true=psi,
        lam_true=lam, sigma_true=float(sigma),
    )
