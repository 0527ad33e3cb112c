"""CSV round-tripping and the seeded synthetic generators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stiefelmc.datasets import (
    PPCA_PRESETS,
    haar_stiefel,
    load_csv_matrix,
    save_csv_matrix,
    synth_eigenmodel,
    synth_matrix_completion,
    synth_ppca,
)

from conftest import philox


# --- CSV ----------------------------------------------------------------------


def test_csv_round_trip_is_exact(tmp_path):
    m = philox(1).standard_normal((7, 4))
    m[0, 0] = 1e-300
    m[1, 1] = 1.0 / 3.0
    m[2, 2] = -0.0
    p = tmp_path / "m.csv"
    save_csv_matrix(p, m)
    back, mask = load_csv_matrix(p)
    np.testing.assert_array_equal(back, m)  # repr() cells parse back bitwise
    assert not mask.any()


def test_csv_round_trip_with_mask(tmp_path):
    m = philox(2).standard_normal((5, 3))
    mask = philox(3).random((5, 3)) < 0.4
    mask[0, :] = [True, False, True]
    p = tmp_path / "m.csv"
    save_csv_matrix(p, m, mask=mask)
    back, back_mask = load_csv_matrix(p)
    np.testing.assert_array_equal(back_mask, mask)
    np.testing.assert_array_equal(back[~mask], m[~mask])
    assert np.isnan(back[mask]).all()


def test_csv_header_is_skipped(tmp_path):
    p = tmp_path / "h.csv"
    save_csv_matrix(p, np.eye(2), header=["a", "b"])
    back, _ = load_csv_matrix(p)
    np.testing.assert_array_equal(back, np.eye(2))


def test_csv_all_numeric_first_row_is_data(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1,2\n3,4\n")
    back, _ = load_csv_matrix(p)
    np.testing.assert_array_equal(back, [[1.0, 2.0], [3.0, 4.0]])


def test_csv_ragged_row_names_the_line(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("1,2,3\n4,5\n")
    with pytest.raises(ValueError, match="line 2"):
        load_csv_matrix(p)


def test_csv_non_numeric_cell_names_line_and_column(tmp_path):
    p = tmp_path / "n.csv"
    p.write_text("col0,col1\n1,2\n3,oops\n")
    with pytest.raises(ValueError, match="'oops' at line 3, column 2"):
        load_csv_matrix(p)


def test_csv_empty_and_header_only_rejected(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("\n\n")
    with pytest.raises(ValueError, match="no data rows"):
        load_csv_matrix(p)
    p.write_text("a,b\n")
    with pytest.raises(ValueError, match="header row but no data"):
        load_csv_matrix(p)


def test_csv_custom_missing_token(tmp_path):
    p = tmp_path / "t.csv"
    save_csv_matrix(p, np.array([[1.0, np.nan]]), missing_token="?")
    back, mask = load_csv_matrix(p, missing_token="?")
    assert mask[0, 1] and not mask[0, 0]
    # with the default token the '?' cell is simply non-numeric
    with pytest.raises(ValueError, match="non-numeric"):
        load_csv_matrix(p)


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    rows=st.integers(1, 8),
    cols=st.integers(1, 6),
    frac=st.floats(0.0, 0.9),
)
def test_csv_round_trip_property(tmp_path_factory, seed, rows, cols, frac):
    rng = philox(seed)
    m = 1e3 * rng.standard_normal((rows, cols))
    mask = rng.random((rows, cols)) < frac
    p = tmp_path_factory.mktemp("csv") / "x.csv"
    save_csv_matrix(p, m, mask=mask)
    back, back_mask = load_csv_matrix(p)
    np.testing.assert_array_equal(back_mask, mask)
    np.testing.assert_array_equal(back[~mask], m[~mask])


# --- synthetic data --------------------------------------------------------------


def test_haar_frames_are_orthonormal():
    for j, k in [(3, 1), (5, 2), (20, 6)]:
        u = haar_stiefel(j, k, philox(j * 31 + k))
        assert u.shape == (j, k)
        assert np.linalg.norm(u.T @ u - np.eye(k)) < 1e-12


def test_haar_is_rotation_invariant_in_distribution():
    # first-coordinate squared norms of many draws match the Beta moment
    # E[u_11^2] = 1/J for Haar columns
    n = 4000
    j = 6
    vals = np.empty(n)
    for i in range(n):
        vals[i] = haar_stiefel(j, 1, philox(i))[0, 0] ** 2
    se = vals.std() / np.sqrt(n)
    assert abs(vals.mean() - 1 / j) < 4 * se


def test_synth_ppca_shapes_and_determinism():
    d1 = synth_ppca(42, N=30, J=6, K=2, lam=(4.0, 2.0), sigma2=0.25)
    d2 = synth_ppca(42, N=30, J=6, K=2, lam=(4.0, 2.0), sigma2=0.25)
    assert d1.y.shape == (30, 6)
    assert d1.w_true.shape == (6, 2)
    np.testing.assert_array_equal(d1.y, d2.y)
    assert not np.array_equal(d1.y, synth_ppca(43, 30, 6, 2, (4.0, 2.0), 0.25).y)
    assert d1.lam_true[0] >= d1.lam_true[1]


def test_synth_ppca_sorts_lam_with_loadings():
    d = synth_ppca(7, N=5, J=4, K=2, lam=(1.0, 9.0), sigma2=0.1)
    np.testing.assert_array_equal(d.lam_true, [9.0, 1.0])
    assert np.linalg.norm(d.w_true.T @ d.w_true - np.eye(2)) < 1e-12


def test_synth_ppca_validates_lam_length():
    with pytest.raises(ValueError, match="length K"):
        synth_ppca(0, N=5, J=4, K=2, lam=(1.0,), sigma2=0.1)


def test_ppca_presets_are_the_two_simulation_settings():
    assert set(PPCA_PRESETS) == {"synthetic1", "synthetic2"}
    s1 = PPCA_PRESETS["synthetic1"]
    assert (s1["N"], s1["J"], s1["K"]) == (150, 5, 2)
    assert s1["lam"] == (9.0, 1.0)
    assert s1["sigma2"] == pytest.approx(1e-4)
    s2 = PPCA_PRESETS["synthetic2"]
    assert (s2["N"], s2["J"], s2["K"]) == (100, 50, 3)
    assert s2["lam"] == (5.0, 3.0, 1.5)
    assert s2["sigma2"] == 1.0
    # presets feed the generator directly
    d = synth_ppca(1, **s1)
    assert d.y.shape == (150, 5)


def test_synth_eigenmodel_graph_is_valid():
    d = synth_eigenmodel(11, J=12, K=3)
    y = d.y
    assert y.shape == (12, 12)
    np.testing.assert_array_equal(y, y.T)
    np.testing.assert_array_equal(np.diag(y), np.zeros(12))
    assert set(np.unique(y)) <= {0.0, 1.0}
    assert d.u_true.shape == (12, 3)
    np.testing.assert_array_equal(d.y, synth_eigenmodel(11, J=12, K=3).y)


def test_synth_matrix_completion_mask_and_truth():
    d = synth_matrix_completion(5, J=8, T=12, K=2, lam=(6.0, 3.0), sigma=0.1,
                                mask_fraction=0.25)
    assert d.y.shape == (8, 12)
    assert d.observed.shape == (8, 12)
    assert (~d.observed).sum() == round(0.25 * 96)
    # the panel is fully populated; the mask is bookkeeping only
    assert np.isfinite(d.y).all()
    low_rank = (d.phi_true * d.lam_true) @ d.psi_true.T
    resid = d.y - low_rank
    assert resid.std() == pytest.approx(0.1, rel=0.2)
    np.testing.assert_array_equal(
        d.observed,
        synth_matrix_completion(5, 8, 12, 2, (6.0, 3.0), 0.1, 0.25).observed,
    )


def test_synth_matrix_completion_validates():
    with pytest.raises(ValueError, match="mask_fraction"):
        synth_matrix_completion(0, 4, 5, 2, (1.0, 1.0), 0.1, mask_fraction=1.0)
    with pytest.raises(ValueError, match="length K"):
        synth_matrix_completion(0, 4, 5, 2, (1.0,), 0.1)


def test_synth_matrix_completion_zero_mask():
    d = synth_matrix_completion(3, J=4, T=5, K=1, lam=(2.0,), sigma=0.05,
                                mask_fraction=0.0)
    assert d.observed.all()
