import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.funcseries import (BasisDescriptor, FunctionalSeries,
                                 basis_matrix, demean_series,
                                 fourier_basis_eval, project_curves,
                                 read_series_csv, reconstruct,
                                 write_coefficient_csv)


def test_basis_values():
    assert fourier_basis_eval(1, 0.3) == 1.0
    # psi_2 = sqrt(2) cos(2 pi tau)
    assert fourier_basis_eval(2, 0.0) == pytest.approx(np.sqrt(2.0))
    assert fourier_basis_eval(2, 0.25) == pytest.approx(0.0, abs=1e-12)
    # psi_3 = sqrt(2) sin(2 pi tau)
    assert fourier_basis_eval(3, 0.25) == pytest.approx(np.sqrt(2.0))
    assert fourier_basis_eval(5, 0.125) == pytest.approx(
        np.sqrt(2.0) * np.sin(4 * np.pi * 0.125))


def test_basis_orthonormal_under_trapezoid():
    basis = BasisDescriptor(n_basis=15)
    G = 201
    grid = np.linspace(0.0, 1.0, G)
    B = basis_matrix(basis, grid)
    w = np.full(G, 1.0 / (G - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    gram = (B * w[:, None]).T @ B
    assert np.allclose(gram, np.eye(15), atol=1e-10)


def test_basis_eval_rejects_bad_input():
    with pytest.raises(ValueError):
        fourier_basis_eval(0, 0.5)
    with pytest.raises(ValueError):
        fourier_basis_eval(2, 1.5)


def test_projection_recovers_band_limited_curves():
    rng = np.random.default_rng(7)
    basis = BasisDescriptor(n_basis=9)
    coeffs = rng.normal(size=(16, 9))
    grid = np.linspace(0.0, 1.0, 400)
    curves = FunctionalSeries(coeffs, basis)
    samples = reconstruct(curves, grid)
    back = project_curves(samples, basis)
    assert np.allclose(back.coeffs, coeffs, atol=1e-8)


def test_project_curves_needs_enough_grid_points():
    with pytest.raises(ValueError, match="grid"):
        project_curves(np.zeros((10, 20)), BasisDescriptor(n_basis=15))


def test_series_validation():
    with pytest.raises(ValueError):
        FunctionalSeries(np.zeros((4, 15)))          # too short
    with pytest.raises(ValueError):
        FunctionalSeries(np.zeros((10, 3)))          # wrong width
    bad = np.zeros((10, 15))
    bad[3, 2] = np.nan
    with pytest.raises(ValueError):
        FunctionalSeries(bad)


def test_series_is_immutable():
    s = FunctionalSeries(np.zeros((10, 15)))
    with pytest.raises(ValueError):
        s.coeffs[0, 0] = 1.0


def test_demean():
    rng = np.random.default_rng(3)
    s = FunctionalSeries(rng.normal(loc=2.0, size=(32, 15)))
    d = demean_series(s)
    assert d.demeaned
    assert np.allclose(d.coeffs.mean(axis=0), 0.0, atol=1e-12)
    # original untouched
    assert not np.allclose(s.coeffs.mean(axis=0), 0.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=8, max_value=40), st.integers(min_value=0, max_value=2 ** 31))
def test_coefficient_csv_roundtrip(tmp_path_factory, T, seed):
    rng = np.random.default_rng(seed)
    s = FunctionalSeries(rng.normal(size=(T, 15)))
    path = tmp_path_factory.mktemp("csv") / "series.csv"
    write_coefficient_csv(path, s)
    back = read_series_csv(path, demean=False)
    assert back.T == T
    assert np.allclose(back.coeffs, s.coeffs, atol=1e-8)


def test_curve_csv_layout(tmp_path):
    rng = np.random.default_rng(11)
    basis = BasisDescriptor(n_basis=5)
    coeffs = rng.normal(size=(12, 5))
    grid = np.linspace(0.0, 1.0, 64)
    samples = reconstruct(FunctionalSeries(coeffs, basis), grid)
    path = tmp_path / "curves.csv"
    header = ",".join(f"tau_{g}" for g in range(64))
    np.savetxt(path, samples, delimiter=",", header=header, comments="")
    s = read_series_csv(path, n_basis=5, demean=False)
    assert np.allclose(s.coeffs, coeffs, atol=1e-6)


def test_read_series_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y\n1,2\n")
    with pytest.raises(ValueError, match="layout"):
        read_series_csv(path)
