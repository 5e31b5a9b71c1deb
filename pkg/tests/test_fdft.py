import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.fdft import FdftTable, fdft_all, inverse_fdft, periodogram_score
from artifact.funcseries import FunctionalSeries


def _series(T, L=15, seed=0):
    rng = np.random.default_rng(seed)
    return FunctionalSeries(rng.normal(size=(T, L)))


def test_matches_direct_sum():
    s = _series(16, seed=1)
    table = fdft_all(s)
    T = s.T
    t = np.arange(T)
    for j in (1, 5, 16):
        direct = (s.coeffs * np.exp(-2j * np.pi * j * t / T)[:, None]).sum(axis=0)
        direct /= np.sqrt(2 * np.pi * T)
        assert np.allclose(table.row(j), direct, atol=1e-12)


def test_row_indexing_mod_T():
    table = fdft_all(_series(12))
    assert np.array_equal(table.row(3), table.row(15))
    assert np.array_equal(table.row(-1), table.row(11))
    # row 0 is the zero frequency j = T
    assert np.array_equal(table.row(12), table.scores[0])


def test_conjugate_symmetry():
    table = fdft_all(_series(20, seed=2))
    for j in range(1, 20):
        assert np.allclose(table.row(-j), np.conj(table.row(j)), atol=1e-12)


def test_zero_frequency_is_scaled_mean():
    s = _series(16, seed=3)
    table = fdft_all(s)
    expect = s.coeffs.sum(axis=0) / np.sqrt(2 * np.pi * 16)
    assert np.allclose(table.row(0), expect, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=8, max_value=64), st.integers(min_value=0, max_value=2 ** 31))
def test_round_trip(T, seed):
    s = _series(T, seed=seed)
    back = inverse_fdft(fdft_all(s))
    assert np.allclose(back.coeffs, s.coeffs, atol=1e-9)


def test_parseval():
    s = _series(32, seed=4)
    table = fdft_all(s)
    # sum_j |D_j|^2 = sum_t |X_t|^2 / (2 pi)
    lhs = np.sum(np.abs(table.scores) ** 2)
    rhs = np.sum(s.coeffs ** 2) / (2 * np.pi)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_inverse_rejects_asymmetric_table():
    rng = np.random.default_rng(5)
    scores = rng.normal(size=(16, 15)) + 1j * rng.normal(size=(16, 15))
    with pytest.raises(ValueError, match="conjugate"):
        inverse_fdft(FdftTable(scores))


def test_periodogram_score():
    table = fdft_all(_series(16, seed=6))
    v = periodogram_score(table, 3, 2, 5)
    assert v == pytest.approx(table.row(3)[1] * np.conj(table.row(3)[4]))
    # Hermitian in the component pair
    assert periodogram_score(table, 3, 5, 2) == pytest.approx(np.conj(v))
