"""Functional discrete Fourier transform on coefficient matrices.

For a series X_0, ..., X_{T-1} the fDFT at the Fourier frequency
omega_j = 2 pi j / T is

    D_j = (2 pi T)^(-1/2) sum_t X_t exp(-i omega_j t),    j = 1, ..., T,

computed coordinate-wise on the basis coefficients.  Scores are stored in
natural DFT order, i.e. array row k holds the score for j = k mod T (row 0
is the zero frequency, j = T).  Frequency indices are reduced mod T
throughout, so j + h is always defined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .funcseries import BasisDescriptor, FunctionalSeries


@dataclass(frozen=True)
class FdftTable:
    """T x L complex score matrix of fDFT values at all Fourier frequencies."""

    scores: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=complex)
        if scores.ndim != 2:
            raise ValueError("scores must be a 2-d array")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)

    @property
    def T(self) -> int:
        return self.scores.shape[0]

    @property
    def n_basis(self) -> int:
        return self.scores.shape[1]

    def row(self, j: int) -> np.ndarray:
        """Scores at frequency index j (any integer; reduced mod T)."""
        return self.scores[j % self.T]


def fdft_all(series: FunctionalSeries) -> FdftTable:
    """Transform every coefficient column; O(T log T) via the FFT."""
    X = series.coeffs
    T = X.shape[0]
    scores = np.fft.fft(X, axis=0) / np.sqrt(2.0 * np.pi * T)
    return FdftTable(scores)


def inverse_fdft(table: FdftTable, imag_tol: float = 1e-10) -> FunctionalSeries:
    """Invert the fDFT: X_t = sqrt(2 pi / T) sum_j D_j exp(+i omega_j t).

    The imaginary residue is asserted below `imag_tol` (relative to the
    coefficient scale) before being discarded.
    """
    T = table.T
    coeffs = np.fft.ifft(table.scores, axis=0) * np.sqrt(2.0 * np.pi * T)
    scale = max(np.max(np.abs(coeffs)), 1.0)
    resid = np.max(np.abs(coeffs.imag))
    if resid > imag_tol * scale:
        raise ValueError(
            f"inverse fDFT has imaginary residue {resid:.3e}; "
            "input table is not conjugate-symmetric"
        )
    basis = BasisDescriptor(n_basis=table.n_basis)
    return FunctionalSeries(coeffs.real.copy(), basis)


def periodogram_score(table: FdftTable, j: int, l1: int, l2: int) -> complex:
    """(l1, l2) coordinate of the periodogram tensor D_j (x) conj(D_j).

    Basis indices are 1-based to match the series representation.
    """
    row = table.row(j)
    return complex(row[l1 - 1] * np.conj(row[l2 - 1]))
