"""Kernel-smoothed spectral density estimation and per-frequency eigensystems.

The spectral density operator at omega_j is estimated by smoothing the
periodogram tensors over neighbouring Fourier frequencies,

    Fhat_j = (2 pi / T) sum_k K_b(omega_j - omega_k) D_k (x) conj(D_k),

with the concave window K(x) = 6 (1/4 - x^2) on |x| <= 1/2, periodically
extended.  The smoothing is a circular convolution along the frequency
axis and is carried out with FFTs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fdft import FdftTable


def default_bandwidth(T: int) -> float:
    """Default smoothing bandwidth in radians.

    The rate is T^(-1/5) measured in cycles, i.e. 2 pi T^(-1/5) radians:
    the kernel support then spans a T^(-1/5) fraction of the frequency
    circle at every sample size, which keeps the ordinate count inside
    each window well above the basis dimension even for short series.
    """
    return 2.0 * np.pi * T ** (-0.2)


def default_fourth_order_bandwidth(T: int) -> float:
    """Default bandwidth (radians) for the fourth-order spectrum, T^(-1/6)."""
    return T ** (-1.0 / 6.0)


@dataclass(frozen=True)
class KernelSpec:
    """Paper-style concave smoothing window with bandwidth b (radians)."""

    bandwidth: float
    kind: str = "epanechnikov_paper"

    def __post_init__(self):
        if self.kind != "epanechnikov_paper":
            raise ValueError(f"unsupported kernel kind: {self.kind!r}")
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")


def kernel_weight(spec: KernelSpec, x) -> np.ndarray:
    """Periodically extended kernel K_b at signed frequency gap x (radians)."""
    x = np.asarray(x, dtype=float)
    # wrap into (-pi, pi]; supports never overlap for b < 2 pi
    xw = np.mod(x + np.pi, 2.0 * np.pi) - np.pi
    u = xw / spec.bandwidth
    val = np.where(np.abs(u) <= 0.5, 6.0 * (0.25 - u * u) / spec.bandwidth, 0.0)
    return val if val.ndim else float(val)


def kernel_weights_on_grid(spec: KernelSpec, T: int) -> np.ndarray:
    """K_b evaluated at the T circular ordinate gaps 2 pi d / T, d = 0..T-1."""
    gaps = 2.0 * np.pi * np.arange(T) / T
    return np.asarray(kernel_weight(spec, gaps))


@dataclass(frozen=True)
class SpectralEstimate:
    """Per-frequency L x L Hermitian matrices of the smoothed spectrum.

    ``fhat[k]`` estimates the operator at omega_j with j = k mod T, matching
    the row convention of FdftTable.
    """

    fhat: np.ndarray
    kernel: KernelSpec

    def __post_init__(self):
        fhat = np.asarray(self.fhat, dtype=complex)
        if fhat.ndim != 3 or fhat.shape[1] != fhat.shape[2]:
            raise ValueError("fhat must be a T x L x L array")
        fhat.setflags(write=False)
        object.__setattr__(self, "fhat", fhat)

    @property
    def T(self) -> int:
        return self.fhat.shape[0]

    @property
    def n_basis(self) -> int:
        return self.fhat.shape[1]

    def at(self, j: int) -> np.ndarray:
        return self.fhat[j % self.T]


def estimate_spectral_density(table: FdftTable,
                              spec: KernelSpec | None = None) -> SpectralEstimate:
    """Smooth the periodogram tensors over the whole frequency grid."""
    T = table.T
    if spec is None:
        spec = KernelSpec(default_bandwidth(T))
    if spec.bandwidth * T < 4:
        raise ValueError(
            f"bandwidth {spec.bandwidth:.4g} leaves fewer than a handful of "
            f"ordinates in the window at T={T}"
        )
    D = table.scores
    P = np.einsum("kl,km->klm", D, D.conj())
    w = kernel_weights_on_grid(spec, T)
    # Fhat[j] = (2 pi / T) sum_k w[(j - k) mod T] P[k]: circular convolution.
    F = np.fft.ifft(np.fft.fft(w)[:, None, None] * np.fft.fft(P, axis=0), axis=0)
    F *= 2.0 * np.pi / T
    F = 0.5 * (F + np.conj(np.transpose(F, (0, 2, 1))))
    return SpectralEstimate(F, spec)


def canonical_phase(v: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Rotate a complex vector so its first sizeable coordinate is real > 0."""
    v = np.asarray(v, dtype=complex)
    mods = np.abs(v)
    if not np.any(mods > 0):
        raise ValueError("cannot fix the phase of a zero vector")
    idx = np.argmax(mods > tol) if np.any(mods > tol) else int(np.argmax(mods))
    pivot = v[idx]
    return v * (np.abs(pivot) / pivot)


def _canonicalize_all(vecs: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Canonical phase for a T x L x L stack; vecs[j][:, l] is one eigenvector."""
    out = np.array(vecs, dtype=complex)
    T, L, _ = out.shape
    for l in range(L):
        vl = out[:, :, l]
        big = np.abs(vl) > tol
        idx = np.where(big.any(axis=1), big.argmax(axis=1),
                       np.abs(vl).argmax(axis=1))
        piv = vl[np.arange(T), idx]
        mod = np.abs(piv)
        phase = np.where(mod > 0, piv / np.where(mod > 0, mod, 1.0), 1.0)
        out[:, :, l] = vl / phase[:, None]
    return out


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (descending) and phase-canonical eigenvectors per frequency.

    ``values[j, l]`` is the (l+1)-th largest eigenvalue at frequency index j;
    ``vectors[j][:, l]`` the matching coordinate vector.
    """

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        vectors = np.asarray(self.vectors, dtype=complex)
        values.setflags(write=False)
        vectors.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "vectors", vectors)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def n_basis(self) -> int:
        return self.values.shape[1]


def eigendecompose(est: SpectralEstimate) -> EigenSystem:
    """Hermitian eigendecomposition at every frequency.

    Eigenvalues are sorted descending and clipped at zero from below when
    the negative excursion is small against the largest trace over all
    frequencies (the FFT convolution carries absolute rounding error at the
    global scale, so quiet frequencies cannot be held to a local tolerance);
    eigenvector phases are canonical.
    """
    F = est.fhat
    try:
        lam, V = np.linalg.eigh(F)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"eigendecomposition failed on the spectral estimate: {exc}"
        ) from None
    lam = lam[:, ::-1]
    V = V[:, :, ::-1]
    traces = np.trace(F, axis1=1, axis2=2).real
    floor = -1e-10 * max(float(traces.max()), 0.0)
    if np.any(lam < floor):
        j_bad = int(np.argmax((lam < floor).any(axis=1)))
        raise ValueError(
            f"spectral estimate at frequency index {j_bad} is not PSD "
            f"(min eigenvalue {lam.min():.3e})"
        )
    lam = np.maximum(lam, 0.0)
    return EigenSystem(lam, _canonicalize_all(V))


def atve(eig: EigenSystem, L: int) -> float:
    """Average over frequencies of the variation explained by the top L."""
    if not 1 <= L <= eig.n_basis:
        raise ValueError(f"L must be in [1, {eig.n_basis}]")
    totals = eig.values.sum(axis=1)
    if np.any(totals <= 0):
        raise ValueError("zero total variation at some frequency")
    return float((eig.values[:, :L].sum(axis=1) / totals).mean())
