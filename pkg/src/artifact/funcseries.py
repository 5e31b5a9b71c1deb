"""Functional observations as Fourier-basis coefficient matrices.

A functional time series X_1, ..., X_T of curves on [0, 1] is represented by
the T x L matrix of inner products with the orthonormal Fourier system

    psi_1 = 1,  psi_2k(tau) = sqrt(2) cos(2 pi k tau),
    psi_{2k+1}(tau) = sqrt(2) sin(2 pi k tau).

Raw discretized curves are projected onto this system by trapezoid
quadrature; coefficient matrices can be used directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_N_BASIS = 15


@dataclass(frozen=True)
class BasisDescriptor:
    """Orthonormal Fourier basis on the unit interval."""

    kind: str = "fourier"
    n_basis: int = DEFAULT_N_BASIS
    domain: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.kind != "fourier":
            raise ValueError(f"unsupported basis kind: {self.kind!r}")
        if self.n_basis < 1:
            raise ValueError("n_basis must be >= 1")
        if tuple(self.domain) != (0.0, 1.0):
            raise ValueError("basis domain is fixed to [0, 1]")


@dataclass(frozen=True)
class FunctionalSeries:
    """T x L real coefficient matrix plus the basis it refers to.

    Row t holds (<X_t, psi_1>, ..., <X_t, psi_L>).  Instances are
    immutable; operations return new objects.
    """

    coeffs: np.ndarray
    basis: BasisDescriptor = field(default_factory=BasisDescriptor)
    demeaned: bool = False

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 2:
            raise ValueError("coeffs must be a 2-d array")
        if coeffs.shape[0] < 8:
            raise ValueError("need at least T = 8 observations")
        if coeffs.shape[1] != self.basis.n_basis:
            raise ValueError(
                f"coeffs has {coeffs.shape[1]} columns, basis expects "
                f"{self.basis.n_basis}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coeffs contains non-finite entries")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def T(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_basis(self) -> int:
        return self.coeffs.shape[1]


def fourier_basis_eval(l, tau):
    """Evaluate the l-th orthonormal Fourier basis function at tau.

    Parameters
    ----------
    l : int
        Basis index, 1-based.  l=1 is the constant function, even l are
        cosines, odd l >= 3 are sines.
    tau : float or array_like
        Evaluation points in [0, 1].

    Returns
    -------
    float or ndarray
    """
    if l < 1:
        raise ValueError("basis index l must be >= 1")
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0.0) or np.any(tau > 1.0):
        raise ValueError("tau must lie in [0, 1]")
    if l == 1:
        out = np.ones_like(tau)
    elif l % 2 == 0:
        k = l // 2
        out = np.sqrt(2.0) * np.cos(2.0 * np.pi * k * tau)
    else:
        k = (l - 1) // 2
        out = np.sqrt(2.0) * np.sin(2.0 * np.pi * k * tau)
    return out if out.ndim else float(out)


def basis_matrix(basis: BasisDescriptor, grid) -> np.ndarray:
    """G x L matrix with columns psi_l evaluated on the grid."""
    grid = np.asarray(grid, dtype=float)
    return np.column_stack(
        [fourier_basis_eval(l, grid) for l in range(1, basis.n_basis + 1)]
    )


def project_curves(samples, basis: BasisDescriptor | None = None,
                   demean: bool = False) -> FunctionalSeries:
    """Project discretized curves onto the Fourier basis.

    `samples` is a T x G matrix of curve values on the uniform grid of G
    points spanning [0, 1] (endpoints included).  Inner products are
    computed with the composite trapezoid rule, which is spectrally
    accurate for this periodic basis.
    """
    if basis is None:
        basis = BasisDescriptor()
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise ValueError("samples must be a T x G matrix")
    G = samples.shape[1]
    if G < 2 * basis.n_basis:
        raise ValueError(
            f"grid of {G} points cannot resolve {basis.n_basis} basis "
            "functions; need G >= 2 * n_basis"
        )
    grid = np.linspace(0.0, 1.0, G)
    B = basis_matrix(basis, grid)
    w = np.full(G, 1.0 / (G - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    coeffs = samples @ (B * w[:, None])
    series = FunctionalSeries(coeffs, basis)
    if demean:
        series = demean_series(series)
    return series


def demean_series(series: FunctionalSeries) -> FunctionalSeries:
    """Subtract the sample mean from every coefficient column."""
    centered = series.coeffs - series.coeffs.mean(axis=0)
    return replace(series, coeffs=centered, demeaned=True)


def reconstruct(series: FunctionalSeries, grid) -> np.ndarray:
    """Evaluate the curves on a grid: samples[t, g] = sum_l c[t, l] psi_l(g)."""
    B = basis_matrix(series.basis, grid)
    return series.coeffs @ B.T


# ---------------------------------------------------------------------------
# CSV interfaces.  Two layouts are understood:
#   * curve CSV: header tau_0,...,tau_{G-1}, one row of curve values per t;
#   * coefficient CSV: header c1,...,cL, one row of basis coefficients per t.


def _read_table(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path}: empty file")
        names = [c.strip() for c in header.split(",")]
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise ValueError(f"{path}: malformed numeric data: {exc}") from None
    if data.shape[1] != len(names):
        raise ValueError(f"{path}: row width does not match header")
    return names, data


def read_series_csv(path, n_basis: int = DEFAULT_N_BASIS,
                    demean: bool = True) -> FunctionalSeries:
    """Load a functional series from CSV, auto-detecting the layout.

    Headers starting with ``tau_`` denote discretized curves (projected via
    quadrature); headers ``c1..cL`` denote ready-made coefficients.  Raw
    curves are demeaned by default.
    """
    names, data = _read_table(path)
    if all(n.startswith("tau_") for n in names):
        basis = BasisDescriptor(n_basis=n_basis)
        return project_curves(data, basis, demean=demean)
    if all(n.startswith("c") for n in names):
        basis = BasisDescriptor(n_basis=data.shape[1])
        series = FunctionalSeries(data, basis)
        return demean_series(series) if demean else series
    raise ValueError(
        f"{path}: cannot detect CSV layout from header (expected tau_* or c*)"
    )


def write_coefficient_csv(path, series: FunctionalSeries) -> None:
    header = ",".join(f"c{l}" for l in range(1, series.n_basis + 1))
    np.savetxt(path, series.coeffs, delimiter=",", header=header, comments="")
