"""Frequency-domain stationarity test: statistics, p-values, and pipeline.

The core quantities are lag-h covariances of fDFT projections,

    gamma_h(l)    = (1/T) sum_j <D_j, phi^j_l> conj <D_{j+h}, phi^{j+h}_l>
                    / sqrt(lam^j_l lam^{j+h}_l)          (eigen variant)
    gamma_h(l,l') = (1/T) sum_j D_j[l] conj D_{j+h}[l']
                    / sqrt(Fhat_j[l,l] Fhat_{j+h}[l',l'])  (fixed variant)

which vanish asymptotically under second-order stationarity.  Summing the
entries gives beta_h; stacking real and imaginary parts over M lags and
studentizing yields a quadratic form that is asymptotically chi-squared
with 2M degrees of freedom.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .fdft import FdftTable, fdft_all
from .fourthorder import (SIGMA_FLOOR, estimate_sigma_eigen,
                          estimate_sigma_fixed)
from .funcseries import FunctionalSeries, demean_series
from .specest import (EigenSystem, KernelSpec, SpectralEstimate,
                      default_bandwidth, default_fourth_order_bandwidth,
                      eigendecompose, estimate_spectral_density, atve)
from .tuning import TuningParams, select_L, select_fixed_directions


class PipelineError(RuntimeError):
    """A pipeline stage failed; `stage` names it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def _check_lag(h: int, T: int) -> None:
    if not 1 <= h <= T - 1:
        raise ValueError(f"lag must be in [1, {T - 1}], got {h}")


def gamma_eigen(table: FdftTable, eig: EigenSystem, h: int, l: int) -> complex:
    """Standardized lag-h covariance of the l-th eigenprojection scores."""
    T = table.T
    _check_lag(h, T)
    if not 1 <= l <= eig.n_basis:
        raise ValueError(f"component index out of range: {l}")
    lam = eig.values[:, l - 1]
    floor = 1e-12 * np.maximum(eig.values[:, 0], SIGMA_FLOOR)
    if np.any(lam <= floor):
        raise ValueError(
            f"eigenvalue {l} vanishes at some frequency; "
            "normalization is unstable"
        )
    v = eig.vectors[:, :, l - 1]
    s = np.einsum("jm,jm->j", table.scores, np.conj(v))
    sh = np.roll(s, -h)
    lam_sh = np.roll(lam, -h)
    return complex(np.mean(s * np.conj(sh) / np.sqrt(lam * lam_sh)))


def gamma_fixed(table: FdftTable, est: SpectralEstimate, h: int,
                l: int, lp: int) -> complex:
    """Standardized lag-h cross-covariance of two fixed basis projections."""
    T = table.T
    _check_lag(h, T)
    for idx in (l, lp):
        if not 1 <= idx <= table.n_basis:
            raise ValueError(f"direction index out of range: {idx}")
    f1 = est.fhat[:, l - 1, l - 1].real
    f2 = est.fhat[:, lp - 1, lp - 1].real
    floor1 = 1e-12 * max(float(f1.max()), SIGMA_FLOOR)
    floor2 = 1e-12 * max(float(f2.max()), SIGMA_FLOOR)
    if np.any(f1 <= floor1) or np.any(f2 <= floor2):
        raise ValueError(
            "diagonal spectral entry vanishes at some frequency; "
            "normalization is unstable"
        )
    num = table.scores[:, l - 1] * np.conj(np.roll(table.scores[:, lp - 1], -h))
    return complex(np.mean(num / np.sqrt(f1 * np.roll(f2, -h))))


@dataclass(frozen=True)
class GammaSet:
    """Per-lag gamma values: L-vectors (eigen) or L x L matrices (fixed)."""

    variant: str
    entries: dict    # lag -> ndarray

    def __post_init__(self):
        if self.variant not in ("eigen", "fixed"):
            raise ValueError(f"unknown variant {self.variant!r}")
        for h, arr in self.entries.items():
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite gamma values at lag {h}")


def beta_h(gammas: GammaSet, h: int) -> complex:
    """Sum of all gamma entries at one lag (L terms eigen, L^2 fixed)."""
    if h not in gammas.entries:
        raise ValueError(f"lag {h} not present")
    return complex(np.sum(gammas.entries[h]))


def build_bM(betas, M: int) -> np.ndarray:
    """(Re beta_1, ..., Re beta_M, Im beta_1, ..., Im beta_M)."""
    betas = np.asarray(betas, dtype=complex)
    if betas.shape != (M,):
        raise ValueError(f"expected {M} betas, got shape {betas.shape}")
    return np.concatenate([betas.real, betas.imag])


def quadratic_form(bM: np.ndarray, sigma: np.ndarray, T: int) -> float:
    """Q = T b' Sigma^{-1} b for the (possibly diagonal) 2M x 2M matrix."""
    bM = np.asarray(bM, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim == 1:
        if np.any(sigma <= 0):
            raise np.linalg.LinAlgError("singular studentizing matrix")
        return float(T * np.sum(bM ** 2 / sigma))
    try:
        sol = np.linalg.solve(sigma, bM)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError(
            "studentizing matrix is singular after regularization"
        ) from None
    return float(T * bM @ sol)


def p_value(Q: float, df: int) -> float:
    """Upper chi-squared tail probability."""
    if Q < 0:
        raise ValueError("Q must be nonnegative")
    return float(chi2.sf(Q, df))


@dataclass(frozen=True)
class TestConfig:
    variant: str = "eigen"
    M: int = 1
    lags: tuple | None = None          # default h_m = m
    bandwidth: float | None = None     # radians; default 2 pi T^(-1/5)
    bandwidth4: float | None = None    # radians; default T^(-1/6)
    L: int | None = None               # eigen dimension override
    energy_threshold: float = 0.90     # fixed-variant direction selection
    tuning: TuningParams = field(default_factory=TuningParams)
    alpha: float = 0.05
    demean: bool = True
    include_fourth: bool = True

    def __post_init__(self):
        if self.variant not in ("eigen", "fixed"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        if self.lags is not None:
            lags = tuple(int(h) for h in self.lags)
            if len(lags) != self.M:
                raise ValueError("lags must have length M")
            if any(b <= a for a, b in zip(lags, lags[1:])) or lags[0] < 1:
                raise ValueError("lags must satisfy 1 <= h_1 < ... < h_M")
            object.__setattr__(self, "lags", lags)

    def resolved_lags(self, T: int) -> tuple:
        lags = self.lags if self.lags is not None else tuple(range(1, self.M + 1))
        if lags[-1] >= T:
            raise ValueError(f"largest lag {lags[-1]} must be below T={T}")
        return lags


@dataclass(frozen=True)
class TestResult:
    variant: str
    T: int
    M: int
    lags: tuple
    L: int
    aTVE: float
    Q: float
    df: int
    p: float
    reject_05: bool
    reject_01: bool
    betas: tuple
    sigma2: tuple
    diagnostics: dict

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "T": self.T,
            "M": self.M,
            "lags": list(self.lags),
            "L": self.L,
            "aTVE": self.aTVE,
            "Q": self.Q,
            "df": self.df,
            "p": self.p,
            "reject_05": self.reject_05,
            "reject_01": self.reject_01,
            "betas": [[b.real, b.imag] for b in self.betas],
            "sigma2": list(self.sigma2),
            "diagnostics": self.diagnostics,
        }


def _stage(stage):
    def deco(fn):
        def wrapped(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except (ValueError, np.linalg.LinAlgError) as exc:
                raise PipelineError(stage, str(exc)) from exc
        return wrapped
    return deco


def run_test(series: FunctionalSeries, config: TestConfig | None = None) -> TestResult:
    """Full stationarity test on one functional series."""
    if config is None:
        config = TestConfig()
    T = series.T
    lags = config.resolved_lags(T)
    M = config.M

    if config.demean and not series.demeaned:
        series = demean_series(series)

    table = _stage("fdft")(fdft_all)(series)
    b = config.bandwidth if config.bandwidth is not None else default_bandwidth(T)
    b4 = (config.bandwidth4 if config.bandwidth4 is not None
          else default_fourth_order_bandwidth(T))
    kernel = KernelSpec(b)
    kernel4 = KernelSpec(b4)
    est = _stage("spectral-estimate")(estimate_spectral_density)(table, kernel)
    eig = _stage("eigendecomposition")(eigendecompose)(est)

    if config.variant == "eigen":
        if config.L is not None:
            L = int(config.L)
            if not 1 <= L <= eig.n_basis:
                raise PipelineError("tuning", f"L override out of range: {L}")
        else:
            L = _stage("tuning")(select_L)(eig, M, config.tuning)
        tve = _stage("tuning")(atve)(eig, L)
        entries = {
            h: np.array([gamma_eigen(table, eig, h, l) for l in range(1, L + 1)])
            for h in lags
        }
        gammas = GammaSet("eigen", entries)
        sigma2, diag = _stage("variance")(estimate_sigma_eigen)(
            table, eig, L, lags, kernel, kernel4,
            include_fourth=config.include_fourth)
        n_proj = L
    else:
        dirs = _stage("tuning")(select_fixed_directions)(
            est, config.energy_threshold)
        energy = np.einsum("jll->jl", est.fhat).real.mean(axis=0)
        tve = float(energy[[l - 1 for l in dirs]].sum() / energy.sum())
        entries = {
            h: np.array([[gamma_fixed(table, est, h, l, lp) for lp in dirs]
                         for l in dirs])
            for h in lags
        }
        gammas = GammaSet("fixed", entries)
        sigma2, diag = _stage("variance")(estimate_sigma_fixed)(
            table, est, dirs, lags, kernel4,
            include_fourth=config.include_fourth)
        diag = dict(diag)
        diag["directions"] = dirs
        n_proj = len(dirs)

    betas = np.array([beta_h(gammas, h) for h in lags])
    bM = build_bM(betas, M)
    # sigma2 entries are on the half scale of the limit theory (one white
    # noise component contributes 1/2); each half of bM has variance twice
    # that, by the frequency-mirror symmetry of the summands
    sigma_diag = 2.0 * np.concatenate([sigma2, sigma2])
    Q = _stage("quadratic-form")(quadratic_form)(bM, sigma_diag, T)
    df = 2 * M
    p = p_value(Q, df)

    diagnostics = {
        "bandwidth": b,
        "bandwidth4": b4,
        "second_order": [float(x) for x in diag.pop("second_order")],
        "fourth_order": [float(x) for x in diag.pop("fourth_order")],
    }
    for k, v in diag.items():
        diagnostics[k] = v

    return TestResult(
        variant=config.variant, T=T, M=M, lags=lags, L=n_proj,
        aTVE=float(tve), Q=Q, df=df, p=p,
        reject_05=bool(p < 0.05), reject_01=bool(p < 0.01),
        betas=tuple(complex(bb) for bb in betas),
        sigma2=tuple(float(s) for s in sigma2),
        diagnostics=diagnostics,
    )
