"""Selection of the projection dimension L and of fixed direction sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .specest import EigenSystem, SpectralEstimate, atve


@dataclass(frozen=True)
class TuningParams:
    # variation-explained corridor and eigenvalue-ratio floor
    zeta1: float = 0.70
    zeta2: float = 0.90
    xi: float = 0.15
    # fast-decay thresholds for the 2nd/3rd/4th eigenvalue ratios
    xi1: float = 0.5
    xi2: float = 0.25
    xi3: float = 0.125
    # relaxed corridor used when the spectrum decays fast
    zeta2_fast: float = 0.995
    xi_fast: float = 0.01

    def __post_init__(self):
        if not self.zeta1 < self.zeta2:
            raise ValueError("zeta1 must be below zeta2")


def _inf_ratio(eig: EigenSystem) -> np.ndarray:
    """inf_j lambda_l / inf_j lambda_1 for every l (1-based order)."""
    inf_l = eig.values.min(axis=0)
    if inf_l[0] <= 0:
        raise ValueError("leading eigenvalue vanishes at some frequency")
    return inf_l / inf_l[0]


def fast_decay_check(eig: EigenSystem, params: TuningParams | None = None) -> bool:
    """True when the 2nd-4th eigenvalues all decay below their thresholds."""
    if params is None:
        params = TuningParams()
    if eig.n_basis < 4:
        raise ValueError("fast-decay check needs at least 4 eigenvalues")
    r = _inf_ratio(eig)
    return bool(r[1] < params.xi1 and r[2] < params.xi2 and r[3] < params.xi3)


def select_L(eig: EigenSystem, M: int,
             params: TuningParams | None = None) -> int:
    """Projection dimension from the variation-explained corridor.

    Takes the largest l whose cumulative explained variation lies strictly
    inside (zeta1, zeta2) and whose worst-case eigenvalue ratio clears xi,
    then subtracts floor(log M) (natural log) as a lag penalty.  The result
    is floored at 1; the corridor is relaxed for fast-decaying spectra.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if params is None:
        params = TuningParams()
    zeta2, xi = params.zeta2, params.xi
    if eig.n_basis >= 4 and fast_decay_check(eig, params):
        zeta2, xi = params.zeta2_fast, params.xi_fast
    ratios = _inf_ratio(eig)
    atves = np.array([atve(eig, l) for l in range(1, eig.n_basis + 1)])
    ok = [
        l for l in range(1, eig.n_basis + 1)
        if params.zeta1 < atves[l - 1] < zeta2 and ratios[l - 1] > xi
    ]
    if not ok:
        return 1
    return max(max(ok) - int(np.floor(np.log(M))), 1)


def select_fixed_directions(est: SpectralEstimate,
                            threshold: float = 0.90) -> list[int]:
    """Smallest set of basis directions explaining `threshold` of the energy.

    Directions are ranked by the frequency-average of the diagonal spectral
    entries <Fhat psi_l, psi_l>; returns 1-based indices in rank order.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    energy = np.einsum("jll->jl", est.fhat).real.mean(axis=0)
    total = energy.sum()
    if total <= 0:
        raise ValueError("spectral estimate has no energy")
    order = np.argsort(energy)[::-1]
    cum = np.cumsum(energy[order]) / total
    count = int(np.searchsorted(cum, threshold - 1e-12) + 1)
    return [int(i) + 1 for i in order[:count]]
