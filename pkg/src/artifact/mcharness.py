"""Monte Carlo experiment runner: rejection tables, densities, contours.

Each experiment cell (model, T, variant, M) runs R seeded replications of
simulate -> run_test and aggregates the median statistic, rejection rates
at the 5% and 1% levels, and the average projection dimension and
variation explained.  Output files:

* ``summary.csv``  columns model,T,variant,M,median_Q,rej05,rej01,avg_L,aTVE
* ``density_<cell>.csv``  empirical density of Q with chi-squared reference
* ``contour_<cell>.csv``  run-averaged squared-modulus gamma_1 surface
* ``experiment.json``  the full specification, echoed for provenance
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field, asdict

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import chi2, gaussian_kde

from .dgp import MODEL_IDS, DgpSpec, simulate_with_rng
from .fdft import fdft_all
from .funcseries import basis_matrix, demean_series
from .specest import (KernelSpec, default_bandwidth, eigendecompose,
                      estimate_spectral_density)
from .teststat import TestConfig, run_test
from .tuning import select_fixed_directions

#: cells fail loudly when more than this fraction of replications error out
FAILURE_BUDGET = 0.01

#: models whose innovations are non-Gaussian by default (law, df)
DEFAULT_LAWS = {"g": ("t", 19.0), "h": ("t", 10.0)}

LARGE_T = 512


def default_law(model: str) -> tuple[str, float]:
    return DEFAULT_LAWS.get(model, ("gaussian", 0.0))


@dataclass(frozen=True)
class ExperimentSpec:
    models: tuple
    sample_sizes: tuple
    variants: tuple = ("eigen",)
    M_values: tuple = (1,)
    replications: int = 200
    seed: int = 0
    law: str | None = None       # override per-model default innovation law
    df: float = 19.0
    out_dir: str | None = None
    threads: int = 1
    allow_large: bool = False    # permit T beyond 512
    densities: bool = True
    include_fourth: bool = True

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "sample_sizes",
                          tuple(int(t) for t in self.sample_sizes))
        object.__setattr__(self, "variants", tuple(self.variants))
        object.__setattr__(self, "M_values",
                          tuple(int(m) for m in self.M_values))
        if self.replications < 1:
            raise ValueError("need at least one replication")
        for m in self.models:
            if m not in MODEL_IDS:
                raise ValueError(
                    f"unknown model {m!r}; valid ids: {', '.join(MODEL_IDS)}"
                )
        if not self.allow_large and any(t > LARGE_T for t in self.sample_sizes):
            raise ValueError(
                f"T > {LARGE_T} is opt-in (variance estimation cost); "
                "set allow_large"
            )

    def cells(self):
        for model in self.models:
            for T in self.sample_sizes:
                for variant in self.variants:
                    for M in self.M_values:
                        yield (model, T, variant, M)


def _cell_name(model, T, variant, M) -> str:
    return f"{model}_T{T}_{variant}_M{M}"


def _one_replication(model, T, variant, M, law, df, include_fourth, rng):
    series = simulate_with_rng(DgpSpec(model, T, law=law, df=df), rng)
    config = TestConfig(variant=variant, M=M, include_fourth=include_fourth)
    return run_test(series, config)


def run_cell(spec: ExperimentSpec, model, T, variant, M, seed_seq):
    """All replications of one cell; returns (summary row, Q values)."""
    law, df = (spec.law, spec.df) if spec.law else default_law(model)
    rngs = [np.random.default_rng(s) for s in seed_seq.spawn(spec.replications)]
    results = Parallel(n_jobs=spec.threads)(
        delayed(_try_replication)(model, T, variant, M, law, df,
                                  spec.include_fourth, rng)
        for rng in rngs
    )
    ok = [r for r in results if not isinstance(r, Exception)]
    failures = [r for r in results if isinstance(r, Exception)]
    budget = max(1, int(np.ceil(FAILURE_BUDGET * spec.replications)))
    if len(failures) > budget:
        raise RuntimeError(
            f"cell {_cell_name(model, T, variant, M)}: {len(failures)} of "
            f"{spec.replications} replications failed "
            f"(budget {budget}); first error: {failures[0]}"
        )
    Q = np.array([r.Q for r in ok])
    row = {
        "model": model,
        "T": T,
        "variant": variant,
        "M": M,
        "median_Q": float(np.median(Q)),
        "rej05": float(100.0 * np.mean([r.reject_05 for r in ok])),
        "rej01": float(100.0 * np.mean([r.reject_01 for r in ok])),
        "avg_L": float(np.mean([r.L for r in ok])),
        "aTVE": float(np.mean([r.aTVE for r in ok])),
    }
    return row, Q, len(failures)


def _try_replication(model, T, variant, M, law, df, include_fourth, rng):
    try:
        return _one_replication(model, T, variant, M, law, df,
                                include_fourth, rng)
    except Exception as exc:   # budgeted, re-raised by run_cell if over
        return exc


def run_experiment(spec: ExperimentSpec) -> list[dict]:
    """Run all cells; write summary/density/provenance files if out_dir set."""
    master = np.random.SeedSequence(spec.seed)
    cells = list(spec.cells())
    cell_seeds = master.spawn(len(cells))
    rows = []
    densities = {}
    total_failures = 0
    for (model, T, variant, M), seq in zip(cells, cell_seeds):
        row, Q, nfail = run_cell(spec, model, T, variant, M, seq)
        rows.append(row)
        total_failures += nfail
        if spec.densities and len(Q) >= 50:
            trim = 0.025 if model == "e" else 0.0
            densities[_cell_name(model, T, variant, M)] = \
                empirical_density(Q, 2 * M, trim=trim)
    if spec.out_dir:
        os.makedirs(spec.out_dir, exist_ok=True)
        write_summary(os.path.join(spec.out_dir, "summary.csv"), rows)
        for name, table in densities.items():
            _write_grid(os.path.join(spec.out_dir, f"density_{name}.csv"),
                        ("x", "empirical", "chi2"), table)
        echo = asdict(spec)
        echo["total_failures"] = total_failures
        with open(os.path.join(spec.out_dir, "experiment.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(echo, fh, indent=2, default=list)
    return rows


def write_summary(path, rows) -> None:
    cols = ["model", "T", "variant", "M", "median_Q", "rej05", "rej01",
            "avg_L", "aTVE"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols)
        writer.writeheader()
        writer.writerows(rows)


def empirical_density(Q, df: int, n_grid: int = 200,
                      trim: float = 0.0) -> np.ndarray:
    """Grid of (x, empirical density, chi2_df density) for Q values.

    `trim` removes that top fraction of the sample before smoothing (used
    for heavy-tailed alternatives where a few runs dwarf the scale).
    """
    Q = np.sort(np.asarray(Q, dtype=float))
    if Q.size < 50:
        raise ValueError("need at least 50 values for a density estimate")
    if trim > 0:
        Q = Q[: int(np.ceil((1.0 - trim) * Q.size))]
    hi = max(float(Q.max()), chi2(df).ppf(0.999)) * 1.05
    x = np.linspace(0.0, hi, n_grid)
    if np.ptp(Q) < 1e-12:
        emp = np.zeros_like(x)
        emp[np.argmin(np.abs(x - Q[0]))] = 1.0 / (x[1] - x[0])
    else:
        emp = gaussian_kde(Q)(x)
    return np.column_stack([x, emp, chi2(df).pdf(x)])


def _write_grid(path, header, table) -> None:
    np.savetxt(path, table, delimiter=",", header=",".join(header),
               comments="")


def contour_gamma(model: str, T: int, variant: str = "eigen",
                  replications: int = 50, seed: int = 0, G: int = 64,
                  threads: int = 1) -> np.ndarray:
    """Run-averaged squared-modulus surface of the lag-1 covariance gamma_1.

    Per replication the per-direction gamma_1 values are mapped to
    coefficients on the tensor basis psi_l (x) psi_l' (fixed variant
    directly; eigen variant through the frequency-averaged eigenvector
    coordinates), the surface is evaluated on a uniform G x G grid of
    [0,1]^2, and |surface|^2 is averaged over runs.
    """
    if replications < 10:
        raise ValueError("contour needs at least 10 replications")
    law, df = default_law(model)
    seqs = np.random.SeedSequence(seed).spawn(replications)
    results = Parallel(n_jobs=threads)(
        delayed(_contour_coeffs)(model, T, variant, law, df,
                                 np.random.default_rng(s))
        for s in seqs
    )
    Lb = results[0].shape[0]
    grid = np.linspace(0.0, 1.0, G)
    from .funcseries import BasisDescriptor
    B = basis_matrix(BasisDescriptor(n_basis=Lb), grid)   # G x Lb
    acc = np.zeros((G, G))
    for C in results:
        S = B @ C @ B.T
        acc += np.abs(S) ** 2
    return acc / replications


def _contour_coeffs(model, T, variant, law, df, rng):
    """15 x 15 coefficient matrix of the gamma_1 surface for one run."""
    series = simulate_with_rng(DgpSpec(model, T, law=law, df=df), rng)
    series = demean_series(series)
    table = fdft_all(series)
    est = estimate_spectral_density(table, KernelSpec(default_bandwidth(T)))
    Lb = table.n_basis
    D = table.scores
    if variant == "fixed":
        from .teststat import gamma_fixed
        dirs = select_fixed_directions(est)
        C = np.zeros((Lb, Lb), dtype=complex)
        for l in dirs:
            for lp in dirs:
                C[l - 1, lp - 1] = gamma_fixed(table, est, 1, l, lp)
        return C
    eig = eigendecompose(est)
    from .teststat import gamma_eigen
    from .tuning import select_L
    L = select_L(eig, 1)
    vbar = eig.vectors[:, :, :L].mean(axis=0)      # Lb x L
    C = np.zeros((Lb, Lb), dtype=complex)
    for m in range(1, L + 1):
        g = gamma_eigen(table, eig, 1, m)
        v = vbar[:, m - 1]
        C += g * np.outer(v, np.conj(v))
    return C


def write_contour(path, grid: np.ndarray) -> None:
    """CSV with columns tau1, tau2, value for a square grid on [0,1]^2."""
    G = grid.shape[0]
    tau = np.linspace(0.0, 1.0, G)
    rows = [(tau[i], tau[j], grid[i, j]) for i in range(G) for j in range(G)]
    _write_grid(path, ("tau1", "tau2", "value"), np.array(rows))


PRESETS = {
    "table1-quick": dict(models=("a", "b", "c"), sample_sizes=(128, 256, 512),
                         variants=("eigen",), M_values=(1,), replications=200),
    "table1-full": dict(models=("a", "b", "c"), sample_sizes=(128, 256, 512),
                        variants=("eigen",), M_values=(1,), replications=1000),
    "table3-quick": dict(models=("d", "e", "f"), sample_sizes=(128, 256, 512),
                         variants=("eigen",), M_values=(1,), replications=200),
    "table3-full": dict(models=("d", "e", "f"), sample_sizes=(128, 256, 512),
                        variants=("eigen",), M_values=(1,), replications=1000),
    "table4-quick": dict(models=("g", "h"), sample_sizes=(128, 256),
                         variants=("eigen",), M_values=(1,), replications=200),
    "table4-full": dict(models=("g", "h"), sample_sizes=(128, 256),
                        variants=("eigen",), M_values=(1,), replications=1000),
}


def preset_spec(name: str, **overrides) -> ExperimentSpec:
    if name not in PRESETS:
        raise ValueError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        )
    kwargs = dict(PRESETS[name])
    kwargs.update(overrides)
    return ExperimentSpec(**kwargs)
