"""Frequency-domain second-order stationarity testing for functional time
series: spectral estimation, eigen and fixed-projection test statistics,
benchmark process simulation, and a Monte Carlo harness."""

__version__ = "0.1.0"

from .funcseries import (BasisDescriptor, FunctionalSeries, demean_series,
                         fourier_basis_eval, project_curves, read_series_csv,
                         reconstruct, write_coefficient_csv)
from .fdft import FdftTable, fdft_all, inverse_fdft, periodogram_score
from .specest import (EigenSystem, KernelSpec, SpectralEstimate, atve,
                      canonical_phase, default_bandwidth,
                      default_fourth_order_bandwidth, eigendecompose,
                      estimate_spectral_density, kernel_weight)
from .tuning import (TuningParams, fast_decay_check, select_L,
                     select_fixed_directions)
from .fourthorder import (estimate_sigma_eigen, estimate_sigma_fixed,
                          phi_indicator, raw_tri_periodogram,
                          smoothed_tri_spectrum)
from .teststat import (GammaSet, TestConfig, TestResult, beta_h, build_bM,
                       gamma_eigen, gamma_fixed, p_value, quadratic_form,
                       run_test)
from .dgp import DgpSpec, OperatorSpec, gen_operator_matrix, innovations, simulate
from .mcharness import (ExperimentSpec, contour_gamma, empirical_density,
                        preset_spec, run_experiment)

__all__ = [name for name in dir() if not name.startswith("_")]
