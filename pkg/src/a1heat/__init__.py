"""Rank-one W-invariant heat kernel of the Opdam-Cherednik Laplacian.

Evaluation (spectral, closed form at k = 1, PDE), the two-sided envelope,
the region geometry of the comparison argument, the comparison functions
themselves and the numerical verification campaigns.
"""

from .envelope import (RootDatum, VectorPoint, envelope_E_rank1, log_envelope_E_rank1,
                       envelope_conjecture_general, dunkl_flat_envelope, complex_case_envelope)
from .errors import A1HeatError, ConfigurationError, DomainError, EvaluationError
from .kernels import (DEFAULT_CONFIG, EvalPoint, KernelConfig, PdeGrid, dunkl_heat_kernel_rank1,
                      heat_kernel_closed_k1, heat_kernel_pde, heat_kernel_spectral,
                      log_heat_kernel_spectral)
from .regions import (RegionLabel, RegionParams, classify, cover_windows, d2_partition_weights,
                      derive_params)
from .specfun import G_function, Multiplicity, QuadratureSpec, phi0, phi_lambda, plancherel_density
from .supersolutions import AuxSpec, aux_value, glued_value, sign_sweep
from .verify import (GridSpec, McConfig, mass_check, mc_density_check, oracle_crosscheck,
                     preset_grid, ratio_sweep, remainder_sweep, semigroup_check)

__version__ = "0.1.0"

__all__ = [
    "A1HeatError", "AuxSpec", "ConfigurationError", "DEFAULT_CONFIG", "DomainError",
    "EvalPoint", "EvaluationError", "G_function", "GridSpec", "KernelConfig", "McConfig",
    "Multiplicity", "PdeGrid", "QuadratureSpec", "RegionLabel", "RegionParams", "RootDatum",
    "VectorPoint", "aux_value", "classify", "complex_case_envelope", "cover_windows",
    "d2_partition_weights", "derive_params", "dunkl_flat_envelope", "dunkl_heat_kernel_rank1",
    "envelope_E_rank1", "envelope_conjecture_general", "glued_value", "heat_kernel_closed_k1",
    "heat_kernel_pde", "heat_kernel_spectral", "log_envelope_E_rank1",
    "log_heat_kernel_spectral", "mass_check", "mc_density_check", "oracle_crosscheck", "phi0",
    "phi_lambda", "plancherel_density", "preset_grid", "ratio_sweep", "remainder_sweep",
    "semigroup_check", "sign_sweep",
]
