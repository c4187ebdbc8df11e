"""Capacity of arbitrarily varying channels under power-constrained jamming.

Closed-form and numerical evaluators for Gaussian product channels,
colored Gaussian noise, discrete channels with fixed parameters and
fixed fading, plus a Monte Carlo check of the deterministic-code
phase transition.
"""

__version__ = "0.1.0"

from .channel_model import (
    Constraints,
    DiscreteAVCSpec,
    FadingSpec,
    ParallelGaussianSpec,
    SpectralSpec,
    ar1_autocorr,
    dump_spec,
    load_spec,
    parse_spec,
    spec_digest,
)
from .discrete_avc import (
    bsc_example,
    bsc_spec,
    deterministic_capacity_fixed_params,
    find_symmetrizer,
    grid_oracle,
    min_symm_cost,
    mutual_info_cond,
    per_parameter_decomposition,
    random_capacity_fixed_params,
    symm_threshold,
)
from .errors import (
    AVCError,
    DimensionMismatch,
    DomainError,
    NotPSD,
    ParseError,
    SolverDidNotConverge,
    ValidationError,
)
from .fading import fading_det_capacity, fading_random_capacity, fading_symm_cost
from .jamming_sim import SimConfig, Strategy, simulate
from .spectral import (
    colored_capacity,
    eval_G,
    freq_double_waterfill,
    szego_convergence,
    toeplitz_capacity,
)
from .units import get_log_base, log_base, set_log_base
from .waterfill import (
    closed_form_capacity,
    double_waterfill,
    random_code_capacity_product,
    saddle_check,
    scalar_capacity,
    verify_kkt,
    water_level,
)
