"""Regularized M-estimators of scatter for complex elliptical data.

Fixed-point solvers for penalized M-estimators of a Hermitian positive
definite scatter matrix (Gaussian, Huber and Tyler losses), closed-form
shrinkage selection, samplers for complex elliptical models, and the
simulation drivers for shape-estimation and adaptive-detection studies.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .hpd import geodesic_point, is_positive_definite, random_hpd
from .rho import Gaussian, Huber, Tyler, check_condition1, huber_constants
from .estimators import (
    ConvergenceWarning,
    EstimateReport,
    cwh,
    fixed_point_map,
    glc,
    penalized_cost,
    reg_tyler,
    scm,
    solve_regularized_m,
    tyler,
)
from .tuning import (
    clairvoyant_estimate,
    oracle_alpha_complex,
    oracle_alpha_cwh,
    oracle_alpha_real,
    plugin_alpha,
    plugin_alpha_cwh,
    shape_matrix,
)
from .sampling import SeedSpec, complex_normal, k_distribution, random_cov, sample_ces, toeplitz_cov
from .metrics import check_condition_a, check_condition_b, shape_distance
from .detection import PdConfig, PfaConfig, nmf_statistic, run_pd_experiment, run_pfa_experiment, threshold_for_pfa
from .shape_experiment import ShapeSweepConfig, run_shape_sweep
