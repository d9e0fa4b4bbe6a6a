"""Rank-based estimation of Pickands dependence functions of
multivariate extreme-value copulas.

Modules:
    simplex     grids, partition cells and quadrature on the unit simplex
    spectral    discrete spectral measures and induced dependence functions
    empirical   pseudo-observations and empirical copulas
    estimators  Pickands / CFG / Hall-Tajvidi rank estimators
    projection  shape-constrained least-squares projection (dense QP)
    sampling    exact max-stable samplers with unit Frechet margins
    study       Monte Carlo integrated-squared-error experiments
    cli         command-line interface (simulate, estimate, project, mise)
"""

from ._accel import backend_name
from .empirical import TiesPresent, empirical_copula, pseudo_observations
from .estimators import (
    EstimatorSpec,
    cfg_estimate,
    corrected_estimate,
    estimate_surface,
    ht_estimate,
    pickands_estimate,
)
from .projection import ProjectionResult, QuadraticProgram, project, solve_qp
from .sampling import (
    AsymmetricLogisticParams,
    RngStream,
    asy_logistic_pickands,
    sample_asy_logistic,
    sample_max_linear,
)
from .simplex import AtomGrid, QuadratureRule, cell_of, enumerate_grid, l2_inner, midpoint_rule
from .spectral import (
    DependenceSurface,
    SpectralMeasure,
    check_shape,
    discretize,
    eval_copula,
    eval_pickands,
    eval_tail_dependence,
    validate,
)
from .study import MiseTable, StudyConfig, ise, run_grid, run_study

__version__ = "0.1.0"

__all__ = [
    "AsymmetricLogisticParams",
    "AtomGrid",
    "DependenceSurface",
    "EstimatorSpec",
    "MiseTable",
    "ProjectionResult",
    "QuadratureRule",
    "QuadraticProgram",
    "RngStream",
    "SpectralMeasure",
    "StudyConfig",
    "TiesPresent",
    "asy_logistic_pickands",
    "backend_name",
    "cell_of",
    "cfg_estimate",
    "check_shape",
    "corrected_estimate",
    "discretize",
    "empirical_copula",
    "enumerate_grid",
    "estimate_surface",
    "eval_copula",
    "eval_pickands",
    "eval_tail_dependence",
    "ht_estimate",
    "ise",
    "l2_inner",
    "midpoint_rule",
    "pickands_estimate",
    "project",
    "pseudo_observations",
    "run_grid",
    "run_study",
    "sample_asy_logistic",
    "sample_max_linear",
    "solve_qp",
    "validate",
]
