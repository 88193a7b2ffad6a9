"""Numerical laboratory for contact Hamilton-Jacobi equations on the torus.

The package evolves u_t + H(x, u, u_x) = 0 with two independent schemes,
computes stationary solutions three ways, extracts 1-jet graphs and their
Hausdorff distances, integrates contact characteristics, and fits decay
rates against the model's structural rate constant. The `contact-hj-lab`
command drives full experiments from TOML configs.
"""

from .errors import (
    BracketInvalid,
    CflViolation,
    ConfigError,
    ContactLabError,
    EmptyCloud,
    EmptySlab,
    GridMismatch,
    InsufficientData,
    NonFinite,
    NonPositiveValues,
    NotConverged,
    NotDiscountedForm,
    VelocityOutOfRange,
)
from .fields import FLOAT_FMT, GridFn, TorusGrid, sup_dist
from .models import (
    MODEL_NAMES,
    ContactModel,
    concave_model,
    counterexample_model,
    frozen_model,
    make_model,
    mechanical_model,
    quad_model,
    validate_assumptions,
)
from .evolve import LF, SL, EvolveConfig, EvolutionRun, evolve, run_batch
from .flow import Trajectory, integrate
from .jets import JetCloud, JetPoint, extract_jets, hausdorff, reachable_differentials
from .stationary import (
    CriticalValueResult,
    StationaryResult,
    admissible_shift,
    critical_value,
    solve_discounted,
    solve_longtime,
    stationary_residual,
)
from .diagnostics import (
    CompactSlab,
    KeyLemmaReport,
    RateFit,
    SamplePlan,
    fit_rate,
    hamiltonian_residual_series,
    hausdorff_series,
    key_lemma_check,
    l_u_eval,
    lambda_estimate,
    sup_error_series,
)
from .properties import PropertyResult, run_property_suite
from .config import ExperimentConfig, load_config

__version__ = "0.1.0"

__all__ = [
    "BracketInvalid", "CflViolation", "ConfigError", "ContactLabError",
    "EmptyCloud", "EmptySlab", "GridMismatch", "InsufficientData",
    "NonFinite", "NonPositiveValues", "NotConverged", "NotDiscountedForm",
    "VelocityOutOfRange",
    "FLOAT_FMT", "GridFn", "TorusGrid", "sup_dist",
    "MODEL_NAMES", "ContactModel", "concave_model", "counterexample_model",
    "frozen_model", "make_model", "mechanical_model", "quad_model",
    "validate_assumptions",
    "LF", "SL", "EvolveConfig", "EvolutionRun", "evolve", "run_batch",
    "Trajectory", "integrate",
    "JetCloud", "JetPoint", "extract_jets", "hausdorff",
    "reachable_differentials",
    "CriticalValueResult", "StationaryResult", "admissible_shift",
    "critical_value", "solve_discounted", "solve_longtime",
    "stationary_residual",
    "CompactSlab", "KeyLemmaReport", "RateFit", "SamplePlan", "fit_rate",
    "hamiltonian_residual_series", "hausdorff_series", "key_lemma_check",
    "l_u_eval", "lambda_estimate", "sup_error_series",
    "PropertyResult", "run_property_suite",
    "ExperimentConfig", "load_config",
    "__version__",
]
