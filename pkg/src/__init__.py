from .core import (
    AlgoConfig,
    BaselineConfig,
    ConstantsBundle,
    InequalityChecker,
    PMMSoptSolver,
    ProjectedSASolver,
    StochasticProgram,
    bounds_summary,
    build_instance,
    validate_constants,
)
from .experiment_app import ExperimentApp, ExperimentConfig, RegretReport, empirical_tail, rate_fit
