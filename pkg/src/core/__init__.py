from .problem import ConstantsBundle, StochasticProgram, ValidationReport, validate_constants, finite_diff_check
from .trace import RunTrace, StepRecord
from .pmmsopt import AlgoConfig, ParameterRule, PMMSoptSolver, run_pmmsopt
from .inequalities import InequalityChecker, InequalityReport
from .bounds import BoundConstants, DriftParams, bounds_summary, check_drift, kappa_constants
from .instances import InstanceDescriptor, build_instance, exact_solution, make_affine_qp, make_scalar_toy
from .baseline import BaselineConfig, ProjectedSASolver, run_projected_sa
