"""Double-step Rothe scheme for second-order evolution inclusions on Galerkin spaces."""

from .errors import (
    ConfigError,
    OracleError,
    PreconditionError,
    ReferenceFailure,
    SetupError,
    SolverError,
)
from .spaces import (
    GalerkinSetting,
    IntervalSet,
    OperatorA,
    OperatorB,
    ScalarLaw,
    Superpotential,
    VertexSet,
    dual_norm,
    linear_operator_a,
    separable_superpotential,
    validate_hypotheses,
    zero_superpotential,
)
from .timegrid import InitialData, LoadSpec, TimeGrid, average_load, average_loads, select_initial_data
from .inclusion import SolveOptions, SolveResult, StepOperator, scalar_oracle_solve, solve_inclusion
from .stepper import (
    RotheTrajectory,
    assemble_first_rhs,
    assemble_step_rhs,
    coercivity_threshold,
    double_step_derivative,
    run_scheme,
)
from .interpolants import RotheInterpolants, exact_bv2_seminorm_sq, interpolant_gaps
from .problems import (
    ManufacturedCase,
    ProblemInstance,
    build_rod_problem,
    friction_potential,
    manufactured_problem,
    polynomial_motion,
    sine_motion,
)
from .diagnostics import (
    apriori_quantities,
    apriori_suite,
    identity_double_step_inner,
    identity_second_difference,
    increment_inequality,
    run_validation,
)
from .study import StudyReport, run_study

__version__ = "0.1.0"
