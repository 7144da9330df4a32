"""Structure-preserving integrators for charged-particle motion.

The package integrates the Lorentz force system in its non-canonical
Hamiltonian form z' = K(z) grad H(z) with discrete line integral (DLI)
one-step methods, whose headline instance ``bdli`` uses Boole's rule and
conserves polynomial energies of degree <= 4 exactly (up to solver
tolerance).  Boris and RK4 steppers are included as references, along
with conserved-quantity diagnostics and reproducible experiment drivers.
"""

from .diagnostics import (
    QUANTITIES,
    DiagnosticRecord,
    ZeroFieldError,
    cylindrical_projection,
    diagnostic_records,
    error_series,
    magnetic_moment,
    quantity_series,
    toroidal_momentum,
)
from .experiments import (
    BUILTIN_SCENARIOS,
    ComparisonReport,
    ConfigError,
    ConvergenceStudy,
    RunSummary,
    Scenario,
    builtin_scenario,
    compare_methods,
    convergence_study,
    load_config,
    parse_step_size,
    run_scenario,
    scenario_to_config,
)
from .fields import (
    FIELD_MODELS,
    CylindricalDriftField,
    FieldModel,
    FieldSingularityError,
    PotentialUnavailableError,
    QuarticWellField,
    TokamakField,
    UniformField,
    make_field,
)
from .hamiltonian import (
    ChargedParticleSystem,
    PhaseState,
    energy,
    grad_energy,
    k_matrix,
    vector_field,
)
from .integrators import (
    IntegrationError,
    NonConvergenceError,
    SingularityError,
    SolverOptions,
    StepReport,
    Trajectory,
    boris_step,
    dli_residual,
    dli_step,
    integrate,
    resolve_rule,
    rk4_step,
)
from .linalg import Mat3, PhaseVec, Vec3, cross, hat
from .quadrature import (
    QuadratureRule,
    builtin_rule,
    register_rule,
    weighted_gradient,
)

__version__ = "0.1.0"
