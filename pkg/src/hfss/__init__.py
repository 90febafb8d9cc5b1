"""Heat flow of sphere-valued maps on the unit ball, with semiflow selection.

Numerical companion to the non-uniqueness phenomenon of harmonic map heat
flow from B^3 to S^2: generate several admissible weak-solution trajectories
from one initial datum, verify the weak-solution conditions, and select one
trajectory per datum by iterative refinement with discounted functionals.
Different functional enumerations select different trajectories.
"""

from .errors import (
    ArchiveError,
    ConcatenationError,
    ConfigError,
    ConstraintViolationError,
    EmptySolutionSetError,
    HfssError,
    InstabilityError,
    InvalidResolutionError,
    InvalidTestFieldError,
    MeshConsistencyError,
    MeshMismatchError,
    NotWeaklyHarmonicError,
    NumericalError,
    StepSizeError,
    StorageError,
    ValidationError,
)
from .mesh import (
    BallMesh,
    build_ball_mesh,
    gradient,
    integrate,
    l2_inner,
    l2_norm,
    laplacian,
    trace_nodes,
)
from .fields import (
    DirectorField,
    default_test_fields,
    energy,
    energy_density,
    h1_norm,
    normalize_field,
    shell_test_fields,
    stationarity_identity_defect,
    stationarity_residual,
    tangent_project,
    tension,
    weak_harmonic_residual,
    weak_harmonicity_score,
)
from .probes import (
    ProbeFamily,
    ProbeFunctional,
    default_probe_family,
    evaluate_probe,
    make_aligned_probe,
    monomial_probes,
)
from .flows import (
    SchemeConfig,
    Trajectory,
    constant_trajectory,
    default_gate_tol,
    energy_inequality_check,
    energy_inequality_sweep,
    explicit_dt_bound,
    run_flow,
    step_landau_lifshitz,
    step_penalized,
    step_projection,
)
from .selection import (
    AdmissibilityReport,
    AdmissibilityTolerances,
    DiscountedValue,
    SelectionConfig,
    SelectionFunctional,
    SolutionSet,
    admissible,
    apply_enumeration,
    build_solution_set,
    concatenate,
    default_selection_config,
    discount_quadrature,
    discounted_functional,
    enumeration_distinctness,
    refine,
    select,
    select_with_transcript,
    semigroup_check,
    shift,
    trajectory_distance,
)
from .initial_data import (
    bump_map,
    constant_map,
    equator_map,
    great_circle_map,
    make_datum,
    random_smooth_map,
)

__version__ = "0.1.0"
