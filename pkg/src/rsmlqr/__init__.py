"""Resource-sharing composition of LTI systems with LQR compositionality checks.

Compose two linear subsystems along shared state variables, synthesize LQR
controllers for the parts and for the whole, and decide whether the block
design and the direct design coincide, quantifying the cost of composing
when they do not.
"""

from .errors import (
    DetectabilityWarning,
    InconsistencyError,
    InvalidMatrixError,
    NotHurwitzError,
    NotPDError,
    NotPSDError,
    NotStabilizableError,
    NotSymmetricError,
    NumericalFailureError,
    PatternError,
    RsmLqrError,
    SchemaError,
    ShapeError,
    SingularMatrixError,
)
from .lqr import (
    CompositionAnalysis,
    CompositionalityReport,
    LQRDesign,
    SearchConfig,
    SearchResult,
    check_exact_condition,
    check_necessary_condition,
    check_sufficient_condition,
    compare_gains,
    counterexample_search,
    evaluate_composition,
    lqr_composite,
    lqr_subsystem,
    sample_instance,
)
from .riccati import (
    RiccatiSolution,
    care_residual,
    embedded_riccati_residual,
    rectangular_riccati_residual,
    solve_care,
    solve_lyapunov,
)
from .rsm import (
    CompositeSystem,
    CompositionMatrix,
    CompositionPattern,
    CostWeights,
    LinearSystem,
    build_composition_matrix,
    closed_loop_matrix,
    compose_cost,
    compose_gains,
    compose_open_loop,
)
from .sim import (
    CostResult,
    GapResult,
    Trajectory,
    closed_loop_cost,
    optimality_gap,
    quadrature_cost,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "CompositeSystem",
    "CompositionAnalysis",
    "CompositionMatrix",
    "CompositionPattern",
    "CompositionalityReport",
    "CostResult",
    "CostWeights",
    "DetectabilityWarning",
    "GapResult",
    "InconsistencyError",
    "InvalidMatrixError",
    "LQRDesign",
    "LinearSystem",
    "NotHurwitzError",
    "NotPDError",
    "NotPSDError",
    "NotStabilizableError",
    "NotSymmetricError",
    "NumericalFailureError",
    "PatternError",
    "RiccatiSolution",
    "RsmLqrError",
    "SchemaError",
    "SearchConfig",
    "SearchResult",
    "ShapeError",
    "SingularMatrixError",
    "Trajectory",
    "build_composition_matrix",
    "care_residual",
    "check_exact_condition",
    "check_necessary_condition",
    "check_sufficient_condition",
    "closed_loop_cost",
    "closed_loop_matrix",
    "compare_gains",
    "compose_cost",
    "compose_gains",
    "compose_open_loop",
    "counterexample_search",
    "embedded_riccati_residual",
    "evaluate_composition",
    "lqr_composite",
    "lqr_subsystem",
    "optimality_gap",
    "quadrature_cost",
    "rectangular_riccati_residual",
    "sample_instance",
    "simulate",
    "solve_care",
    "solve_lyapunov",
    "__version__",
]
