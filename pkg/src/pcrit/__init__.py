"""Criticality analysis for the radial p-Laplacian with a potential term.

Desk-scale numerics for the energy functional
Q(u) = (1/p) * integral of (|u'|^p + V |u|^p) |r|^(d-1) dr:
energy forms and Picone densities, Dirichlet solves and principal
eigenpairs, exhaustion-based criticality verdicts with ground states,
capacities, and positive solutions of minimal growth with variational
certificates.
"""

from .criticality import (
    CapacityReport,
    CriticalityReport,
    LevelThreshold,
    NullSequenceRun,
    PositivityCertificate,
    criticality_verdict,
    ground_state,
    null_sequence,
    positivity_weight,
    q_capacity,
    threshold_tN,
)
from .energy import (
    LagrangianField,
    energy_Q,
    phi_p,
    picone_density,
    picone_gap,
    poincare_residual,
    simplified_energy,
    vector_inequality_envelope,
    vector_inequality_ratio,
)
from .errors import (
    DomainError,
    EvaluationError,
    PcritError,
    PreconditionError,
    StateError,
)
from .mingrowth import (
    CertificateRun,
    ComparisonResult,
    MinimalGrowthRun,
    PointSingularityRun,
    RemovabilityReport,
    comparison_check,
    minimal_growth_certificate,
    point_singularity_solution,
    removability_test,
    singularity_exponent,
    uK_limit,
)
from .model import (
    CompactSetSpec,
    ExhaustionSchedule,
    Field,
    Grid,
    PotentialSpec,
    RadialProblem,
    build_graded_grid,
    build_grid,
    embed,
    log_reduced_level,
    log_reduced_problem,
    make_exhaustion,
    make_field,
)
from .solver import (
    DEFAULT_CONFIG,
    EigenResult,
    SignClassification,
    SolveReport,
    SolverConfig,
    WcpResult,
    classify_sign,
    principal_eigenpair,
    residual_scale,
    solve_dirichlet,
    wcp_check,
    weak_residual,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "PcritError",
    "DomainError",
    "PreconditionError",
    "StateError",
    "EvaluationError",
    "PotentialSpec",
    "RadialProblem",
    "Grid",
    "Field",
    "ExhaustionSchedule",
    "CompactSetSpec",
    "build_grid",
    "build_graded_grid",
    "embed",
    "make_field",
    "make_exhaustion",
    "log_reduced_problem",
    "log_reduced_level",
    "phi_p",
    "energy_Q",
    "LagrangianField",
    "picone_density",
    "picone_gap",
    "simplified_energy",
    "vector_inequality_ratio",
    "vector_inequality_envelope",
    "poincare_residual",
    "SolverConfig",
    "DEFAULT_CONFIG",
    "SolveReport",
    "EigenResult",
    "SignClassification",
    "WcpResult",
    "weak_residual",
    "residual_scale",
    "solve_dirichlet",
    "principal_eigenpair",
    "classify_sign",
    "wcp_check",
    "LevelThreshold",
    "NullSequenceRun",
    "CriticalityReport",
    "PositivityCertificate",
    "CapacityReport",
    "threshold_tN",
    "null_sequence",
    "criticality_verdict",
    "ground_state",
    "positivity_weight",
    "q_capacity",
    "MinimalGrowthRun",
    "PointSingularityRun",
    "CertificateRun",
    "RemovabilityReport",
    "ComparisonResult",
    "uK_limit",
    "point_singularity_solution",
    "singularity_exponent",
    "removability_test",
    "minimal_growth_certificate",
    "comparison_check",
]
