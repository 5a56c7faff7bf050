"""Differentiable eigenvalue branch tracking for Hermitian operator families."""

from .config import (
    DEFAULT_TOL,
    ContourSpec,
    FamilySpec,
    HolderSpec,
    ResolventSpec,
    RunConfig,
    Tolerances,
    parse_config,
    serialize_config,
)
from .contour import (
    Contour,
    SpectralCluster,
    cluster_eigenvalues,
    lowrank_trace,
    newton_sums,
    newton_to_sigma,
    riesz_projector,
    spectral_cluster,
)
from .errors import (
    ConfigError,
    CountingError,
    EigenConvergenceError,
    ExpressionError,
    GapCollapseError,
    NotHermitianError,
    NUMERICAL_FAILURES,
    QuadratureError,
    RankDriftError,
    RootRealityError,
    SeparationError,
    SpectralBranchError,
    SpectrumTouchError,
    UnderflowGuardError,
)
from .expressions import Expression, parse_expression
from .families import (
    ExprMatrixSpec,
    GraphNorm,
    HermitianFamily,
    derivative_family,
    graph_norm,
    graph_norm_equivalence_ratio,
)
from .gallery import (
    CurveLemmaFamily,
    HolderQuotient,
    ResolventExampleFamily,
    SchrodingerFamily,
    bump,
    eigenvector_jump,
    holder_quotient,
    make_family,
    resolvent_weak_vs_norm,
    schrodinger_track,
    smooth_step,
)
from .linalg import (
    EigenDecomposition,
    ensure_hermitian,
    hermitian_defect,
    hermitian_eig,
    hermitian_with_spectrum,
    numerical_rank,
    operator_norm,
    random_hermitian,
    solve_shifted,
)
from .runner import run
from .tracker import (
    BranchSet,
    CrossingEvent,
    GronwallReport,
    MatchReport,
    estimate_derivative_bound,
    extend_parameterization,
    gronwall_screen,
    match_crossing,
    one_sided_derivatives,
    one_sided_slot_derivatives,
    rayleigh_derivative,
    sorted_eigenvalues,
    track_branches,
)

__all__ = [
    "BranchSet",
    "ConfigError",
    "Contour",
    "ContourSpec",
    "CountingError",
    "CrossingEvent",
    "CurveLemmaFamily",
    "DEFAULT_TOL",
    "EigenConvergenceError",
    "EigenDecomposition",
    "ExprMatrixSpec",
    "Expression",
    "ExpressionError",
    "FamilySpec",
    "GapCollapseError",
    "GraphNorm",
    "GronwallReport",
    "HermitianFamily",
    "HolderQuotient",
    "HolderSpec",
    "MatchReport",
    "NUMERICAL_FAILURES",
    "NotHermitianError",
    "QuadratureError",
    "RankDriftError",
    "ResolventExampleFamily",
    "ResolventSpec",
    "RootRealityError",
    "RunConfig",
    "SchrodingerFamily",
    "SeparationError",
    "SpectralBranchError",
    "SpectralCluster",
    "SpectrumTouchError",
    "Tolerances",
    "UnderflowGuardError",
    "bump",
    "cluster_eigenvalues",
    "derivative_family",
    "eigenvector_jump",
    "ensure_hermitian",
    "estimate_derivative_bound",
    "extend_parameterization",
    "graph_norm",
    "graph_norm_equivalence_ratio",
    "gronwall_screen",
    "hermitian_defect",
    "hermitian_eig",
    "hermitian_with_spectrum",
    "holder_quotient",
    "lowrank_trace",
    "make_family",
    "match_crossing",
    "newton_sums",
    "newton_to_sigma",
    "numerical_rank",
    "one_sided_derivatives",
    "one_sided_slot_derivatives",
    "operator_norm",
    "parse_config",
    "parse_expression",
    "random_hermitian",
    "rayleigh_derivative",
    "resolvent_weak_vs_norm",
    "riesz_projector",
    "run",
    "schrodinger_track",
    "serialize_config",
    "solve_shifted",
    "sorted_eigenvalues",
    "spectral_cluster",
    "track_branches",
]
