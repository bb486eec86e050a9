"""Simulator and verification harness for boundary-coupled Hindmarsh-Rose networks."""

from .config import MetricsOptions, RunConfig, load_config
from .core import (
    DEFAULT_PROFILE,
    AbsorbingConstants,
    DerivedConstants,
    HRParameters,
    ThresholdConstants,
    compute_absorbing,
    compute_c1,
    compute_c2,
    compute_mu,
    compute_threshold,
    derive_constants,
    entry_time,
)
from .domain import (
    BoundaryMatching,
    Domain,
    PoincareConstants,
    apply_diffusion,
    build_domain,
    face_values,
    full_boundary_matching,
    integrate_boundary_pair,
    integrate_domain,
    network_diffusion_matrix,
    neumann_laplacian,
    parse_matching,
    parse_pairs,
    poincare_constants,
    trivial_matching,
)
from .dynamics import (
    IC_KINDS,
    SCHEMES,
    InitialCondition,
    IntegratorConfig,
    NetworkState,
    SimulationResult,
    cfl_bound,
    full_rhs,
    initial_state,
    reaction_rhs,
    resolve_dt,
    simulate,
    step,
)
from .errors import (
    ConfigError,
    EigenSolveError,
    IntegrationError,
    LinearSolveError,
    MatchingError,
    SingularParameterError,
)
from .metrics import (
    KResult,
    PairDifferences,
    RateFit,
    TrajectoryObserver,
    TrajectoryRecord,
    asynchronous_degree,
    compute_K,
    energy_monitor,
    envelope_check,
    fit_sync_rate,
    pair_differences,
    record_trajectory,
    stimulation_signal,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_PROFILE",
    "IC_KINDS",
    "SCHEMES",
    "AbsorbingConstants",
    "BoundaryMatching",
    "ConfigError",
    "DerivedConstants",
    "Domain",
    "EigenSolveError",
    "HRParameters",
    "InitialCondition",
    "IntegrationError",
    "IntegratorConfig",
    "KResult",
    "LinearSolveError",
    "MatchingError",
    "MetricsOptions",
    "NetworkState",
    "PairDifferences",
    "PoincareConstants",
    "RateFit",
    "RunConfig",
    "SimulationResult",
    "SingularParameterError",
    "ThresholdConstants",
    "TrajectoryObserver",
    "TrajectoryRecord",
    "apply_diffusion",
    "asynchronous_degree",
    "build_domain",
    "cfl_bound",
    "compute_K",
    "compute_absorbing",
    "compute_c1",
    "compute_c2",
    "compute_mu",
    "compute_threshold",
    "derive_constants",
    "energy_monitor",
    "entry_time",
    "envelope_check",
    "face_values",
    "fit_sync_rate",
    "full_boundary_matching",
    "full_rhs",
    "initial_state",
    "integrate_boundary_pair",
    "integrate_domain",
    "load_config",
    "network_diffusion_matrix",
    "neumann_laplacian",
    "pair_differences",
    "parse_matching",
    "parse_pairs",
    "poincare_constants",
    "record_trajectory",
    "resolve_dt",
    "simulate",
    "step",
    "stimulation_signal",
    "trivial_matching",
    "__version__",
]
