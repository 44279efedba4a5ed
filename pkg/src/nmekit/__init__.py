"""Tame continuation solving in a graded sequence space.

The package models a Frechet space by finitely many weighted sup-seminorms,
solves ``f(x) = y`` under tame right-inverse estimates, and ships the supporting
tools: Ekeland points on finite metric spaces, half-sup step-map orbits,
epsilon-nets of seminorm boxes and sampled surjectivity / openness checks.
"""

from .errors import (
    BudgetExceeded,
    ContractViolation,
    DegenerateProfile,
    DomainError,
    InvalidDirection,
    LevelOutOfRange,
    NetTooLarge,
    NmeError,
    NoProgress,
    OrbitIndeterminate,
    PremiseViolation,
    SpaceMismatch,
    TameBoundViolation,
)
from .graded import (
    CanonicalMetric,
    EpsilonNet,
    GradedVector,
    RemetrizedMetric,
    SeminormProfile,
    SpaceConfig,
    diam_upper_bound,
    epsilon_net,
    key_inclusion_check,
    pi_membership,
    remetrize,
    rho_metric,
    s_magnitude,
    s_norm,
    seminorm,
    seminorms,
)
from .variational import (
    EkelandResult,
    FiniteMetricSpace,
    OrbitOutcome,
    StepMap,
    ekeland_point,
    run_orbit,
    verify_orbit,
)
from .solver import SolveCertificate, SolverParams, TameProblem, solve_continuation, tame_certificate
from .checkers import Box, CheckReport, MultimapSample, check_openness, check_weak_pi_surjectivity
from .problems import (
    SmoothingQuadratic,
    fixed_point_solve,
    identity_problem,
    make_diagonal,
    make_smoothing_quadratic,
    problem_from_descriptor,
    sample_graph,
)

__version__ = "0.1.0"
