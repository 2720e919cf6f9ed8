"""Minimal and maximal graphs over conformal surfaces in M x R and M x R_1."""

from .catalog import CatalogEntry, elliptic_f, get_example
from .completeness import Curve, curve_length, metric_ratio_scan, ray_probe
from .duality import dual_gradient, norm_identity_check, reconstruct_dual, roundtrip_check
from .errors import (
    ExprDomainError,
    MaxgraphError,
    NonSpacelikeError,
    NotPositiveDefiniteError,
    OutOfDomainError,
    ParseError,
    SceneError,
    SolverError,
    UnknownIdentifierError,
)
from .expr import differentiate, evaluate, parse, simplify, to_string
from .fields import ExprField, FunctionField, ScalarField, fd_field, to_field
from .graph import (
    GraphSurface,
    PointReport,
    Signature,
    causal_report,
    gauss_map,
    induced_metric,
    invariant_report,
    mean_curvature,
    residual_maximal,
    residual_minimal,
    residual_minimal_halfplane,
    shape_operator,
)
from .grids import Grid
from .metrics import (
    ConformalMetric,
    MetricField2x2,
    divergence,
    euclidean,
    gauss_curvature,
    gradient,
    hyperbolic_half_plane,
    laplace_beltrami,
    rotate_j,
    sphere_model,
)
from .solver import DirichletProblem, SolveReport, refinement_study, solve_dirichlet

__all__ = [name for name in dir() if not name.startswith("_")]
