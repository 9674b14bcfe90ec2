"""Geodesically convex minimisation and min-max solvers on Hadamard manifolds."""
from ._accel import USE_NUMBA
from .errors import (
    ConfigError,
    ConstraintViolation,
    DomainError,
    PreconditionError,
    RiemmaxError,
    SubsolverError,
    UnsupportedStructureError,
)
from .geometry import GeodesicBall, cosine_law_sweep, delta, project_ball, zeta
from .manifolds import Euclidean, Hyperboloid, Product
from .problem import GConvexProblem, MinMaxProblem, rescale_metric
from .trace import OracleCounter, RunTrace
from .gconvex import (
    composite_rgd,
    gap_certificate,
    prgd,
    regularize_gconvex,
    relative_contraction_solve,
    riemacon_abs,
)
from .minmax import (
    RammaSchedule,
    SaddleCertificate,
    certified_gap,
    pair_gap_certificate,
    rabr,
    ramma,
    rceg,
    reduce_to_scsc,
    solve_regularized,
)

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA",
    "ConfigError",
    "ConstraintViolation",
    "DomainError",
    "PreconditionError",
    "RiemmaxError",
    "SubsolverError",
    "UnsupportedStructureError",
    "GeodesicBall",
    "cosine_law_sweep",
    "delta",
    "project_ball",
    "zeta",
    "Euclidean",
    "Hyperboloid",
    "Product",
    "GConvexProblem",
    "MinMaxProblem",
    "rescale_metric",
    "OracleCounter",
    "RunTrace",
    "composite_rgd",
    "gap_certificate",
    "prgd",
    "regularize_gconvex",
    "relative_contraction_solve",
    "riemacon_abs",
    "RammaSchedule",
    "SaddleCertificate",
    "certified_gap",
    "pair_gap_certificate",
    "rabr",
    "ramma",
    "rceg",
    "reduce_to_scsc",
    "solve_regularized",
]
