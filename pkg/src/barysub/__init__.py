"""Barycentric subspaces and flag analyses on spheres, hyperbolic spaces and R^n."""

__version__ = "0.1.0"

from .barycentric import (  # noqa: E402
    CriticalPointRecord,
    EBSMembership,
    ReferenceConfiguration,
    affine_span_project,
    classify_ebs_point,
    ebs_membership,
    omega_matrix,
    weighted_frechet_mean,
    weighted_variance,
    weighted_variance_hessian,
    z_matrix,
)
from .flags import (  # noqa: E402
    AnalysisResult,
    Flag,
    auv,
    bsa_flag_search,
    euclidean_pca_flag,
    forward_bsa,
    optimal_pure_subspace,
    unexplained_variance,
)
from .hyperbolic import Hyperbolic  # noqa: E402
from .manifold import Euclidean, Manifold  # noqa: E402
from .sphere import Sphere  # noqa: E402

__all__ = [
    "AnalysisResult",
    "CriticalPointRecord",
    "EBSMembership",
    "Euclidean",
    "Flag",
    "Hyperbolic",
    "Manifold",
    "ReferenceConfiguration",
    "Sphere",
    "affine_span_project",
    "auv",
    "bsa_flag_search",
    "classify_ebs_point",
    "ebs_membership",
    "euclidean_pca_flag",
    "forward_bsa",
    "omega_matrix",
    "optimal_pure_subspace",
    "unexplained_variance",
    "weighted_frechet_mean",
    "weighted_variance",
    "weighted_variance_hessian",
    "z_matrix",
]
