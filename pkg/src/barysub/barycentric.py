"""Barycentric subspaces of k+1 reference points.

The exponential barycentric subspace (EBS) of ``x_0 .. x_k`` is the set of
points ``x`` where ``sum_i lam_i log_x(x_i) = 0`` for some weights with
``sum(lam) != 0``. Writing ``Z(x) = [log_x(x_0), ..., log_x(x_k)]``, ``x`` is in
the EBS iff ``Z(x)`` loses rank, and the admissible weights span its right
kernel. On the sphere and the hyperboloid the closure of the EBS (the affine
span) is ``Span(X)`` intersected with the manifold, which gives closed-form
projections.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CutLocusError,
    DegenerateHessianError,
    DependentPointsError,
    DomainViolationError,
    NonConvergenceError,
    NotOnEBSError,
    ReferenceCoincidenceError,
    ZeroMassError,
)
from .manifold import Euclidean, Manifold

#: Relative threshold on ``s_min / s_max`` for a vanishing singular value.
SV_RTOL = 1e-8
#: Absolute floor for the same decision.
SV_ATOL = 1e-9
#: Hessian eigenvalues with ``|mu| <= HESS_RTOL * |H|`` count as zero.
HESS_RTOL = 1e-7

LOCAL_MIN = "LocalMin"
SADDLE = "Saddle"
DEGENERATE = "Degenerate"


@dataclass(frozen=True, eq=False)
class ReferenceConfiguration:
    """Ordered reference points ``x_0 .. x_k`` (rows of ``points``) on ``manifold``.

    Affine dependence is allowed at construction so that degenerate
    configurations can be studied; operations that need independence call
    :meth:`require_independent`.
    """

    manifold: Manifold
    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.array(self.points, dtype=float))
        if pts.shape[1] != self.manifold.ambient_dim:
            raise ValueError(
                f"points have {pts.shape[1]} coordinates, {self.manifold!r} needs {self.manifold.ambient_dim}"
            )
        self.manifold.check_point(pts, tol=1e-9)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def k(self) -> int:
        return self.points.shape[0] - 1

    @property
    def X(self) -> np.ndarray:
        """Reference matrix with the points as columns."""
        return self.points.T

    def prefix(self, m: int) -> "ReferenceConfiguration":
        """Configuration of the first ``m`` points."""
        return ReferenceConfiguration(self.manifold, self.points[:m])

    def subset(self, idx) -> "ReferenceConfiguration":
        return ReferenceConfiguration(self.manifold, self.points[list(idx)])

    @property
    def rank(self) -> int:
        return self.manifold.rank(self.points)

    @property
    def min_cut_clearance(self) -> float:
        M = self.manifold
        if self.k == 0:
            return np.inf
        return min(
            float(M.cut_locus_clearance(self.points[i], self.points[j]))
            for i, j in itertools.combinations(range(self.k + 1), 2)
        )

    @property
    def is_affinely_independent(self) -> bool:
        return self.min_cut_clearance > 1e-8 and self.rank == self.k + 1

    def require_independent(self):
        if not self.is_affinely_independent:
            raise DependentPointsError("reference points are affinely dependent or mutually cut")
        return self


def _as_config(ref, manifold=None):
    if isinstance(ref, ReferenceConfiguration):
        return ref
    if manifold is None:
        raise TypeError("pass a ReferenceConfiguration or a manifold")
    return ReferenceConfiguration(manifold, ref)


# -- weights -----------------------------------------------------------------


def normalize_weights(lam):
    """``lam / sum(lam)``; raises :class:`ZeroMassError` when the mass vanishes."""
    lam = np.asarray(lam, dtype=float)
    mass = lam.sum()
    if abs(mass) <= 1e-12 * np.linalg.norm(lam) or not np.isfinite(mass):
        raise ZeroMassError("barycentric weights sum to zero")
    return lam / mass


def barycentric_to_renormalized(ref, x, lam):
    """Renormalized weights ``F(X, x) lam`` linearizing the EBS equation."""
    ref = _as_config(ref)
    _check_cut(ref, x)
    return ref.manifold.scale_factors(x, ref.points) * np.asarray(lam, dtype=float)


def renormalized_to_barycentric(ref, x, lam_tilde):
    """Inverse of :func:`barycentric_to_renormalized`."""
    ref = _as_config(ref)
    _check_cut(ref, x)
    return np.asarray(lam_tilde, dtype=float) / ref.manifold.scale_factors(x, ref.points)


def _check_cut(ref, x):
    clearance = ref.manifold.cut_locus_clearance(x, ref.points)
    if np.any(clearance < 1e-8):
        raise CutLocusError("point lies on the cut locus of a reference point")


# -- Z, Omega, membership ----------------------------------------------------


def z_matrix(ref, x):
    """``n x (k+1)`` matrix of the logs to the reference points, in an orthonormal tangent basis."""
    ref = _as_config(ref)
    M = ref.manifold
    logs = M.log(x, ref.points)
    return M.to_tangent_coords(x, logs).T


def omega_matrix(ref, x):
    """Gram matrix ``Omega_ij = <log_x x_i, log_x x_j>`` and its determinant."""
    Z = z_matrix(ref, x)
    Om = Z.T @ Z
    return Om, float(np.linalg.det(Om))


def covariance_matrix(ref, x):
    """Unweighted covariance ``Z Z^T`` of the reference points seen from ``x``."""
    Z = z_matrix(ref, x)
    return Z @ Z.T


@dataclass
class EBSMembership:
    point: np.ndarray
    singular_values: np.ndarray
    threshold: float
    dual_basis: np.ndarray  # (k+1, l): orthonormal basis of the admissible weights
    is_member: bool

    @property
    def smallest_singular_value(self) -> float:
        return float(self.singular_values[-1])

    @property
    def n_vanishing(self) -> int:
        return self.dual_basis.shape[1]


def ebs_membership(ref, x, rtol=SV_RTOL, atol=SV_ATOL) -> EBSMembership:
    """Test whether ``x`` is an exponential barycenter of the reference points.

    The ``k+1`` singular values of ``Z(x)`` are padded with zeros when the
    manifold dimension is smaller than ``k+1``. Singular values below
    ``max(atol, rtol * s_max)`` count as vanishing.
    """
    ref = _as_config(ref)
    Z = z_matrix(ref, x)
    kp1 = Z.shape[1]
    _, s, Vt = np.linalg.svd(Z, full_matrices=True)
    s_full = np.zeros(kp1)
    s_full[: s.size] = s
    threshold = max(atol, rtol * (s_full[0] if kp1 else 0.0))
    vanishing = s_full < threshold
    basis = Vt[vanishing].T
    return EBSMembership(
        point=np.asarray(x, dtype=float),
        singular_values=s_full,
        threshold=threshold,
        dual_basis=basis,
        is_member=bool(vanishing.any()),
    )


def refined_span_membership(ref, x, tol=1e-9) -> bool:
    """Membership with the abnormal weights of ``Ker(X)`` excluded.

    For independent points this is plain EBS membership. For affinely
    dependent points on the sphere or hyperboloid every point is a formal
    barycenter; the refined subspace keeps only the points of ``Span(X)``,
    i.e. the subsphere of dimension ``rank(X) - 1``.
    """
    ref = _as_config(ref)
    if ref.is_affinely_independent:
        return ebs_membership(ref, x).is_member
    if isinstance(ref.manifold, Euclidean):
        raise NotImplementedError("refinement is defined for the sphere and hyperboloid")
    U, s, _ = np.linalg.svd(ref.X, full_matrices=False)
    U = U[:, s > 1e-10 * s[0]]
    x = np.asarray(x, dtype=float)
    return bool(np.linalg.norm(x - U @ (U.T @ x)) < tol * max(1.0, np.linalg.norm(x)))


# -- weighted variance and its Hessian --------------------------------------


def weighted_variance(ref, x, lam):
    """``1/2 sum_i lam_i dist^2(x, x_i) / sum(lam)``."""
    ref = _as_config(ref)
    w = normalize_weights(lam)
    d = ref.manifold.dist(x, ref.points)
    return 0.5 * float(np.dot(w, d * d))


def weighted_variance_hessian(ref, x, lam):
    """Riemannian Hessian of the normalized weighted variance, in tangent coordinates.

    On the sphere this is ``(sum w_i t_i cot t_i) P + sum w_i (1 - t_i cot t_i) u_i u_i^T``
    and on the hyperboloid the same with ``coth``; both are sums of the
    per-point Hessians of half the squared distance.
    """
    ref = _as_config(ref)
    _check_cut(ref, x)
    w = normalize_weights(lam)
    M = ref.manifold
    H = np.zeros((M.dim, M.dim))
    for wi, xi in zip(w, ref.points):
        H += wi * M.hessian_dist_sq_tangent(x, xi)
    return H


@dataclass
class CriticalPointRecord:
    """Classification of an EBS point by the signature of the weighted Hessian."""

    point: np.ndarray
    weights: np.ndarray  # normalized
    hessian: np.ndarray
    spectrum: np.ndarray  # ascending
    index: int  # number of positive eigenvalues
    classification: str
    smallest_singular_value: float = 0.0
    normal_eigenvalue: float | None = None
    span_spectrum: np.ndarray | None = None
    per_weight: list = field(default_factory=list)


def _classify_spectrum(mu, rtol=HESS_RTOL):
    scale = max(np.max(np.abs(mu)), np.finfo(float).tiny)
    tol = rtol * scale
    index = int(np.sum(mu > tol))
    if np.any(np.abs(mu) <= tol):
        cls = DEGENERATE
    elif index == mu.size:
        cls = LOCAL_MIN
    else:
        cls = SADDLE
    return index, cls


def _span_tangent_basis(ref, x):
    """Orthonormal tangent coordinates of the affine span's tangent space at ``x``."""
    M = ref.manifold
    if isinstance(M, Euclidean):
        D = (ref.points[1:] - ref.points[0]).T if ref.k else np.zeros((M.dim, 0))
        return np.linalg.qr(D)[0] if ref.k else D
    # Span(X) contains x; its tangent part is the projection of the reference vectors
    C = M.to_tangent_coords(x, M.proj_tangent(x, ref.points)).T
    U, s, _ = np.linalg.svd(C, full_matrices=False)
    return U[:, s > 1e-10 * max(s[0], 1e-300)]


def classify_ebs_point(ref, x, rtol=HESS_RTOL, membership=None) -> CriticalPointRecord:
    """Signature of ``H(x, lam)`` for the admissible weights at an EBS point.

    The index is counted on the full tangent spectrum. The record also gives
    the eigenvalue shared by all directions normal to the span (``None`` when
    the span fills the tangent space) and the spectrum restricted to the
    span's tangent space. When several weight directions are admissible each
    one is classified; the point is LocalMin (Degenerate) only if all of them
    are.
    """
    ref = _as_config(ref)
    mem = membership if membership is not None else ebs_membership(ref, x)
    if not mem.is_member:
        raise NotOnEBSError(f"smallest singular value {mem.smallest_singular_value:.3g} above threshold")
    M = ref.manifold
    records = []
    for lam in mem.dual_basis.T:
        w = normalize_weights(lam)
        H = weighted_variance_hessian(ref, x, w)
        mu = np.linalg.eigvalsh(H)
        index, cls = _classify_spectrum(mu, rtol)
        records.append((w, H, mu, index, cls))

    w, H, mu, index, cls = records[0]
    classes = {r[4] for r in records}
    if len(records) > 1:
        if classes == {LOCAL_MIN}:
            cls = LOCAL_MIN
        elif classes == {DEGENERATE}:
            cls = DEGENERATE
        else:
            cls = SADDLE

    S = _span_tangent_basis(ref, x)
    span_mu = np.linalg.eigvalsh(S.T @ H @ S) if S.shape[1] else np.zeros(0)
    normal = None
    if S.shape[1] < M.dim:
        d = M.dist(x, ref.points)
        if M.kind == "sphere":
            from .sphere import theta_cot as g
        elif M.kind == "hyperbolic":
            from .hyperbolic import theta_coth as g
        else:
            g = np.ones_like
        normal = float(np.dot(w, g(d)))

    return CriticalPointRecord(
        point=np.asarray(x, dtype=float),
        weights=w,
        hessian=H,
        spectrum=mu,
        index=index,
        classification=cls,
        smallest_singular_value=mem.smallest_singular_value,
        normal_eigenvalue=normal,
        span_spectrum=span_mu,
        per_weight=[{"weights": r[0], "spectrum": r[2], "index": r[3], "classification": r[4]} for r in records],
    )


# -- projection on the affine span -------------------------------------------


@dataclass
class SpanProjection:
    closest: np.ndarray
    residual: float
    weights: np.ndarray


def affine_span_project(ref, y) -> SpanProjection:
    """Closest point of the affine span to ``y``, its distance and barycentric weights.

    Weights are normalized to sum to one when their mass does not vanish
    (otherwise the point is reached by weights at infinity and the unit-norm
    vector is returned).
    """
    ref = _as_config(ref).require_independent()
    M = ref.manifold
    y = np.asarray(y, dtype=float)
    closest, residual = M.span_closest(ref.points, y[None, :])
    closest, residual = closest[0], float(residual[0])
    if ref.k == 0:
        lam = np.ones(1)
    elif isinstance(M, Euclidean):
        A = np.vstack([ref.X, np.ones(ref.k + 1)])
        lam = np.linalg.lstsq(A, np.append(closest, 1.0), rcond=None)[0]
    else:
        lam_t = np.linalg.lstsq(ref.X, closest, rcond=None)[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = lam_t / M.scale_factors(closest, ref.points)
        lam = np.nan_to_num(lam)
    try:
        lam = normalize_weights(lam)
    except ZeroMassError:
        lam = lam / np.linalg.norm(lam)
    return SpanProjection(closest, residual, lam)


# -- weighted Frechet means and the barycentric simplex ----------------------


def _first_moment(ref, x, w):
    return ref.manifold.first_moment(ref.points, x, w)


def check_regular_ball(ref):
    """Raise unless the reference points fit in a regular geodesic ball.

    With curvature bounded by 1 on the unit sphere the radius must stay below
    pi/4, which all pairwise distances below pi/2 guarantees in practice.
    """
    M = ref.manifold
    if M.curvature <= 0 or ref.k == 0:
        return
    D = np.array([[M.dist(a, b) for b in ref.points] for a in ref.points])
    if D.max() >= np.pi / 2:
        raise DomainViolationError(f"pairwise distance {D.max():.4f} >= pi/2: no regular geodesic ball")


def weighted_frechet_mean(ref, lam, x_init=None, tol=1e-10, max_iter=1000):
    """Weighted Frechet mean for strictly positive weights.

    Riemannian gradient descent ``x <- exp_x(tau * M1(x, lam_normalized))``
    with ``tau = 1`` halved while neither the variance nor the gradient
    decreases.
    """
    ref = _as_config(ref)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("weights must be strictly positive")
    check_regular_ball(ref)
    M = ref.manifold
    w = normalize_weights(lam)
    x = np.array(ref.points[int(np.argmax(w))] if x_init is None else x_init, dtype=float)

    def var(z):
        d = M.dist(z, ref.points)
        return 0.5 * float(np.dot(w, d * d))

    g = _first_moment(ref, x, w)
    gn = float(M.norm(x, g))
    f = var(x)
    for _ in range(max_iter):
        if gn < tol:
            return x
        tau = 1.0
        while True:
            cand = M.exp(x, tau * g)
            g_c = _first_moment(ref, cand, w)
            gn_c = float(M.norm(cand, g_c))
            f_c = var(cand)
            if f_c < f or gn_c < gn or tau <= 1e-6:
                break
            tau *= 0.5
        x, g, gn, f = cand, g_c, gn_c, f_c
    if gn < tol:
        return x
    raise NonConvergenceError(f"weighted Frechet mean: |M1| = {gn:.3g} after {max_iter} iterations")


def simplex_derivative(ref, lam, x_lam=None):
    """Differential of ``lam -> x_lam`` (tangent coordinates, ``n x (k+1)``).

    Differentiating ``Z(x) lam / sum(lam) = 0`` gives
    ``D x_lam = H(x_lam, lam)^-1 Z(x_lam) / sum(lam)``.
    """
    ref = _as_config(ref)
    lam = np.asarray(lam, dtype=float)
    if x_lam is None:
        x_lam = weighted_frechet_mean(ref, lam)
    H = weighted_variance_hessian(ref, x_lam, lam)
    mu = np.linalg.eigvalsh(H)
    if np.min(np.abs(mu)) <= HESS_RTOL * np.max(np.abs(mu)):
        raise DegenerateHessianError("weighted Hessian is singular at x_lam")
    Z = z_matrix(ref, x_lam)
    return np.linalg.solve(H, Z) / lam.sum()


def local_dimension(ref, x, rtol=1e-8):
    """Numerical rank of ``H^-1 Z`` at an EBS point: the local dimension of the EBS."""
    ref = _as_config(ref)
    mem = ebs_membership(ref, x)
    if not mem.is_member:
        raise NotOnEBSError("point is not on the EBS")
    lam = mem.dual_basis[:, 0]
    H = weighted_variance_hessian(ref, x, lam)
    D = np.linalg.solve(H, z_matrix(ref, x))
    s = np.linalg.svd(D, compute_uv=False)
    return int(np.sum(s > rtol * s[0]))


# -- p-variance ---------------------------------------------------------------


def p_variance(ref, x, lam, p):
    """``1/p sum_i lam_i dist^p(x, x_i) / sum(lam)``."""
    ref = _as_config(ref)
    w = normalize_weights(lam)
    d = ref.manifold.dist(x, ref.points)
    return float(np.dot(w, d**p)) / p


def p_variance_gradient(ref, x, lam, p):
    """Gradient of the weighted p-variance and the equivalent barycentric weights.

    Returns ``(grad, lam_prime)`` with ``grad = -sum_i w_i d_i^(p-2) log_x(x_i)``
    (``w`` normalized) and ``lam_prime_i = lam_i d_i^(p-2)``, so critical points
    of the p-variance are exponential barycenters with weights ``lam_prime``.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    ref = _as_config(ref)
    M = ref.manifold
    lam = np.asarray(lam, dtype=float)
    w = normalize_weights(lam)
    d = M.dist(x, ref.points)
    if p < 2 and np.any(d < 1e-14):
        raise ReferenceCoincidenceError("p-variance gradient undefined at a reference point for p < 2")
    with np.errstate(divide="ignore"):
        scale = np.where(d > 0, d ** (p - 2.0), 0.0) if p < 2 else d ** (p - 2.0)
    grad = -((w * scale) @ M.log(x, ref.points))
    return grad, lam * scale


# -- restricted geodesic limit -------------------------------------------------


@dataclass
class RGSLimitReport:
    eps: list
    max_residual: list
    ratios: list
    decreasing: bool
    n_samples: int


def rgs_limit_check(manifold, x0, W, eps_list=(0.2, 0.1, 0.05), n_grid=21, radius=None):
    """Distance from the restricted geodesic subspace to affine spans of coalescing points.

    For each ``eps`` the reference points are ``x0`` and ``exp(x0, eps w_i)``;
    points ``exp(x0, w)`` with ``w`` on a grid of ``Span(W)`` inside the
    injectivity domain are projected on the affine span and the largest
    residual is reported.
    """
    M = manifold
    x0 = np.asarray(x0, dtype=float)
    W = np.atleast_2d(np.asarray(W, dtype=float))
    k = W.shape[0]
    C = M.to_tangent_coords(x0, W).T  # (n, k)
    Q, R = np.linalg.qr(C)
    if np.min(np.abs(np.diag(R))) < 1e-12:
        raise DependentPointsError("tangent vectors are linearly dependent")
    if radius is None:
        radius = np.pi - 0.05 if M.kind == "sphere" else 3.0
    axis = np.linspace(-radius, radius, n_grid)
    samples = []
    for a in itertools.product(axis, repeat=k):
        a = np.asarray(a)
        if np.linalg.norm(a) < radius:
            samples.append(M.exp(x0, M.from_tangent_coords(x0, Q @ a)))
    samples = np.array(samples)

    res = []
    for eps in eps_list:
        pts = np.vstack([x0[None, :], M.exp(x0, eps * W)])
        _, r = M.span_closest(pts, samples)
        res.append(float(np.max(r)))
    ratios = [res[i + 1] / res[i] if res[i] > 0 else float("nan") for i in range(len(res) - 1)]
    decreasing = all(res[i + 1] <= res[i] for i in range(len(res) - 1))
    return RGSLimitReport(list(eps_list), res, ratios, decreasing, len(samples))
