"""Common manifold interface, the flat Euclidean space and finite-difference checks.

Points and tangent vectors are plain numpy arrays in embedding coordinates; the
manifold object that produced them carries the geometry. Most maps broadcast
over leading axes of their second argument, so ``M.log(x, Y)`` with ``Y`` of
shape ``(m, D)`` returns the ``m`` logs at ``x`` at once.
"""

from __future__ import annotations

import abc

import numpy as np

from .errors import CutLocusError, DependentPointsError, FocalPointError

#: Absolute slack used when checking manifold constraints of constructed points.
POINT_TOL = 1e-12


def _norm(v):
    return np.linalg.norm(v, axis=-1)


class Manifold(abc.ABC):
    """Constant-curvature Riemannian manifold embedded in R^D.

    Subclasses implement the closed-form exp/log maps, the Hessian of the
    squared distance and the projection onto the affine span of reference
    points. ``dim`` is the intrinsic dimension ``n``.
    """

    kind: str = ""
    curvature: float = 0.0

    def __init__(self, dim: int):
        self.dim = int(dim)

    def __repr__(self):
        return f"{type(self).__name__}({self.dim})"

    def __eq__(self, other):
        return type(self) is type(other) and self.dim == other.dim

    def __hash__(self):
        return hash((type(self).__name__, self.dim))

    @property
    @abc.abstractmethod
    def ambient_dim(self) -> int:
        """Number of embedding coordinates."""

    # -- metric ---------------------------------------------------------------

    @property
    def metric_matrix(self) -> np.ndarray:
        """Matrix ``G`` of the ambient bilinear form, ``<u, v> = u^T G v``."""
        return np.eye(self.ambient_dim)

    def inner(self, x, u, v):
        return np.sum(u * v, axis=-1)

    def norm(self, x, v):
        return np.sqrt(np.maximum(self.inner(x, v, v), 0.0))

    @abc.abstractmethod
    def proj_tangent(self, x, w):
        """Orthogonal projection of an ambient vector onto ``T_x M``."""

    @abc.abstractmethod
    def tangent_basis(self, x) -> np.ndarray:
        """Orthonormal basis of ``T_x M`` as the columns of a ``(D, n)`` array."""

    def to_tangent_coords(self, x, v):
        """Coordinates of tangent vector(s) ``v`` in :meth:`tangent_basis`."""
        B = self.tangent_basis(x)
        return v @ (self.metric_matrix @ B)

    def from_tangent_coords(self, x, c):
        return c @ self.tangent_basis(x).T

    # -- geodesic maps --------------------------------------------------------

    @abc.abstractmethod
    def exp(self, x, v):
        ...

    @abc.abstractmethod
    def log(self, x, y):
        ...

    @abc.abstractmethod
    def dist(self, x, y):
        ...

    def cut_locus_clearance(self, x, y):
        """Distance left between ``y`` and the cut locus of ``x``."""
        return np.full(np.shape(self.dist(x, y)), np.inf)

    def scale_factors(self, x, Y):
        """Diagonal of the renormalization matrix ``F`` (``log = F * tangential part``)."""
        return np.ones(np.shape(Y)[:-1])

    def grad_dist_sq(self, x, y):
        """Riemannian gradient of ``dist(., y)**2`` at ``x``, i.e. ``-2 log_x(y)``."""
        return -2.0 * self.log(x, y)

    @abc.abstractmethod
    def hessian_dist_sq(self, x, y) -> np.ndarray:
        """Hessian operator of ``dist(., y)**2 / 2`` at ``x`` on the embedding chart.

        The half-squared normalization makes the eigenvalue along the geodesic
        direction equal to 1 and the operator equal to the identity at ``x = y``.
        The returned ``(D, D)`` matrix maps tangent vectors to tangent vectors and
        has ``x`` in its kernel.
        """

    def hessian_dist_sq_tangent(self, x, y):
        """:meth:`hessian_dist_sq` in tangent coordinates (symmetric ``n x n``)."""
        B = self.tangent_basis(x)
        H = self.hessian_dist_sq(x, y)
        M = B.T @ self.metric_matrix @ H @ B
        return 0.5 * (M + M.T)

    def first_moment(self, X, x, lam):
        """Weighted first moment ``sum_i lam_i log_x(X_i)`` (ambient coordinates)."""
        return np.asarray(lam) @ self.log(x, X)

    def taylor_dlog(self, x, y):
        """Second-order Taylor approximation of ``D_x log_x(y)`` in tangent coordinates.

        For constant curvature ``k`` the curvature contraction reduces to
        ``k/3 (|v|^2 Id - v v^T)`` with ``v = log_x(y)``; the covariant
        derivative of the curvature vanishes.
        """
        v = self.to_tangent_coords(x, self.log(x, y))
        n = self.dim
        return -np.eye(n) + self.curvature / 3.0 * (np.dot(v, v) * np.eye(n) - np.outer(v, v))

    # -- affine spans ---------------------------------------------------------

    @abc.abstractmethod
    def span_closest(self, X, Y):
        """Closest points of ``Y`` (rows) on the affine span of the rows of ``X``.

        Returns ``(closest, residual)`` with the residual geodesic distances.
        """

    def rank(self, X, rtol=1e-10):
        """Numerical rank of the reference matrix ``X`` (rows are points)."""
        s = np.linalg.svd(np.atleast_2d(X), compute_uv=False)
        return int(np.sum(s > rtol * max(s[0], 1.0)))

    def affinely_independent(self, X, rtol=1e-10):
        X = np.atleast_2d(X)
        return self.rank(X, rtol) == X.shape[0]

    # -- sampling and validation ----------------------------------------------

    @abc.abstractmethod
    def random_point(self, rng, size=None, scale=1.0):
        ...

    def random_tangent(self, x, rng, scale=1.0):
        c = rng.normal(scale=scale, size=self.dim)
        return self.from_tangent_coords(x, c)

    @abc.abstractmethod
    def constraint_violation(self, Y):
        """Absolute violation of the manifold equation for each row of ``Y``."""

    def check_point(self, x, tol=POINT_TOL):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ambient_dim:
            raise ValueError(f"expected {self.ambient_dim} coordinates, got {x.shape[-1]}")
        bad = np.atleast_1d(self.constraint_violation(x)) > tol
        if np.any(bad):
            raise ValueError(f"point(s) off {self!r}: constraint violation above {tol:g}")
        return x


class Euclidean(Manifold):
    """Flat space R^n: ``log_x(y) = y - x``."""

    kind = "euclidean"
    curvature = 0.0

    @property
    def ambient_dim(self):
        return self.dim

    def proj_tangent(self, x, w):
        return np.asarray(w, dtype=float)

    def tangent_basis(self, x):
        return np.eye(self.dim)

    def exp(self, x, v):
        return np.asarray(x) + np.asarray(v)

    def log(self, x, y):
        return np.asarray(y, dtype=float) - np.asarray(x, dtype=float)

    def dist(self, x, y):
        return _norm(np.asarray(y, dtype=float) - np.asarray(x, dtype=float))

    def hessian_dist_sq(self, x, y):
        return np.eye(self.dim)

    def span_closest(self, X, Y):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.asarray(Y, dtype=float)
        x0 = X[0]
        Q = affine_basis(X)
        D = Y - x0
        closest = x0 + (D @ Q) @ Q.T
        return closest, _norm(Y - closest)

    def rank(self, X, rtol=1e-10):
        # affine rank: number of independent directions plus the base point
        X = np.atleast_2d(X)
        if X.shape[0] == 1:
            return 1
        D = X[1:] - X[0]
        s = np.linalg.svd(D, compute_uv=False)
        scale = max(s[0], np.max(np.abs(X)), 1.0)
        return 1 + int(np.sum(s > rtol * scale))

    def random_point(self, rng, size=None, scale=1.0):
        shape = (self.dim,) if size is None else (size, self.dim)
        return rng.normal(scale=scale, size=shape)

    def constraint_violation(self, Y):
        return np.zeros(np.shape(Y)[:-1])


def affine_basis(X):
    """Orthonormal basis (columns) of the directions ``X_i - X_0``."""
    X = np.atleast_2d(X)
    if X.shape[0] == 1:
        return np.zeros((X.shape[1], 0))
    D = (X[1:] - X[0]).T
    U, s, _ = np.linalg.svd(D, full_matrices=False)
    if s[-1] <= 1e-12 * max(s[0], 1.0):
        raise DependentPointsError("reference points are affinely dependent")
    return U


# -- finite-difference oracles -------------------------------------------------


def fd_gradient(f, M, x, h=1e-5):
    """Central-difference Riemannian gradient of ``f`` at ``x`` (tangent coords)."""
    B = M.tangent_basis(x)
    g = np.empty(M.dim)
    for j in range(M.dim):
        g[j] = (f(M.exp(x, h * B[:, j])) - f(M.exp(x, -h * B[:, j]))) / (2 * h)
    return g


def fd_hessian(f, M, x, h=1e-4, batched=False):
    """Central-difference Riemannian Hessian of ``f`` at ``x`` in tangent coordinates.

    Second derivatives are taken along geodesics ``t -> exp_x(t v)`` (a normal
    chart); off-diagonal entries use polarization. With ``batched=True``, ``f``
    maps a stack of points to a vector of values and is called once.
    """
    B = M.tangent_basis(x)
    n = M.dim
    if batched:
        iu = np.triu_indices(n, 1)
        V = np.vstack([B.T, (B[:, iu[0]] + B[:, iu[1]]).T, (B[:, iu[0]] - B[:, iu[1]]).T])
        vals = f(np.vstack([x[None, :], M.exp(x, h * V), M.exp(x, -h * V)]))
        m = V.shape[0]
        sec = (vals[1 : m + 1] - 2.0 * vals[0] + vals[m + 1 :]) / h**2
        H = np.diag(sec[:n])
        H[iu] = 0.25 * (sec[n : n + len(iu[0])] - sec[n + len(iu[0]) :])
        return H + np.triu(H, 1).T
    f0 = f(x)

    def second(v):
        return (f(M.exp(x, h * v)) - 2.0 * f0 + f(M.exp(x, -h * v))) / h**2

    H = np.empty((n, n))
    for i in range(n):
        H[i, i] = second(B[:, i])
    for i in range(n):
        for j in range(i + 1, n):
            H[i, j] = H[j, i] = 0.25 * (second(B[:, i] + B[:, j]) - second(B[:, i] - B[:, j]))
    return H


def fd_dlog(M, x, y, h=1e-4):
    """Central-difference ``D_x log_x(y)`` in tangent coordinates.

    The ambient derivative is projected back onto ``T_x M``, which yields the
    Levi-Civita derivative of the embedded manifold.
    """
    B = M.tangent_basis(x)
    G = M.metric_matrix
    out = np.empty((M.dim, M.dim))
    for j in range(M.dim):
        lp = M.log(M.exp(x, h * B[:, j]), y)
        lm = M.log(M.exp(x, -h * B[:, j]), y)
        d = M.proj_tangent(x, (lp - lm) / (2 * h))
        out[:, j] = B.T @ G @ d
    return out


__all__ = [
    "Manifold",
    "Euclidean",
    "affine_basis",
    "fd_gradient",
    "fd_hessian",
    "fd_dlog",
    "CutLocusError",
    "FocalPointError",
]
