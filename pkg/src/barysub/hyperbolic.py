"""Hyperbolic space H^n as the upper sheet of the hyperboloid in Minkowski space."""

from __future__ import annotations

import numpy as np

from .errors import DependentPointsError
from .manifold import Manifold
from .sphere import SERIES_THRESHOLD


def minkowski(u, v):
    """``<u, v>_* = -u_0 v_0 + sum_i u_i v_i`` over the last axis."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.sum(u[..., 1:] * v[..., 1:], axis=-1) - u[..., 0] * v[..., 0]


def minkowski_form(n):
    """``J = diag(-1, Id_n)``."""
    J = np.eye(n + 1)
    J[0, 0] = -1.0
    return J


def sinhc_scale(theta):
    """``f*(theta) = theta / sinh(theta)`` in (0, 1], series branch near zero."""
    theta = np.asarray(theta, dtype=float)
    t2 = theta * theta
    small = np.abs(theta) < SERIES_THRESHOLD
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        exact = theta / np.sinh(theta)
    return np.where(small, 1.0 - t2 / 6.0 + 7.0 * t2 * t2 / 360.0, exact)


def theta_coth(theta):
    """``theta * coth(theta)``, equal to 1 at zero."""
    theta = np.asarray(theta, dtype=float)
    return sinhc_scale(theta) * np.cosh(theta)


def from_weierstrass(xhat):
    """Parametrization ``xhat -> (sqrt(1 + |xhat|^2), xhat)``."""
    xhat = np.asarray(xhat, dtype=float)
    x0 = np.sqrt(1.0 + np.sum(xhat * xhat, axis=-1, keepdims=True))
    return np.concatenate([x0, xhat], axis=-1)


def to_weierstrass(x):
    return np.asarray(x, dtype=float)[..., 1:]


def _normalize(y):
    # back onto the upper sheet for vectors already close to it: keep the
    # spatial part and recompute y_0. Dividing by sqrt(-<y,y>_*) instead
    # cancels catastrophically far from the origin.
    return from_weierstrass(np.asarray(y)[..., 1:])


def _rescale(y):
    # timelike vector -> the point of the upper sheet on its ray
    y = y * np.sign(y[..., :1])
    q = -minkowski(y, y)
    return _normalize(y / np.sqrt(np.maximum(q, 1e-300))[..., None])


class Hyperbolic(Manifold):
    """Hyperbolic space ``H^n`` (n >= 2) in the Minkowski model."""

    kind = "hyperbolic"
    curvature = -1.0

    def __init__(self, dim: int):
        if dim < 2:
            raise ValueError("hyperbolic dimension must be >= 2")
        super().__init__(dim)

    @property
    def ambient_dim(self):
        return self.dim + 1

    @property
    def metric_matrix(self):
        return minkowski_form(self.dim)

    def inner(self, x, u, v):
        return minkowski(u, v)

    def proj_tangent(self, x, w):
        """``w + <w, x>_* x``."""
        w = np.asarray(w, dtype=float)
        return w + minkowski(w, x)[..., None] * x

    tangent_projection = proj_tangent

    def tangent_basis(self, x):
        # spatial columns of the Lorentz boost sending (1, 0, ..., 0) to x
        x = np.asarray(x, dtype=float)
        x0, xh = x[0], x[1:]
        B = np.empty((self.ambient_dim, self.dim))
        B[0] = xh
        B[1:] = np.eye(self.dim) + np.outer(xh, xh) / (1.0 + x0)
        return B

    def dist(self, x, y):
        # near points: <x-y, x-y>_* = 4 sinh^2(theta/2) avoids arccosh near 1;
        # far points: that form cancels badly, arccosh(-<x,y>_*) does not
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = x - y
        near = 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(minkowski(d, d), 0.0)))
        c = -minkowski(x, y)
        far = np.arccosh(np.maximum(c, 1.0))
        return np.where(c < 2.0, near, far)

    def scale_factors(self, x, Y):
        return sinhc_scale(self.dist(x, Y))

    def exp(self, x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        t = np.sqrt(np.maximum(minkowski(v, v), 0.0))[..., None]
        y = np.cosh(t) * x + v / sinhc_scale(t)
        return _normalize(y)

    def log(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        theta = self.dist(x, y)
        w = y + minkowski(x, y)[..., None] * x
        return sinhc_scale(theta)[..., None] * w

    def hessian_dist_sq(self, x, y):
        x = np.asarray(x, dtype=float)
        J = self.metric_matrix
        theta = float(self.dist(x, y))
        P = np.eye(self.ambient_dim) + np.outer(x, x) @ J
        if theta == 0.0:
            return P
        u = self.log(x, y) / theta
        uuJ = np.outer(u, u) @ J
        return uuJ + float(theta_coth(theta)) * (P - uuJ)

    def first_moment(self, X, x, lam):
        """Closed form ``(Id + x x^T J) X F*(X, x) lam``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        w = (np.asarray(lam) * sinhc_scale(self.dist(x, X))) @ X
        return w + minkowski(w, x) * x

    def span_closest(self, X, Y):
        """Minkowski-orthogonal projection on ``Span(X)``, renormalized.

        The component of ``y`` orthogonal to a span containing a timelike
        vector is spacelike, so the projection is always timelike and the
        closest point is unique.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.asarray(Y, dtype=float)
        J = self.metric_matrix
        G = X @ J @ X.T
        try:
            coef = np.linalg.solve(G, X @ J @ Y.T)
        except np.linalg.LinAlgError:
            raise DependentPointsError("reference points are affinely dependent") from None
        P = (X.T @ coef).T
        closest = _rescale(P)
        return closest, self.dist(closest, Y)

    def random_point(self, rng, size=None, scale=1.0):
        shape = (self.dim,) if size is None else (size, self.dim)
        return from_weierstrass(rng.normal(scale=scale, size=shape))

    def constraint_violation(self, Y):
        Y = np.asarray(Y, dtype=float)
        bad_sheet = np.where(Y[..., 0] > 0, 0.0, np.inf)
        return np.abs(minkowski(Y, Y) + 1.0) / np.maximum(1.0, Y[..., 0] ** 2) + bad_sheet
