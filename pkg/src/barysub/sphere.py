"""Unit sphere S^n in R^(n+1): closed-form geometry, samplers and triangle shapes."""

from __future__ import annotations

import numpy as np

from .errors import CutLocusError, FocalPointError
from .manifold import Manifold

#: Logs are refused when ``pi - dist(x, y)`` falls below this clearance.
CUT_LOCUS_TOL = 1e-8
#: Below this angle ``theta / sin(theta)`` switches to its Taylor series.
SERIES_THRESHOLD = 1e-4


def sinc_scale(theta):
    """``f(theta) = theta / sin(theta)`` with a series branch near zero."""
    theta = np.asarray(theta, dtype=float)
    small = np.abs(theta) < SERIES_THRESHOLD
    t2 = theta * theta
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = theta / np.sin(theta)
    return np.where(small, 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0, exact)


def theta_cot(theta):
    """``theta * cot(theta)``, equal to 1 at zero."""
    theta = np.asarray(theta, dtype=float)
    return sinc_scale(theta) * np.cos(theta)


def _householder_complement(x):
    """Columns 1..D-1 of a reflection sending e_0 to +-x: a basis of x^perp."""
    D = x.shape[0]
    e0 = np.zeros(D)
    e0[0] = 1.0
    v = x - e0 if x[0] <= 0 else x + e0
    H = np.eye(D) - 2.0 * np.outer(v, v) / np.dot(v, v)
    return H[:, 1:]


class Sphere(Manifold):
    """The unit sphere ``S^n`` with the round metric."""

    kind = "sphere"
    curvature = 1.0

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("sphere dimension must be >= 1")
        super().__init__(dim)

    @property
    def ambient_dim(self):
        return self.dim + 1

    def proj_tangent(self, x, w):
        w = np.asarray(w, dtype=float)
        return w - np.sum(w * x, axis=-1, keepdims=True) * x

    def tangent_basis(self, x):
        return _householder_complement(np.asarray(x, dtype=float))

    def dist(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        # half-angle form stays accurate near 0 and pi, unlike arccos(x.y)
        a = np.linalg.norm(x - y, axis=-1)
        b = np.linalg.norm(x + y, axis=-1)
        return 2.0 * np.arctan2(a, b)

    def cut_locus_clearance(self, x, y):
        return np.pi - self.dist(x, y)

    def scale_factors(self, x, Y):
        return sinc_scale(self.dist(x, Y))

    def exp(self, x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        t = np.linalg.norm(v, axis=-1)[..., None]
        # sin(t)/t = 1/f(t)
        y = np.cos(t) * x + v / sinc_scale(t)
        return y / np.linalg.norm(y, axis=-1, keepdims=True)

    def log(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        theta = self.dist(x, y)
        if np.any(np.pi - theta < CUT_LOCUS_TOL):
            raise CutLocusError("log requested at the antipode (sphere cut locus)")
        w = y - np.sum(x * y, axis=-1, keepdims=True) * x
        return sinc_scale(theta)[..., None] * w

    def hessian_dist_sq(self, x, y):
        x = np.asarray(x, dtype=float)
        theta = float(self.dist(x, y))
        if np.pi - theta < CUT_LOCUS_TOL:
            raise CutLocusError("Hessian requested at the antipode")
        P = np.eye(self.ambient_dim) - np.outer(x, x)
        if theta == 0.0:
            return P
        u = self.log(x, y) / theta
        uu = np.outer(u, u)
        return uu + float(theta_cot(theta)) * (P - uu)

    def first_moment(self, X, x, lam):
        """Closed form ``(Id - x x^T) X F(X, x) lam``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        theta = self.dist(x, X)
        if np.any(np.pi - theta < CUT_LOCUS_TOL):
            raise CutLocusError("moment evaluated at the antipode of a reference point")
        w = (np.asarray(lam) * sinc_scale(theta)) @ X
        return w - np.dot(w, x) * x

    def span_closest(self, X, Y):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.asarray(Y, dtype=float)
        if X.shape[0] == 1:
            closest = np.broadcast_to(X[0], Y.shape).copy()
            return closest, self.dist(closest, Y)
        U, s, _ = np.linalg.svd(X.T, full_matrices=False)
        U = U[:, s > 1e-12 * s[0]]
        P = (Y @ U) @ U.T
        pn = np.linalg.norm(P, axis=-1)
        bad = pn < 1e-10
        if np.any(bad):
            idx = int(np.flatnonzero(np.atleast_1d(bad))[0])
            raise FocalPointError("query is orthogonal to the span: every span point is equidistant", idx)
        closest = P / pn[..., None]
        return closest, self.dist(closest, Y)

    def random_point(self, rng, size=None, scale=1.0):
        shape = (self.ambient_dim,) if size is None else (size, self.ambient_dim)
        y = rng.normal(size=shape)
        return y / np.linalg.norm(y, axis=-1, keepdims=True)

    def constraint_violation(self, Y):
        return np.abs(np.linalg.norm(np.asarray(Y, dtype=float), axis=-1) - 1.0)


# -- sampling ----------------------------------------------------------------


def wrapped_gaussian_sample(center, sigma, rng=None):
    """``exp(center, v)`` with ``v`` isotropic Gaussian in the tangent space.

    ``sigma`` is the per-coordinate standard deviation in radians; ``rng`` is a
    seed or a :class:`numpy.random.Generator`.
    """
    rng = np.random.default_rng(rng)
    center = np.asarray(center, dtype=float)
    S = Sphere(center.shape[0] - 1)
    if sigma == 0:
        return center.copy()
    return S.exp(center, S.random_tangent(center, rng, scale=sigma))


def uniform_triangle_sample(a, b, c, rng=None, max_proposals=10**6):
    """Uniform draw from the spherical triangle with vertices ``a, b, c``.

    Proposals are uniform on the flat triangle ``abc`` and pushed to the sphere
    by central (gnomonic) projection, which inflates the density by
    ``|p|^3 / h`` where ``h`` is the distance from the origin to the plane.
    Accepting with probability ``(h / |p|)^3`` restores uniformity.
    """
    rng = np.random.default_rng(rng)
    V = np.array([a, b, c], dtype=float)
    # distance from the origin to the affine plane through a, b, c
    D = V[1:] - V[0]
    G = D @ D.T
    if abs(np.linalg.det(G)) < 1e-14:
        raise ValueError("degenerate triangle")
    coef = np.linalg.solve(G, -D @ V[0])
    foot = V[0] + coef @ D
    h = np.linalg.norm(foot)
    if h < 1e-12:
        raise ValueError("degenerate triangle: plane through the origin")
    for _ in range(max_proposals):
        r1, r2 = rng.random(2)
        if r1 + r2 > 1.0:
            r1, r2 = 1.0 - r1, 1.0 - r2
        p = V[0] + r1 * D[0] + r2 * D[1]
        pn = np.linalg.norm(p)
        if rng.random() <= (h / pn) ** 3:
            return p / pn
    raise RuntimeError("rejection sampler exhausted its proposal budget")


def equilateral_triangle(side=np.pi / 2, ambient_dim=3):
    """Vertices of an equilateral spherical triangle centred on (1,1,1)/sqrt(3).

    The vertices lie in the first three coordinates.
    """
    if ambient_dim < 3:
        raise ValueError("ambient_dim must be >= 3")
    sin2 = 2.0 / 3.0 * (1.0 - np.cos(side))
    if not 0 < sin2 <= 1:
        raise ValueError("side too long for an equilateral spherical triangle")
    r = np.arcsin(np.sqrt(sin2))
    centre = np.ones(3) / np.sqrt(3.0)
    e1 = np.array([2.0, -1.0, -1.0]) / np.sqrt(6.0)
    e2 = np.array([0.0, 1.0, -1.0]) / np.sqrt(2.0)
    verts = np.zeros((3, ambient_dim))
    for i, ang in enumerate(2 * np.pi * np.arange(3) / 3):
        verts[i, :3] = np.cos(r) * centre + np.sin(r) * (np.cos(ang) * e1 + np.sin(ang) * e2)
    return verts


# -- Kendall shapes of planar triangles ---------------------------------------

#: Radius of Kendall's shape sphere for planar triangles; outputs are scaled by its inverse.
KENDALL_RADIUS = 0.5


def kendall_shape_of_triangle(p1, p2, p3):
    """Shape of a planar triangle as a point of the unit 2-sphere.

    Helmert coordinates ``z1 = (p2 - p1)/sqrt(2)``, ``z2 = (2 p3 - p1 - p2)/sqrt(6)``
    are normalized to unit pre-shape norm and sent through the Hopf map
    ``(|z1|^2 - |z2|^2, 2 Re(z1 conj z2), 2 Im(z1 conj z2)) / 2`` onto the sphere of
    radius 1/2, then rescaled by 2. Equilateral triangles land on ``+-e_3``.
    """
    p1, p2, p3 = (complex(*np.asarray(p, dtype=float)) for p in (p1, p2, p3))
    z1 = (p2 - p1) / np.sqrt(2.0)
    z2 = (2.0 * p3 - p1 - p2) / np.sqrt(6.0)
    size = np.sqrt(abs(z1) ** 2 + abs(z2) ** 2)
    if size < 1e-12:
        raise ValueError("degenerate triangle: all landmarks coincide")
    z1, z2 = z1 / size, z2 / size
    w = z1 * np.conj(z2)
    half = 0.5 * np.array([abs(z1) ** 2 - abs(z2) ** 2, 2 * w.real, 2 * w.imag])
    return half / KENDALL_RADIUS
