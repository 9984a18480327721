"""Experiment drivers: signature maps of the weighted Hessian and dataset analyses."""

from __future__ import annotations

import io
import time
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .barycentric import (
    DEGENERATE,
    LOCAL_MIN,
    SADDLE,
    ReferenceConfiguration,
    classify_ebs_point,
    ebs_membership,
    weighted_variance,
)
from .errors import CutLocusError, ZeroMassError
from .flags import bsa_flag_search, euclidean_pca_flag, forward_bsa, optimal_pure_subspace
from .hyperbolic import from_weierstrass

EXCLUDED = "Excluded"
NOT_EBS = "NotEBS"
CLASSES = (LOCAL_MIN, SADDLE, DEGENERATE, NOT_EBS, EXCLUDED)

#: Grid cells closer than this to a reference point's cut locus are not classified.
CUT_MARGIN = 1e-6


def sphere_grid(n_lon=200, n_lat=100):
    """Cell-centred (longitude, colatitude) grid on S^2; arrays of shape ``(n_lat, n_lon)``."""
    lon = (np.arange(n_lon) + 0.5) * 2 * np.pi / n_lon
    colat = (np.arange(n_lat) + 0.5) * np.pi / n_lat
    L, C = np.meshgrid(lon, colat)
    pts = np.stack([np.sin(C) * np.cos(L), np.sin(C) * np.sin(L), np.cos(C)], axis=-1)
    return np.stack([L, C], axis=-1), pts


def hyperbolic_grid(n=200, half_width=3.0):
    """Cell-centred Weierstrass grid on ``[-w, w]^2``; arrays of shape ``(n, n)``."""
    t = -half_width + (np.arange(n) + 0.5) * 2 * half_width / n
    U, V = np.meshgrid(t, t)
    coords = np.stack([U, V], axis=-1)
    return coords, from_weierstrass(coords)


@dataclass
class SignatureMap:
    ref: ReferenceConfiguration
    coords: np.ndarray  # (rows, cols, 2) grid parameters
    points: np.ndarray  # (rows, cols, D)
    s_min: np.ndarray
    index: np.ndarray  # -1 where not classified
    classification: np.ndarray  # strings from CLASSES
    wrap: bool  # sphere grid: longitude periodic, poles shared

    @property
    def shape(self):
        return self.index.shape

    def distinct_indices(self):
        mask = np.isin(self.classification, [LOCAL_MIN, SADDLE, DEGENERATE])
        return sorted(set(int(i) for i in self.index[mask]))

    def localmin_components(self):
        """Number of 4-connected LocalMin regions, with longitude wrap and pole cells merged."""
        mask = self.classification == LOCAL_MIN
        labels, n = ndimage.label(mask)
        if n == 0 or not self.wrap:
            return int(n)
        parent = list(range(n + 1))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            if a and b:
                parent[find(a)] = find(b)

        for r in range(labels.shape[0]):
            union(labels[r, 0], labels[r, -1])
        for row in (labels[0], labels[-1]):
            ids = [i for i in row if i]
            for i in ids[1:]:
                union(ids[0], i)
        return len({find(i) for i in range(1, n + 1)})

    def counts(self):
        vals, cnt = np.unique(self.classification, return_counts=True)
        return {str(v): int(c) for v, c in zip(vals, cnt)}

    def to_csv(self, header=None) -> str:
        buf = io.StringIO()
        for key, val in (header or {}).items():
            buf.write(f"# {key}: {val}\n")
        D = self.points.shape[-1]
        cols = ["u", "v"] + [f"x{i}" for i in range(D)] + ["s_min", "index", "class"]
        buf.write(",".join(cols) + "\n")
        for c, p, s, i, k in zip(
            self.coords.reshape(-1, 2),
            self.points.reshape(-1, D),
            self.s_min.ravel(),
            self.index.ravel(),
            self.classification.ravel(),
        ):
            vals = [format(float(v), ".17g") for v in (*c, *p, s)]
            buf.write(",".join(vals + [str(int(i)), str(k)]) + "\n")
        return buf.getvalue()


def signature_map(ref: ReferenceConfiguration, grid=None, rtol=None) -> SignatureMap:
    """Classify every grid point of the affine span of three points on S^2 or H^2.

    On the 2-sphere the grid covers the whole sphere (the span of three
    independent points); on the hyperbolic plane it is a Weierstrass box.
    """
    ref.require_independent()
    M = ref.manifold
    if M.dim != 2 or ref.k != 2:
        raise ValueError("signature maps need three reference points on a 2-dimensional manifold")
    if grid is None:
        grid = (200, 100) if M.kind == "sphere" else (200, 3.0)
    if M.kind == "sphere":
        coords, pts = sphere_grid(*grid)
        wrap = True
    elif M.kind == "hyperbolic":
        coords, pts = hyperbolic_grid(*grid)
        wrap = False
    else:
        raise ValueError("signature maps are defined on the sphere and the hyperbolic plane")
    kwargs = {} if rtol is None else {"rtol": rtol}

    shape = pts.shape[:2]
    s_min = np.full(shape, np.nan)
    index = np.full(shape, -1, dtype=int)
    cls = np.full(shape, EXCLUDED, dtype=object)
    for r in range(shape[0]):
        for c in range(shape[1]):
            x = pts[r, c]
            if np.any(M.cut_locus_clearance(x, ref.points) < CUT_MARGIN):
                continue
            try:
                mem = ebs_membership(ref, x)
                s_min[r, c] = mem.smallest_singular_value
                if not mem.is_member:
                    cls[r, c] = NOT_EBS
                    continue
                rec = classify_ebs_point(ref, x, membership=mem, **kwargs)
            except (ZeroMassError, CutLocusError):
                continue
            index[r, c] = rec.index
            cls[r, c] = rec.classification
    return SignatureMap(ref, coords, pts, s_min, index, cls.astype(str), wrap)


def variance_increases(ref, x, lam, step=1e-3, n_dirs=8):
    """Local-minimum check: the weighted variance grows along ``n_dirs`` tangent directions."""
    M = ref.manifold
    f0 = weighted_variance(ref, x, lam)
    B = M.tangent_basis(x)
    angles = 2 * np.pi * np.arange(n_dirs) / n_dirs
    for a in angles:
        d = np.cos(a) * B[:, 0] + np.sin(a) * B[:, 1 % M.dim]
        if weighted_variance(ref, M.exp(x, step * d), lam) <= f0:
            return False
    return True


# -- sphere configurations used for signature maps ----------------------------------


def _sph(lon_deg, colat_deg):
    lon, c = np.deg2rad(lon_deg), np.deg2rad(colat_deg)
    return np.array([np.sin(c) * np.cos(lon), np.sin(c) * np.sin(lon), np.cos(c)])


#: Reference triples on S^2 as (longitude, colatitude) in degrees. The scalene
#: and wide triples have a LocalMin region with two components on the
#: 200 x 100 grid (stable under grid refinement); the cap triple's is connected.
SPHERE_CONFIGS = {
    "s2-scalene": [(0, 30), (90, 80), (200, 120)],
    "s2-cap": [(0, 60), (120, 60), (240, 60)],
    "s2-wide": [(0, 100), (120, 100), (240, 100)],
}

#: Reference triples on H^2 in Weierstrass coordinates.
HYPERBOLIC_CONFIGS = {
    "h2-compact": [(0, 0), (1, 0), (0, 1)],
    "h2-spread": [(-1, -1), (1.5, 0), (0, 2)],
    "h2-flat": [(-2, 0), (2, 0), (0, 0.3)],
}


def preset_configuration(name):
    from .hyperbolic import Hyperbolic
    from .sphere import Sphere

    if name in SPHERE_CONFIGS:
        return ReferenceConfiguration(Sphere(2), np.array([_sph(*p) for p in SPHERE_CONFIGS[name]]))
    if name in HYPERBOLIC_CONFIGS:
        return ReferenceConfiguration(Hyperbolic(2), from_weierstrass(np.array(HYPERBOLIC_CONFIGS[name], dtype=float)))
    raise KeyError(f"unknown configuration {name!r}; choose from {sorted(SPHERE_CONFIGS) + sorted(HYPERBOLIC_CONFIGS)}")


# -- dataset analyses -----------------------------------------------------------------

METHODS = ("fbs", "pbs", "bsa", "pca-flag")


def run_analysis(dataset, method, k, budget=None, seed=0, config=None):
    """Dispatch a dataset to one of the flag analyses and attach the configuration."""
    t0 = time.perf_counter()
    M = dataset.manifold
    if method == "fbs":
        res = forward_bsa(M, dataset.points, k)
    elif method == "pbs":
        res = optimal_pure_subspace(M, dataset.points, k, budget=budget, seed=seed)
    elif method == "bsa":
        res = bsa_flag_search(M, dataset.points, k, budget=budget, seed=seed)
    elif method == "pca-flag":
        if dataset.kind != "euclidean":
            raise ValueError("pca-flag needs a Euclidean dataset")
        res = euclidean_pca_flag(dataset.points, k)
    else:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    res.seed, res.budget = seed, budget
    res.config = dict(config or {}, method=method, k=k, budget=budget, seed=seed, manifold=dataset.kind)
    res.runtime = time.perf_counter() - t0
    return res
