"""Flags of affine spans, accumulated unexplained variance and sample-limited searches.

Unexplained variances are per-datum means of squared projection residuals;
the AUV of a flag sums the unexplained variance of each prefix weighted by
the number of points added at that step.
"""

from __future__ import annotations

import itertools
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .barycentric import ReferenceConfiguration
from .errors import (
    DependentPointsError,
    FocalPointError,
    InsufficientDataError,
    NoIndependentTupleError,
)
from .manifold import Euclidean, Manifold

VARIANCE_CONVENTION = "per-datum mean of squared residuals"
GROUP_WEIGHTING = "each prefix weighted by the size of the group added at that step"


class DegenerateSpectrumWarning(UserWarning):
    """Leading covariance eigenvalues are not simple: the PCA flag is not unique."""


@dataclass(frozen=True, eq=False)
class Flag:
    """Nested affine spans generated by ordered groups of pool points."""

    manifold: Manifold
    pool: np.ndarray
    groups: tuple

    def __post_init__(self):
        pool = np.atleast_2d(np.asarray(self.pool, dtype=float))
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        flat = [i for g in groups for i in g]
        if not groups or any(len(g) == 0 for g in groups):
            raise ValueError("flag groups must be non-empty")
        if len(set(flat)) != len(flat):
            raise ValueError("flag groups must be disjoint")
        if min(flat) < 0 or max(flat) >= pool.shape[0]:
            raise ValueError("group index outside the pool")
        object.__setattr__(self, "pool", pool)
        object.__setattr__(self, "groups", groups)

    @classmethod
    def strict(cls, manifold, pool, order=None):
        pool = np.atleast_2d(np.asarray(pool, dtype=float))
        order = range(pool.shape[0]) if order is None else order
        return cls(manifold, pool, tuple((i,) for i in order))

    @property
    def group_sizes(self):
        return [len(g) for g in self.groups]

    @property
    def order(self):
        return [i for g in self.groups for i in g]

    def prefixes(self):
        """Reference configurations of the cumulative prefixes."""
        out, idx = [], []
        for g in self.groups:
            idx = idx + list(g)
            out.append(ReferenceConfiguration(self.manifold, self.pool[idx]))
        return out


def _residuals(ref, data):
    _, r = ref.manifold.span_closest(ref.points, np.atleast_2d(data))
    return r


def unexplained_variance(ref, data):
    """Mean squared distance from the data to the affine span of ``ref``.

    A :class:`FocalPointError` carries the index of the offending datum.
    """
    return float(np.mean(_residuals(ref, data) ** 2))


def flag_levels(flag, data):
    """Unexplained variance of every prefix of the flag."""
    return [unexplained_variance(ref, data) for ref in flag.prefixes()]


def auv(flag, data):
    """Accumulated unexplained variance of a flag."""
    return float(np.dot(flag.group_sizes, flag_levels(flag, data)))


@dataclass
class AnalysisResult:
    method: str
    k: int
    reference_indices: list | None
    per_level_unexplained_variance: list
    auv: float
    seed: int | None = None
    budget: int | None = None
    runtime: float = 0.0
    config: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        """JSON-ready payload; wall-clock time lives under ``timing`` only."""
        return {
            "method": self.method,
            "k": self.k,
            "reference_indices": self.reference_indices,
            "per_level_unexplained_variance": [float(v) for v in self.per_level_unexplained_variance],
            "auv": float(self.auv),
            "seed": self.seed,
            "budget": self.budget,
            "conventions": {"variance": VARIANCE_CONVENTION, "group_weighting": GROUP_WEIGHTING},
            "config": self.config,
            "diagnostics": self.diagnostics,
            "extras": _jsonable(self.extras),
            "timing": {"runtime_seconds": self.runtime},
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# -- search machinery ------------------------------------------------------------


class _VarianceCache:
    """Unexplained variance per unordered subset of data indices.

    Dependent subsets and subsets with a focal datum evaluate to ``None``.
    """

    def __init__(self, manifold, data):
        self.manifold = manifold
        self.data = data
        self.cache = {}
        self.n_dependent = 0
        self.n_focal = 0

    def __call__(self, idx):
        key = tuple(sorted(idx))
        if key not in self.cache:
            ref = ReferenceConfiguration(self.manifold, self.data[list(key)])
            if not ref.is_affinely_independent:
                self.n_dependent += 1
                val = None
            else:
                try:
                    val = unexplained_variance(ref, self.data)
                except FocalPointError:
                    self.n_focal += 1
                    val = None
            self.cache[key] = val
        return self.cache[key]


def _check_data(manifold, data, k):
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.shape[0] == 0:
        raise InsufficientDataError("empty dataset")
    if k < 0:
        raise ValueError("k must be >= 0")
    if data.shape[0] < k + 1:
        raise InsufficientDataError(f"{data.shape[0]} points cannot support {k + 1} reference points")
    if data.shape[1] != manifold.ambient_dim:
        raise ValueError("data dimension does not match the manifold")
    return data


def _candidate_tuples(N, m, ordered, budget, seed):
    """Tuples to evaluate, in lexicographic order, and whether the search is exhaustive.

    Under budget, tuples are drawn uniformly without replacement.
    """
    total = math.perm(N, m) if ordered else math.comb(N, m)
    if budget is None or total <= budget:
        gen = itertools.permutations(range(N), m) if ordered else itertools.combinations(range(N), m)
        return gen, total, True
    rng = np.random.default_rng(seed)
    picked = set()
    while len(picked) < budget:
        t = rng.choice(N, size=m, replace=False)
        picked.add(tuple(int(i) for i in (t if ordered else np.sort(t))))
    return sorted(picked), total, False


def forward_bsa(manifold, data, k, mode="sample_limited"):
    """Forward barycentric subspace analysis (FBS) over data candidates.

    Level 0 is the sample-limited Frechet mean; each next level adds the data
    point minimizing the unexplained variance with the previous points fixed.
    """
    if mode != "sample_limited":
        raise ValueError("only the sample-limited forward analysis is supported")
    t0 = time.perf_counter()
    data = _check_data(manifold, data, k)
    N = data.shape[0]
    uv = _VarianceCache(manifold, data)
    chosen, levels = [], []
    for _ in range(k + 1):
        best, best_val = None, np.inf
        for c in range(N):
            if c in chosen:
                continue
            val = uv(chosen + [c])
            if val is not None and val < best_val:
                best, best_val = c, val
        if best is None:
            raise InsufficientDataError(f"no candidate extends the flag beyond {len(chosen)} points")
        chosen.append(best)
        levels.append(best_val)
    return AnalysisResult(
        method="FBS",
        k=k,
        reference_indices=chosen,
        per_level_unexplained_variance=levels,
        auv=float(sum(levels)),
        runtime=time.perf_counter() - t0,
        diagnostics={"n_evaluated": len(uv.cache), "n_dependent": uv.n_dependent, "n_focal": uv.n_focal},
    )


def optimal_pure_subspace(manifold, data, k, budget=None, seed=0):
    """Optimal k-dimensional pure barycentric subspace (k-PBS) over data tuples.

    Levels are reported along the backward ordering: from the optimal set,
    repeatedly drop the point whose removal leaves the smallest unexplained
    variance. The AUV is that of the resulting strict flag; the AUV of the
    pure subspace, ``(k+1)`` times its unexplained variance, is in ``extras``.
    """
    t0 = time.perf_counter()
    data = _check_data(manifold, data, k)
    N = data.shape[0]
    uv = _VarianceCache(manifold, data)
    tuples, total, exhaustive = _candidate_tuples(N, k + 1, False, budget, seed)
    best, best_val, n_eval = None, np.inf, 0
    for t in tuples:
        n_eval += 1
        val = uv(t)
        if val is not None and val < best_val:
            best, best_val = t, val
    if best is None:
        raise NoIndependentTupleError("no affinely independent tuple among the candidates")

    order = list(best)
    levels = [best_val]
    remaining = list(best)
    removed = []
    while len(remaining) > 1:
        cand = []
        for i in remaining:
            rest = [j for j in remaining if j != i]
            v = uv(rest)
            cand.append((np.inf if v is None else v, i))
        v, i = min(cand)
        remaining.remove(i)
        removed.append(i)
        levels.append(v)
    order = remaining + removed[::-1]
    levels = levels[::-1]
    return AnalysisResult(
        method="kPBS",
        k=k,
        reference_indices=order,
        per_level_unexplained_variance=levels,
        auv=float(sum(levels)),
        seed=seed,
        budget=budget,
        runtime=time.perf_counter() - t0,
        diagnostics={
            "n_tuples_total": total,
            "n_tuples_evaluated": n_eval,
            "exhaustive": exhaustive,
            "n_dependent": uv.n_dependent,
            "n_focal": uv.n_focal,
        },
        extras={"subset": sorted(best), "pure_auv": (k + 1) * best_val},
    )


def bsa_flag_search(manifold, data, k, budget=None, seed=0):
    """Barycentric subspace analysis up to order k (k-BSA): the ordered tuple of minimal AUV."""
    t0 = time.perf_counter()
    data = _check_data(manifold, data, k)
    N = data.shape[0]
    uv = _VarianceCache(manifold, data)
    tuples, total, exhaustive = _candidate_tuples(N, k + 1, True, budget, seed)
    best, best_levels, best_auv, n_eval = None, None, np.inf, 0
    for t in tuples:
        n_eval += 1
        levels = []
        for m in range(1, k + 2):
            v = uv(t[:m])
            if v is None:
                break
            levels.append(v)
        else:
            a = sum(levels)
            if a < best_auv:
                best, best_levels, best_auv = t, levels, a
    if best is None:
        raise NoIndependentTupleError("no affinely independent tuple among the candidates")
    return AnalysisResult(
        method="kBSA",
        k=k,
        reference_indices=list(best),
        per_level_unexplained_variance=best_levels,
        auv=float(best_auv),
        seed=seed,
        budget=budget,
        runtime=time.perf_counter() - t0,
        diagnostics={
            "n_tuples_total": total,
            "n_tuples_evaluated": n_eval,
            "exhaustive": exhaustive,
            "n_dependent": uv.n_dependent,
            "n_focal": uv.n_focal,
        },
    )


# -- Euclidean PCA ----------------------------------------------------------------


def qr_affine_decompose(X):
    """Affine QR decomposition ``X = x0 1^T + Q T`` of points given as rows.

    Returns ``x0`` (the first point), ``Q`` of shape ``(n, k+1)`` with
    ``q0 = 0`` and orthonormal ``q1..qk``, and ``T`` upper triangular with zero
    first row and column and positive diagonal elsewhere.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    x0 = X[0].copy()
    n, kp1 = X.shape[1], X.shape[0]
    Q = np.zeros((n, kp1))
    T = np.zeros((kp1, kp1))
    scale = max(1.0, np.max(np.abs(X - x0)))
    # modified Gram-Schmidt, re-orthogonalized once for stability
    for j in range(1, kp1):
        v = X[j] - x0
        for _ in range(2):
            for i in range(1, j):
                c = Q[:, i] @ v
                T[i, j] += c
                v = v - c * Q[:, i]
        r = np.linalg.norm(v)
        if r <= 1e-12 * scale:
            raise DependentPointsError("points are affinely dependent")
        T[j, j] = r
        Q[:, j] = v / r
    return x0, Q, T


def pca_auv_closed_form(eigenvalues, k):
    """``sum_{i<=k} i s_i + (k+1) sum_{i>k} s_i`` for decreasing variances ``s_1 >= s_2 >= ...``."""
    s = np.asarray(eigenvalues, dtype=float)
    i = np.arange(1, s.size + 1)
    return float(np.sum(np.minimum(i, k + 1) * s))


def euclidean_pca_flag(data, k):
    """PCA flag ``mean, mean + u_1, ..., mean + u_k`` and its AUV by two routes.

    ``auv`` is the direct sum over the flag; ``extras['auv_closed_form']`` uses
    the covariance spectrum (``1/N`` normalization).
    """
    t0 = time.perf_counter()
    data = np.atleast_2d(np.asarray(data, dtype=float))
    N, n = data.shape
    if N < 1:
        raise InsufficientDataError("empty dataset")
    if k > n:
        raise ValueError("k cannot exceed the dimension")
    mean = data.mean(axis=0)
    Yc = data - mean
    evals, evecs = np.linalg.eigh(Yc.T @ Yc / N)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    lead = evals[: k + 1]
    gaps = np.abs(np.diff(lead))
    if gaps.size and np.any(gaps <= 1e-10 * max(abs(evals[0]), 1e-300)):
        warnings.warn("leading covariance eigenvalues are not simple", DegenerateSpectrumWarning, stacklevel=2)
    pool = np.vstack([mean, mean + evecs[:, :k].T])
    M = Euclidean(n)
    flag = Flag.strict(M, pool)
    levels = flag_levels(flag, data)
    return AnalysisResult(
        method="EuclideanPCA",
        k=k,
        reference_indices=None,
        per_level_unexplained_variance=levels,
        auv=float(sum(levels)),
        runtime=time.perf_counter() - t0,
        extras={
            "auv_closed_form": pca_auv_closed_form(np.maximum(evals, 0.0), k),
            "eigenvalues": evals,
            "reference_points": pool,
        },
    )
