"""One test per acceptance criterion, at the stated tolerances and runtime limits."""

import itertools
import time

import numpy as np
import pytest

from barysub.barycentric import (
    LOCAL_MIN,
    ReferenceConfiguration,
    affine_span_project,
    classify_ebs_point,
    ebs_membership,
    normalize_weights,
    p_variance_gradient,
    weighted_frechet_mean,
)
from barysub.datasets import generate_equi, injected_noise_variance
from barysub.experiments import HYPERBOLIC_CONFIGS, SPHERE_CONFIGS, preset_configuration, signature_map
from barysub.flags import (
    Flag,
    auv,
    bsa_flag_search,
    euclidean_pca_flag,
    forward_bsa,
    optimal_pure_subspace,
    pca_auv_closed_form,
)
from barysub.hyperbolic import Hyperbolic, minkowski, theta_coth
from barysub.manifold import Euclidean, fd_dlog, fd_hessian
from barysub.sphere import Sphere, theta_cot

from .conftest import random_tangent_in_ball

pytestmark = pytest.mark.acceptance

CURVED = [Sphere(2), Sphere(5), Hyperbolic(2), Hyperbolic(4)]


def _span_point(M, X, rng):
    """Random point of the affine span of the rows of ``X``."""
    while True:
        p = rng.normal(size=X.shape[0]) @ X
        if M.kind == "sphere":
            return p / np.linalg.norm(p)
        q = minkowski(p, p)
        if q < -1e-3:
            return np.sign(p[0]) * p / np.sqrt(-q)


def _unit_normal(M, X, rng):
    """Unit vector orthogonal (in the ambient metric) to the linear span of ``X``."""
    G = M.metric_matrix
    w = rng.normal(size=M.ambient_dim)
    w = w - X.T @ np.linalg.solve(X @ G @ X.T, X @ G @ w)
    return w / np.sqrt(w @ G @ w)


# -- AC1 ------------------------------------------------------------------------


def test_ac1_geometry_closed_forms():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst_rt, worst_h = 0.0, 0.0
    for M in CURVED:
        reach = np.pi - 0.01 if M.kind == "sphere" else 10.0
        n_hess = 0
        for _ in range(1000):
            x = M.random_point(rng)
            v = random_tangent_in_ball(M, x, rng, reach)
            y = M.exp(x, v)
            worst_rt = max(worst_rt, np.linalg.norm(M.log(x, y) - v) / max(1.0, np.linalg.norm(v)))
            if M.kind == "hyperbolic":
                y = M.exp(x, random_tangent_in_ball(M, x, rng, 4.0))
            elif M.cut_locus_clearance(x, y) < 0.2:
                continue
            n_hess += 1
            H = M.hessian_dist_sq_tangent(x, y)
            Hfd = fd_hessian(lambda z: 0.5 * M.dist(z, y) ** 2, M, x, batched=True)
            worst_h = max(worst_h, np.linalg.norm(H - Hfd) / np.linalg.norm(H))
        assert n_hess >= 900
    elapsed = time.perf_counter() - t0
    print(f"AC1 round trip {worst_rt:.2e}, Hessian rel {worst_h:.2e}, {elapsed:.2f}s")
    assert worst_rt <= 1e-9
    assert worst_h <= 1e-5
    assert elapsed < 5.0


# -- AC2 ------------------------------------------------------------------------


def test_ac2_hessian_spectra():
    rng = np.random.default_rng(2)
    for n in (2, 3, 5):
        S = Sphere(n)
        for theta in np.append(rng.uniform(0, np.pi - 0.05, 50), np.pi / 2):
            x = S.random_point(rng)
            y = S.exp(x, theta * S.tangent_basis(x)[:, 0])
            mu = np.sort(np.linalg.eigvalsh(S.hessian_dist_sq_tangent(x, y)))
            expected = np.sort([1.0] + [float(theta_cot(theta))] * (n - 1))
            assert np.max(np.abs(mu - expected)) <= 1e-9
        x = np.eye(n + 1)[0]
        mu = np.sort(np.linalg.eigvalsh(S.hessian_dist_sq_tangent(x, np.eye(n + 1)[1])))
        assert np.max(np.abs(mu - np.append(np.zeros(n - 1), 1.0))) <= 1e-9
    lo = np.inf
    for M in (Hyperbolic(2), Hyperbolic(4)):
        for _ in range(500):
            x, y = M.random_point(rng, size=2, scale=2.0)
            mu = np.linalg.eigvalsh(M.hessian_dist_sq_tangent(x, y))
            theta = M.dist(x, y)
            assert np.allclose(np.sort(mu), np.sort([1.0] + [theta_coth(theta)] * (M.dim - 1)), rtol=1e-9)
            lo = min(lo, mu.min())
    print(f"AC2 hyperbolic min eigenvalue {lo:.12f}")
    assert lo >= 1 - 1e-10


# -- AC3 ------------------------------------------------------------------------


def test_ac3_taylor_order():
    rng = np.random.default_rng(3)
    orders = []
    for S in (Sphere(2), Sphere(4)):
        for _ in range(5):
            x = S.random_point(rng)
            u = S.random_tangent(x, rng)
            u /= np.linalg.norm(u)
            thetas = (0.2, 0.1, 0.05)
            errs = [np.linalg.norm(S.taylor_dlog(x, S.exp(x, t * u)) - fd_dlog(S, x, S.exp(x, t * u), h=1e-5)) for t in thetas]
            order = np.polyfit(np.log(thetas), np.log(errs), 1)[0]
            orders.append(order)
    print(f"AC3 observed orders min {min(orders):.3f}")
    assert min(orders) >= 2.7


# -- AC4 ------------------------------------------------------------------------


def test_ac4_affine_span_membership_and_projection():
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    counts = {}
    for M in (Sphere(4), Hyperbolic(4)):
        in_ok = off_ok = 0
        for _ in range(1000):
            k = int(rng.integers(1, 4))
            X = M.random_point(rng, size=k + 1)
            ref = ReferenceConfiguration(M, X)
            while True:
                x = _span_point(M, X, rng)
                if M.kind != "sphere" or np.min(np.linalg.norm(X + x, axis=1)) > 1e-6:
                    break
            in_ok += ebs_membership(ref, x).is_member
            phi = rng.uniform(0.0101, 1.2)
            w = _unit_normal(M, X, rng)
            y = np.cos(phi) * x + np.sin(phi) * w if M.kind == "sphere" else np.cosh(phi) * x + np.sinh(phi) * w
            off_ok += not ebs_membership(ref, y).is_member
        counts[M.kind] = (in_ok, off_ok)
    # fixed axes: [e1, e2, e3] on S^5 and the matching triangle at the origin of H^5
    E = np.eye(6)
    h_axes = np.array([E[0], np.cosh(1) * E[0] + np.sinh(1) * E[1], np.cosh(1) * E[0] + np.sinh(1) * E[2]])
    for M, X in ((Sphere(5), E[:3]), (Hyperbolic(5), h_axes)):
        ref = ReferenceConfiguration(M, X)
        in_ok = off_ok = 0
        for _ in range(1000):
            while True:
                x = _span_point(M, X, rng)
                if M.kind != "sphere" or np.min(np.linalg.norm(X + x, axis=1)) > 1e-6:
                    break
            in_ok += ebs_membership(ref, x).is_member
            phi = rng.uniform(0.0101, 1.2)
            w = _unit_normal(M, X, rng)
            y = np.cos(phi) * x + np.sin(phi) * w if M.kind == "sphere" else np.cosh(phi) * x + np.sinh(phi) * w
            off_ok += not ebs_membership(ref, y).is_member
        counts[f"{M.kind}{M.dim}-axes"] = (in_ok, off_ok)
    print(f"AC4 membership {counts}")
    assert all(c == (1000, 1000) for c in counts.values())

    # projection on the 2-subsphere Span(e1, e2, e3) of S^5 against a 0.5 degree grid
    step = np.deg2rad(0.5)
    lon, colat = np.meshgrid(np.arange(0, 2 * np.pi, step), np.arange(0, np.pi + step / 2, step))
    g = np.stack([np.sin(colat) * np.cos(lon), np.sin(colat) * np.sin(lon), np.cos(colat)], axis=-1).reshape(-1, 3)
    ref = ReferenceConfiguration(Sphere(5), E[:3])
    worst = 0.0
    for _ in range(50):
        y = Sphere(5).random_point(rng)
        oracle = float(np.min(np.arccos(np.clip(g @ y[:3], -1, 1))))
        worst = max(worst, abs(affine_span_project(ref, y).residual - oracle))
    print(f"AC4 S^5 subsphere projection vs grid oracle {worst:.2e} rad")
    assert worst <= 1e-3

    step = np.deg2rad(0.5)
    worst = 0.0
    for M in (Sphere(2), Hyperbolic(2)):
        for _ in range(50):
            X = M.random_point(rng, size=2)
            y = M.random_point(rng)
            x0 = X[0]
            v = M.log(x0, X[1])
            v = v / M.norm(x0, v)
            if M.kind == "sphere":
                t = np.arange(0, 2 * np.pi, step)
                line = np.cos(t)[:, None] * x0 + np.sin(t)[:, None] * v
            else:
                t = np.arange(-8, 8, step)
                line = np.cosh(t)[:, None] * x0 + np.sinh(t)[:, None] * v
            oracle = float(np.min(M.dist(line, y)))
            got = affine_span_project(ReferenceConfiguration(M, X), y).residual
            worst = max(worst, abs(got - oracle))
    elapsed = time.perf_counter() - t0
    print(f"AC4 projection vs grid oracle {worst:.2e} rad, {elapsed:.2f}s")
    assert worst <= 1e-3
    assert elapsed < 60.0


# -- AC5 ------------------------------------------------------------------------


def test_ac5_sphere_signature_maps():
    disconnected = 0
    for name in SPHERE_CONFIGS:
        t0 = time.perf_counter()
        smap = signature_map(preset_configuration(name))
        elapsed = time.perf_counter() - t0
        comps = smap.localmin_components()
        print(f"AC5 {name}: indices {smap.distinct_indices()}, LocalMin components {comps}, {elapsed:.1f}s")
        assert smap.classification.shape == (100, 200)
        assert len(smap.distinct_indices()) >= 2
        assert elapsed < 120.0
        disconnected += comps > 1
    assert disconnected >= 1


def test_ac5_hyperbolic_signature_maps():
    for name in HYPERBOLIC_CONFIGS:
        t0 = time.perf_counter()
        smap = signature_map(preset_configuration(name))
        elapsed = time.perf_counter() - t0
        print(f"AC5 {name}: indices {smap.distinct_indices()}, {elapsed:.1f}s")
        assert set(smap.distinct_indices()) <= {1, 2}
        assert elapsed < 120.0


# -- AC6 ------------------------------------------------------------------------


def test_ac6_pca_flag_optimality():
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        Y = rng.normal(size=(int(rng.integers(n + 2, 60)), n)) @ rng.normal(size=(n, n))
        res = euclidean_pca_flag(Y, int(rng.integers(0, n)))
        worst = max(worst, abs(res.auv - res.extras["auv_closed_form"]) / res.extras["auv_closed_form"])
    assert worst <= 1e-10

    k, n = 3, 6
    M = Euclidean(n)
    Y = rng.normal(size=(200, n)) * np.array([6, 5, 4, 3, 2, 1.0])
    best = euclidean_pca_flag(Y, k)
    beaten = 0
    for i in range(1000):
        if i % 2:
            pts = Y[rng.choice(200, size=k + 1, replace=False)]
        else:
            pts = rng.normal(size=(k + 1, n)) * 3
        beaten += auv(Flag.strict(M, pts), Y) >= best.auv
    assert beaten == 1000

    mean = Y.mean(axis=0)
    evals, evecs = np.linalg.eigh(np.cov(Y.T, bias=True))
    U = evecs[:, ::-1]
    base = auv(Flag.strict(M, np.vstack([mean, mean + U[:, :k].T])), Y)
    assert base == pytest.approx(pca_auv_closed_form(evals[::-1], k), rel=1e-10)
    for i, j in itertools.combinations(range(n), 2):
        V = U.copy()
        V[:, [i, j]] = V[:, [j, i]]
        swapped = auv(Flag.strict(M, np.vstack([mean, mean + V[:, :k].T])), Y)
        if i < k:
            assert swapped > base
        else:
            assert swapped == pytest.approx(base, rel=1e-12)
    elapsed = time.perf_counter() - t0
    print(f"AC6 dual-route {worst:.2e}, {elapsed:.2f}s")
    assert elapsed < 30.0


# -- AC7 ------------------------------------------------------------------------


def _naive_residual(kind, data, pts):
    """Distance to the span of ``pts``, from orthogonal components (no library code)."""
    out = []
    for y in data:
        if kind == "euclidean":
            A = (pts[1:] - pts[0]).T
            r = y - pts[0]
            if A.size:
                r = r - A @ np.linalg.lstsq(A, r, rcond=None)[0]
            out.append(np.sqrt(r @ r))
        elif kind == "sphere":
            if len(pts) == 1:
                out.append(np.arccos(np.clip(y @ pts[0], -1, 1)))
                continue
            A = pts.T
            p = A @ np.linalg.lstsq(A, y, rcond=None)[0]
            out.append(np.arctan2(np.sqrt((y - p) @ (y - p)), np.sqrt(p @ p)))
        else:
            J = np.diag([-1.0] + [1.0] * (len(y) - 1))
            if len(pts) == 1:
                out.append(np.arccosh(max(-(y @ J @ pts[0]), 1.0)))
                continue
            c = np.linalg.lstsq(pts @ J @ pts.T, pts @ J @ y, rcond=None)[0]
            r = y - pts.T @ c
            out.append(np.arcsinh(np.sqrt(max(r @ J @ r, 0.0))))
    return np.mean(np.square(out))


@pytest.mark.parametrize("M", [Euclidean(3), Sphere(3), Hyperbolic(3)], ids=lambda M: M.kind)
def test_ac7_exhaustive_search_matches_brute_force(M):
    rng = np.random.default_rng(7)
    if M.kind == "sphere":
        c = M.random_point(rng)
        data = np.array([M.exp(c, M.random_tangent(c, rng, scale=0.5)) for _ in range(8)])
    else:
        data = M.random_point(rng, size=8)
    for k in range(3):
        pure = {t: _naive_residual(M.kind, data, data[list(t)]) for t in itertools.combinations(range(8), k + 1)}
        best_set = min(pure, key=pure.get)
        flags = {
            t: sum(_naive_residual(M.kind, data, data[list(t[:m])]) for m in range(1, k + 2))
            for t in itertools.permutations(range(8), k + 1)
        }
        best_flag = min(flags, key=flags.get)

        pbs = optimal_pure_subspace(M, data, k)
        bsa = bsa_flag_search(M, data, k)
        assert tuple(pbs.extras["subset"]) == best_set
        assert pbs.per_level_unexplained_variance[-1] == pytest.approx(pure[best_set], rel=1e-10, abs=1e-14)
        assert tuple(bsa.reference_indices) == best_flag
        assert bsa.auv == pytest.approx(flags[best_flag], rel=1e-10, abs=1e-14)


# -- AC8 ------------------------------------------------------------------------


def test_ac8_equi_noise_band():
    t0 = time.perf_counter()
    target = injected_noise_variance(6, 10.0)
    rows = []
    for seed in range(20):
        ds = generate_equi(seed=seed)
        M = ds.manifold
        pbs = optimal_pure_subspace(M, ds.points, 2)
        bsa = bsa_flag_search(M, ds.points, 2)
        fbs = forward_bsa(M, ds.points, 2)
        assert pbs.diagnostics["exhaustive"] and bsa.diagnostics["exhaustive"]
        r_pbs = pbs.per_level_unexplained_variance[2] / target
        r_bsa = bsa.per_level_unexplained_variance[2] / target
        rows.append((seed, r_pbs, r_bsa, bsa.auv, fbs.auv))
        assert 0.5 <= r_pbs <= 2.0
        assert 0.5 <= r_bsa <= 2.0
        assert bsa.auv <= fbs.auv
        assert pbs.per_level_unexplained_variance[2] <= bsa.per_level_unexplained_variance[2]
    elapsed = time.perf_counter() - t0
    r = np.array(rows)
    print(f"AC8 ratio PBS [{r[:, 1].min():.2f}, {r[:, 1].max():.2f}], BSA [{r[:, 2].min():.2f}, {r[:, 2].max():.2f}], {elapsed:.1f}s")
    assert elapsed < 300.0


# -- AC9 ------------------------------------------------------------------------


def test_ac9_frechet_means_are_local_minima():
    rng = np.random.default_rng(9)
    ok = 0
    for i in range(200):
        M = CURVED[i % 4]
        k = int(rng.integers(1, M.dim + 1))
        c = M.random_point(rng)
        pts = np.array([M.exp(c, M.random_tangent(c, rng, scale=0.4 / np.sqrt(M.dim))) for _ in range(k + 1)])
        ref = ReferenceConfiguration(M, pts)
        lam = rng.dirichlet(np.ones(k + 1))
        x = weighted_frechet_mean(ref, lam)
        member = ebs_membership(ref, x)
        rec = classify_ebs_point(ref, x, membership=member)
        ok += member.is_member and rec.classification == LOCAL_MIN
    print(f"AC9 {ok}/200")
    assert ok == 200


# -- AC10 -----------------------------------------------------------------------


def test_ac10_p_variance_reweighting():
    rng = np.random.default_rng(10)
    worst = 0.0
    n = 0
    while n < 100:
        M = CURVED[n % 4]
        k = int(rng.integers(1, M.dim + 1))
        c = M.random_point(rng)
        pts = np.array([M.exp(c, M.random_tangent(c, rng, scale=0.4 / np.sqrt(M.dim))) for _ in range(k + 1)])
        ref = ReferenceConfiguration(M, pts)
        lam = rng.dirichlet(np.ones(k + 1))
        x = weighted_frechet_mean(ref, lam)
        d = M.dist(x, pts)
        if d.min() < 1e-3:
            continue
        for p in (1.0, 3.0):
            # p-variance weights whose reweighted barycentric weights are lam
            grad, lam_prime = p_variance_gradient(ref, x, lam / d ** (p - 2), p)
            assert np.allclose(normalize_weights(lam_prime), lam, atol=1e-12)
            worst = max(worst, M.norm(x, grad))
        n += 1
    print(f"AC10 max gradient norm {worst:.2e}")
    assert worst <= 1e-8
