import numpy as np
import pytest

from barysub.barycentric import LOCAL_MIN, ReferenceConfiguration, classify_ebs_point
from barysub.datasets import Dataset, generate_equi
from barysub.experiments import (
    HYPERBOLIC_CONFIGS,
    SPHERE_CONFIGS,
    SignatureMap,
    preset_configuration,
    run_analysis,
    signature_map,
    sphere_grid,
    variance_increases,
)
from barysub.sphere import Sphere


def test_sphere_grid_shape_and_norms():
    coords, pts = sphere_grid(20, 10)
    assert coords.shape == (10, 20, 2) and pts.shape == (10, 20, 3)
    assert np.allclose(np.linalg.norm(pts, axis=-1), 1)


def test_component_count_merges_wrap_and_poles():
    def fake(mask):
        cls = np.where(mask, LOCAL_MIN, "Saddle")
        z = np.zeros(mask.shape)
        return SignatureMap(None, z, z, z, z.astype(int), cls, True)

    m = np.zeros((6, 8), bool)
    m[2:4, 0] = m[2:4, 7] = True  # touches across the longitude seam
    assert fake(m).localmin_components() == 1
    m = np.zeros((6, 8), bool)
    m[0, 1] = m[0, 5] = True  # both touch the north pole
    assert fake(m).localmin_components() == 1
    m[3, 3] = True
    assert fake(m).localmin_components() == 2


def test_presets_are_independent():
    for name in list(SPHERE_CONFIGS) + list(HYPERBOLIC_CONFIGS):
        assert preset_configuration(name).is_affinely_independent
    with pytest.raises(KeyError):
        preset_configuration("nope")


def test_coarse_sphere_map_local_minima_pass_perturbation_test():
    ref = preset_configuration("s2-scalene")
    smap = signature_map(ref, grid=(60, 30))
    assert smap.distinct_indices() == [0, 1, 2]
    cells = np.argwhere(smap.classification == LOCAL_MIN)
    for r, c in cells[::5]:
        x = smap.points[r, c]
        assert variance_increases(ref, x, classify_ebs_point(ref, x).weights)


def test_reference_points_fall_in_local_min_cells():
    ref = preset_configuration("s2-cap")
    smap = signature_map(ref, grid=(60, 30))
    flat = smap.points.reshape(-1, 3)
    for p in ref.points:
        i = np.argmax(flat @ p)
        assert smap.classification.ravel()[i] == LOCAL_MIN


def test_signature_map_csv(tmp_path):
    smap = signature_map(preset_configuration("h2-compact"), grid=(10, 3.0))
    text = smap.to_csv({"manifold": "hyperbolic"})
    lines = text.splitlines()
    assert lines[0] == "# manifold: hyperbolic"
    assert lines[1].startswith("u,v,x0,x1,x2,s_min,index,class")
    assert len(lines) == 2 + 100


def test_signature_map_requires_three_points_on_a_surface():
    S = Sphere(3)
    with pytest.raises(ValueError):
        signature_map(ReferenceConfiguration(S, np.eye(4)[:3]))


def test_run_analysis_dispatch(rng):
    ds = generate_equi(n_points=8, seed=2)
    res = run_analysis(ds, "pbs", 1, seed=0, config={"dataset": "x"})
    assert res.method == "kPBS" and res.config["dataset"] == "x" and res.config["method"] == "pbs"
    with pytest.raises(ValueError):
        run_analysis(ds, "pca-flag", 1)
    with pytest.raises(ValueError):
        run_analysis(ds, "magic", 1)
    eu = Dataset("euclidean", rng.normal(size=(20, 4)))
    res = run_analysis(eu, "pca-flag", 2)
    assert res.auv == pytest.approx(res.extras["auv_closed_form"], rel=1e-10)
