import numpy as np
import pytest

from barysub.datasets import (
    Dataset,
    dumps_dataset,
    generate_equi,
    injected_noise_variance,
    load_dataset,
    load_triangle_data,
    loads_dataset,
    make_manifold,
    save_dataset,
    synthetic_triads_text,
)
from barysub.errors import ValidationError
from barysub.hyperbolic import Hyperbolic
from barysub.sphere import Sphere


def test_make_manifold():
    assert make_manifold("sphere", 6) == Sphere(5)
    assert make_manifold("hyperbolic", 3) == Hyperbolic(2)
    with pytest.raises(ValueError):
        make_manifold("torus", 3)


def test_round_trip_is_bit_stable(tmp_path):
    ds = generate_equi(n_points=10, seed=4)
    path = tmp_path / "equi.csv"
    save_dataset(ds, path)
    back = load_dataset(path)
    assert np.array_equal(back.points, ds.points)
    assert back.kind == "sphere" and back.meta["seed"] == "4"
    save_dataset(back, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_text() == path.read_text()


def test_loader_rejects_off_manifold_rows_with_line_numbers():
    text = "# manifold: sphere\n1,0,0\n0,1,0\n0.6,0.8001,0\n0,0,1\n"
    with pytest.raises(ValidationError, match=r"line\(s\) \[4\]"):
        loads_dataset(text)
    loads_dataset(text, tol=1e-3)


def test_loader_rejects_malformed_files():
    with pytest.raises(ValidationError, match="manifold"):
        loads_dataset("1,0,0\n")
    with pytest.raises(ValidationError, match=":3"):
        loads_dataset("# manifold: sphere\n1,0,0\nx,0,0\n")
    with pytest.raises(ValidationError, match="columns"):
        loads_dataset("# manifold: euclidean\n1,0,0\n1,2\n")
    with pytest.raises(ValidationError, match="ambient_dim"):
        loads_dataset("# manifold: euclidean\n# ambient_dim: 4\n1,0,0\n")
    with pytest.raises(ValidationError, match="no data"):
        loads_dataset("# manifold: euclidean\n")


def test_hyperbolic_rows_on_lower_sheet_rejected():
    ds = Dataset("hyperbolic", -Hyperbolic(2).random_point(np.random.default_rng(0), size=3))
    with pytest.raises(ValidationError):
        loads_dataset(dumps_dataset(ds))


# -- Equi ---------------------------------------------------------------------------------


def test_equi_noise_free_lies_on_the_subsphere():
    ds = generate_equi(sigma_deg=0.0, seed=1)
    assert ds.points.shape == (30, 6)
    assert np.abs(ds.points[:, 3:]).max() < 1e-12
    assert np.allclose(np.linalg.norm(ds.points, axis=1), 1)


def test_equi_is_deterministic_per_seed():
    assert np.array_equal(generate_equi(seed=5).points, generate_equi(seed=5).points)
    assert not np.array_equal(generate_equi(seed=5).points, generate_equi(seed=6).points)


def test_equi_ambient_dim_override():
    ds = generate_equi(n_points=5, ambient_dim=7, seed=0)
    assert ds.points.shape == (5, 7) and ds.manifold == Sphere(6)
    with pytest.raises(ValueError):
        generate_equi(ambient_dim=2)


def test_injected_noise_variance():
    assert injected_noise_variance(6) == pytest.approx(3 * np.deg2rad(10) ** 2)


# -- triads ---------------------------------------------------------------------------------


def test_triads_congruent_records_coincide_and_equilateral_is_a_pole():
    h = np.sqrt(3) / 2
    text = f"0,0,1,0,0.5,{h}\n10,10,12,10,11,{10 + 2 * h}\n0,0,3,1,-1,4\n"
    ds = load_triangle_data(text=text)
    assert np.allclose(ds.points[0], ds.points[1], atol=1e-12)
    assert np.allclose(np.abs(ds.points[0]), [0, 0, 1], atol=1e-12)
    assert ds.meta["scale"] == "kendall x2"


def test_triads_errors_carry_line_numbers():
    with pytest.raises(ValidationError, match=":2"):
        load_triangle_data(text="0,0,1,0,0,1\n1,2,3\n")
    with pytest.raises(ValidationError, match=":1"):
        load_triangle_data(text="1,1,1,1,1,1\n")


def test_bundled_synthetic_triads(tmp_path):
    text = synthetic_triads_text()
    assert "SYNTHETIC" in text
    ds = load_triangle_data(text=text)
    assert len(ds) == 40
    save_dataset(ds, tmp_path / "t.csv")
    assert np.array_equal(load_dataset(tmp_path / "t.csv").points, ds.points)
