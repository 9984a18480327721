"""Point datasets: CSV storage, the Equi simulation and triangle-shape ingestion."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .hyperbolic import Hyperbolic
from .manifold import Euclidean
from .sphere import (
    KENDALL_RADIUS,
    Sphere,
    equilateral_triangle,
    kendall_shape_of_triangle,
    uniform_triangle_sample,
    wrapped_gaussian_sample,
)

#: Rows whose manifold constraint is violated by more than this are rejected on load.
LOAD_TOL = 1e-9

MANIFOLD_KINDS = ("sphere", "hyperbolic", "euclidean")


def make_manifold(kind, ambient_dim):
    """Manifold of the given kind embedded in ``R^ambient_dim``."""
    ambient_dim = int(ambient_dim)
    if kind == "sphere":
        return Sphere(ambient_dim - 1)
    if kind == "hyperbolic":
        return Hyperbolic(ambient_dim - 1)
    if kind == "euclidean":
        return Euclidean(ambient_dim)
    raise ValueError(f"unknown manifold kind {kind!r}")


@dataclass
class Dataset:
    kind: str
    points: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def ambient_dim(self):
        return self.points.shape[1]

    @property
    def manifold(self):
        return make_manifold(self.kind, self.ambient_dim)

    def __len__(self):
        return self.points.shape[0]


def dumps_dataset(ds: Dataset) -> str:
    buf = io.StringIO()
    buf.write(f"# manifold: {ds.kind}\n")
    buf.write(f"# ambient_dim: {ds.ambient_dim}\n")
    for key in sorted(ds.meta):
        buf.write(f"# {key}: {ds.meta[key]}\n")
    for row in ds.points:
        buf.write(",".join(format(float(v), ".17g") for v in row) + "\n")
    return buf.getvalue()


def save_dataset(ds: Dataset, path):
    Path(path).write_text(dumps_dataset(ds))


def loads_dataset(text: str, tol=LOAD_TOL, source="<string>") -> Dataset:
    header, rows, linenos = {}, [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            key, sep, val = s[1:].partition(":")
            if sep:
                header[key.strip()] = val.strip()
            continue
        try:
            rows.append([float(v) for v in s.split(",")])
        except ValueError:
            raise ValidationError(f"{source}:{lineno}: non-numeric value") from None
        linenos.append(lineno)

    kind = header.pop("manifold", None)
    if kind not in MANIFOLD_KINDS:
        raise ValidationError(f"{source}: header must declare '# manifold:' as one of {MANIFOLD_KINDS}")
    if not rows:
        raise ValidationError(f"{source}: no data rows")
    width = len(rows[0])
    declared = header.pop("ambient_dim", None)
    if declared is not None and int(declared) != width:
        raise ValidationError(f"{source}: ambient_dim {declared} but rows have {width} values")
    bad = [n for n, r in zip(linenos, rows) if len(r) != width]
    if bad:
        raise ValidationError(f"{source}: wrong number of columns on line(s) {bad}")
    pts = np.array(rows)
    M = make_manifold(kind, width)
    viol = np.atleast_1d(M.constraint_violation(pts))
    off = [n for n, v in zip(linenos, viol) if not v <= tol]
    if off:
        raise ValidationError(f"{source}: rows off the {kind} (violation > {tol:g}) on line(s) {off}")
    return Dataset(kind, pts, header)


def load_dataset(path, tol=LOAD_TOL) -> Dataset:
    return loads_dataset(Path(path).read_text(), tol=tol, source=str(path))


# -- Equi: noisy samples of an equilateral spherical triangle ---------------------


def generate_equi(n_points=30, ambient_dim=6, side=np.pi / 2, sigma_deg=10.0, seed=0) -> Dataset:
    """Uniform samples of an equilateral triangle on the first three coordinates plus tangent noise.

    The triangle has geodesic side ``side``; each sample is perturbed by a
    wrapped isotropic Gaussian of per-coordinate deviation ``sigma_deg`` degrees.
    """
    if ambient_dim < 3:
        raise ValueError("ambient_dim must be >= 3")
    rng = np.random.default_rng(seed)
    a, b, c = equilateral_triangle(side, ambient_dim)
    sigma = np.deg2rad(sigma_deg)
    pts = np.empty((n_points, ambient_dim))
    for i in range(n_points):
        p = uniform_triangle_sample(a, b, c, rng)
        pts[i] = wrapped_gaussian_sample(p, sigma, rng)
    meta = {
        "source": "equi",
        "n_points": n_points,
        "side": repr(float(side)),
        "sigma_deg": repr(float(sigma_deg)),
        "seed": seed,
    }
    return Dataset("sphere", pts, meta)


def injected_noise_variance(ambient_dim, sigma_deg=10.0):
    """Expected squared distance of the noise to the triangle's 2-subsphere, small-noise limit."""
    return (ambient_dim - 3) * np.deg2rad(sigma_deg) ** 2


# -- planar triads -> Kendall shape sphere --------------------------------------


def parse_triads(text: str, source="<string>"):
    """Records of three planar landmarks ``x1,y1,x2,y2,x3,y3`` (one per line, '#' comments)."""
    out = []
    reader = csv.reader(io.StringIO(text))
    for lineno, row in enumerate(reader, start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        if len(row) != 6:
            raise ValidationError(f"{source}:{lineno}: expected 6 values, got {len(row)}")
        try:
            vals = [float(v) for v in row]
        except ValueError:
            raise ValidationError(f"{source}:{lineno}: non-numeric value") from None
        out.append((lineno, np.array(vals).reshape(3, 2)))
    if not out:
        raise ValidationError(f"{source}: no triad records")
    return out


def load_triangle_data(path=None, text=None) -> Dataset:
    """Kendall shapes of planar triads as points of the unit 2-sphere.

    Shapes live on a sphere of radius 1/2; coordinates are rescaled by 2 and
    the factor is recorded in the metadata.
    """
    if text is None:
        text = Path(path).read_text()
    source = str(path) if path is not None else "<string>"
    recs = parse_triads(text, source)
    pts = []
    for lineno, tri in recs:
        try:
            pts.append(kendall_shape_of_triangle(*tri))
        except ValueError as exc:
            raise ValidationError(f"{source}:{lineno}: {exc}") from None
    meta = {"source": Path(source).name, "scale": f"kendall x{1 / KENDALL_RADIUS:g}"}
    return Dataset("sphere", np.array(pts), meta)


def synthetic_triads_text() -> str:
    """Bundled synthetic triad file (not measured data)."""
    return resources.files("barysub").joinpath("data/synthetic_triads.csv").read_text()
