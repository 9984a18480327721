"""Command line interface: ``barysub <command> ...``.

Exit codes: 0 success, 2 invalid input, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .barycentric import HESS_RTOL, ReferenceConfiguration
from .datasets import (
    LOAD_TOL,
    generate_equi,
    load_dataset,
    load_triangle_data,
    make_manifold,
    save_dataset,
)
from .errors import BarySubError, NonConvergenceError
from .experiments import HYPERBOLIC_CONFIGS, METHODS, SPHERE_CONFIGS, preset_configuration, run_analysis, signature_map

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGENCE = 0, 2, 3


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _header_lines(config):
    return "".join(f"# {k}: {v}\n" for k, v in config.items())


def _prefix(out):
    p = Path(out)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p.with_suffix("") if p.suffix in (".json", ".csv", ".png") else p


def cmd_generate(args):
    ds = generate_equi(args.n_points, args.ambient_dim, sigma_deg=args.sigma_deg, seed=args.seed)
    ds.meta["generated_by"] = f"barysub {__version__} generate equi"
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, args.out)
    print(f"wrote {len(ds)} points on S^{args.ambient_dim - 1} to {args.out}")


def cmd_ingest(args):
    ds = load_triangle_data(args.input)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, args.out)
    print(f"wrote {len(ds)} triangle shapes to {args.out}")


def _write_analysis(res, out):
    from .plotting import plot_level_curve

    prefix = _prefix(out)
    _write_json(prefix.with_suffix(".json"), res.to_dict())
    csv = _header_lines(res.config) + "level,unexplained_variance\n"
    csv += "".join(f"{i},{v:.17g}\n" for i, v in enumerate(res.per_level_unexplained_variance))
    Path(f"{prefix}_levels.csv").write_text(csv)
    plot_level_curve(res, f"{prefix}_levels.png")
    print(f"{res.method} k={res.k} reference={res.reference_indices} AUV={res.auv:.10g}")
    print(f"wrote {prefix}.json, {prefix}_levels.csv, {prefix}_levels.png")


def cmd_analyze(args):
    ds = load_dataset(args.dataset, tol=args.tol)
    if args.manifold and args.manifold != ds.kind:
        raise ValueError(f"dataset is on the {ds.kind}, not the {args.manifold}")
    res = run_analysis(ds, args.method, args.k, budget=args.budget, seed=args.seed, config=_config(args))
    _write_analysis(res, args.out)


def cmd_pca_flag(args):
    ds = load_dataset(args.dataset, tol=args.tol)
    res = run_analysis(ds, "pca-flag", args.k, config=_config(args))
    _write_analysis(res, args.out)
    print(f"closed-form AUV={res.extras['auv_closed_form']:.10g}")


def _parse_points(text, kind):
    rows = [[float(v) for v in r.split(",")] for r in text.split(";") if r.strip()]
    pts = np.array(rows)
    if kind == "hyperbolic" and pts.shape[1] == 2:
        from .hyperbolic import from_weierstrass

        pts = from_weierstrass(pts)
    elif kind == "sphere":
        pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    return ReferenceConfiguration(make_manifold(kind, 3), pts)


def cmd_signature(args):
    from .plotting import plot_signature_map

    if args.refs:
        ref = _parse_points(args.refs, args.manifold)
    else:
        if args.config is None:
            args.config = sorted(SPHERE_CONFIGS if args.manifold == "sphere" else HYPERBOLIC_CONFIGS)[0]
        ref = preset_configuration(args.config)
        if ref.manifold.kind != args.manifold:
            raise ValueError(f"configuration {args.config!r} is on the {ref.manifold.kind}")
    smap = signature_map(ref, rtol=args.tol)
    config = _config(args)
    prefix = _prefix(args.out)
    Path(f"{prefix}.csv").write_text(smap.to_csv(config))
    plot_signature_map(smap, f"{prefix}.png")
    summary = {
        "config": config,
        "reference_points": ref.points.tolist(),
        "grid_shape": list(smap.shape),
        "counts": smap.counts(),
        "distinct_indices": smap.distinct_indices(),
        "localmin_components": smap.localmin_components(),
    }
    _write_json(f"{prefix}.json", summary)
    print(f"indices {summary['distinct_indices']}, {summary['localmin_components']} LocalMin region(s)")
    print(f"wrote {prefix}.csv, {prefix}.png, {prefix}.json")


def build_parser():
    p = argparse.ArgumentParser(prog="barysub", description="Barycentric subspace analysis on spheres and hyperbolic spaces.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="simulate a dataset")
    g.add_argument("kind", choices=["equi"])
    g.add_argument("--n-points", type=int, default=30)
    g.add_argument("--ambient-dim", type=int, default=6)
    g.add_argument("--sigma-deg", type=float, default=10.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    i = sub.add_parser("ingest", help="convert external data to a dataset file")
    i.add_argument("kind", choices=["triads"])
    i.add_argument("input", help="CSV of planar triads x1,y1,x2,y2,x3,y3")
    i.add_argument("--out", required=True)
    i.set_defaults(func=cmd_ingest)

    a = sub.add_parser("analyze", help="FBS, k-PBS, k-BSA or PCA flag on a dataset")
    a.add_argument("dataset")
    a.add_argument("--method", choices=METHODS, default="bsa")
    a.add_argument("--manifold", choices=["sphere", "hyperbolic", "euclidean"])
    a.add_argument("--k", type=int, default=2)
    a.add_argument("--budget", type=int, default=None, help="max tuples to evaluate (default: exhaustive)")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--tol", type=float, default=LOAD_TOL, help="constraint tolerance when loading")
    a.add_argument("--out", required=True, help="output prefix")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("signature", help="index map of the weighted Hessian for 3 reference points")
    s.add_argument("--manifold", choices=["sphere", "hyperbolic"], default="sphere")
    presets = sorted(SPHERE_CONFIGS) + sorted(HYPERBOLIC_CONFIGS)
    s.add_argument("--config", choices=presets, help="preset triple (default: first preset for --manifold)")
    s.add_argument("--refs", help="explicit points 'a,b,c;d,e,f;...' (Weierstrass pairs allowed on H^2)")
    s.add_argument("--tol", type=float, default=HESS_RTOL, help="relative eigenvalue tolerance")
    s.add_argument("--out", required=True, help="output prefix")
    s.set_defaults(func=cmd_signature)

    c = sub.add_parser("pca-flag", help="Euclidean PCA flag AUV by direct sum and closed form")
    c.add_argument("dataset")
    c.add_argument("--k", type=int, default=2)
    c.add_argument("--tol", type=float, default=LOAD_TOL)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_pca_flag)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (BarySubError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
