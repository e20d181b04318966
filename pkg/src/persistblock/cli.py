"""Command-line entry points: one verb per pipeline stage plus `run`.

Every subcommand exits nonzero on error with diagnostics on stderr; stdout
carries only data when --stdout is set.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .baseline import PIConfig, persistence_image
from .block import default_config
from .cpd import e_divisive
from .datagen import LTMSpec, ShapeSpec, ltm_orbit, sample_shape
from .diagram import (Diagram, DiagramError, bounding_domain, parse_diagrams,
                      write_diagrams)
from .experiments import EXPERIMENTS, ExperimentConfig, run_experiment
from .homology import rips_diagrams
from .learn import davies_bouldin, k_medoids, knn_classify, retrieval_stats
from .metrics import DissimilarityMatrix, pairwise_matrix, wasserstein
from .vectorize import GridPartition, default_grid, vpb

__all__ = ["main"]


def _read_cloud(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty point-cloud file")
    header = [c.strip().lower() for c in rows[0]]
    if header not in (["x", "y"], ["x", "y", "z"]):
        raise ValueError(f"{path}: expected header x,y[,z]")
    return np.array([[float(c) for c in row] for row in rows[1:] if row])


def _write_cloud(path, pts: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z"][: pts.shape[1]])
        for row in pts:
            writer.writerow([repr(float(v)) for v in row])


def _grid_arg(text: str) -> tuple[int, int]:
    try:
        nx, ny = text.lower().split("x")
        return int(nx), int(ny)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 20x20, got {text!r}")


def _load_single_diagram(path, dim: int) -> Diagram:
    diagrams = parse_diagrams(path)
    if dim in diagrams:
        return diagrams[dim]
    return Diagram(np.empty((0, 2)), dim=dim)


def _emit(args, payload: str) -> None:
    if getattr(args, "stdout", False):
        sys.stdout.write(payload)
    elif getattr(args, "out", None):
        Path(args.out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)


def _vector_csv(values) -> str:
    return "\n".join(repr(float(v)) for v in values) + "\n"


def cmd_gen(args) -> int:
    if args.kind == "ltm":
        spec = LTMSpec(args.r, args.x0, args.y0, args.length)
        pts = ltm_orbit(spec)
    else:
        spec = ShapeSpec(args.kind, args.n, args.eta, args.seed)
        pts = sample_shape(spec)
    _write_cloud(args.out, pts)
    return 0


def cmd_ph(args) -> int:
    pts = _read_cloud(args.infile)
    diagrams = rips_diagrams(pts, args.cap, essential=args.essential)
    write_diagrams(args.out, diagrams)
    return 0


def _grid_and_config(args, diagram: Diagram):
    if len(diagram) == 0:
        raise ValueError("cannot size a grid from an empty diagram")
    domain = bounding_domain([diagram], margin=0.01)
    cfg = default_config(domain, tau=args.tau)
    nx, ny = args.grid
    grid = default_grid(domain, args.tau, nx, ny)
    return cfg, grid


def cmd_vpb(args) -> int:
    diagram = _load_single_diagram(args.infile, args.dim)
    cfg, grid = _grid_and_config(args, diagram)
    vec = vpb(cfg, grid, diagram)
    _emit(args, _vector_csv(vec.values))
    return 0


def cmd_pi(args) -> int:
    diagram = _load_single_diagram(args.infile, args.dim)
    domain = bounding_domain([diagram], margin=0.01)
    nx, ny = args.grid
    grid = default_grid(domain, 0.5, nx, ny)
    pic = PIConfig(sigma=args.sigma, grid=grid, pers_max=domain.pers_max)
    vec = persistence_image(pic, diagram)
    _emit(args, _vector_csv(vec.values))
    return 0


def cmd_dist(args) -> int:
    d1 = _load_single_diagram(args.a, args.dim)
    d2 = _load_single_diagram(args.b, args.dim)
    result = wasserstein(d1, d2, args.p)
    _emit(args, repr(result.cost) + "\n")
    return 0


def cmd_cluster(args) -> int:
    M = DissimilarityMatrix.from_csv(args.infile)
    result = k_medoids(M, args.k, seed=args.seed)
    doc = {"medoids": list(result.medoids),
           "assignment": result.assignment.tolist(),
           "cost": result.cost}
    if args.k >= 2:
        doc["davies_bouldin"] = davies_bouldin(M, result)
    _emit(args, json.dumps(doc, sort_keys=True) + "\n")
    return 0


def cmd_retrieve(args) -> int:
    M = DissimilarityMatrix.from_csv(args.infile)
    labels = Path(args.labels).read_text(encoding="utf-8").split()
    stats = retrieval_stats(M, labels)
    _emit(args, json.dumps(stats, sort_keys=True) + "\n")
    return 0


def cmd_classify(args) -> int:
    block = np.loadtxt(args.infile, delimiter=",", ndmin=2)
    labels = Path(args.labels).read_text(encoding="utf-8").split()
    predicted = knn_classify(block, labels, k=args.k)
    _emit(args, "\n".join(predicted) + "\n")
    return 0


def cmd_cpd(args) -> int:
    X = np.loadtxt(args.infile, delimiter=",", ndmin=2)
    result = e_divisive(X, min_seg=args.min_seg, R=args.permutations,
                        sig=args.sig, alpha=args.alpha, seed=args.seed)
    doc = {"change_points": list(result.change_points),
           "p_values": list(result.p_values),
           "config": {"min_seg": args.min_seg, "R": args.permutations,
                      "sig": args.sig, "alpha": args.alpha, "seed": args.seed}}
    _emit(args, json.dumps(doc, sort_keys=True) + "\n")
    return 0


def cmd_bench(args) -> int:
    cfg = ExperimentConfig("cost-bench", scale=args.scale, seed=args.seed,
                           out_dir=args.out_dir)
    summary = run_experiment(cfg)
    if args.stdout:
        sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return 0


def cmd_run(args) -> int:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
        doc.setdefault("experiment", args.experiment)
        if "tau_grid" in doc:
            doc["tau_grid"] = tuple(doc["tau_grid"])
        cfg = ExperimentConfig(**doc)
    else:
        cfg = ExperimentConfig(args.experiment, scale=args.scale, seed=args.seed,
                               out_dir=args.out_dir, method=args.method,
                               grid_size=args.grid_size, norm=args.norm,
                               noise_eta=args.eta, dim=args.dim,
                               filter_atypical=args.filter_atypical)
    summary = run_experiment(cfg)
    if args.stdout:
        sys.stdout.write(json.dumps(summary, sort_keys=True, default=str) + "\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="persistblock")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--seed", type=int, default=0)
        if out:
            p.add_argument("--out")
            p.add_argument("--stdout", action="store_true")

    p = sub.add_parser("gen", help="generate a point cloud CSV")
    p.add_argument("kind", choices=("cube", "circle", "sphere", "clusters3",
                                    "nested-clusters", "torus", "ltm"))
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--r", type=float, default=4.0)
    p.add_argument("--x0", type=float, default=0.1)
    p.add_argument("--y0", type=float, default=0.2)
    p.add_argument("--length", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("ph", help="Rips H0/H1 diagrams of a point cloud")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cap", type=float, default=0.45)
    p.add_argument("--essential", choices=("drop", "cap"), default="drop")
    p.set_defaults(func=cmd_ph)

    p = sub.add_parser("vpb", help="vectorize a diagram as a block vector")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--grid", type=_grid_arg, default=(20, 20))
    p.add_argument("--dim", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_vpb)

    p = sub.add_parser("pi", help="vectorize a diagram as a persistence image")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--grid", type=_grid_arg, default=(20, 20))
    p.add_argument("--dim", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_pi)

    p = sub.add_parser("dist", help="Wasserstein distance between two diagrams")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--dim", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("cluster", help="k-medoids on a dissimilarity matrix CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--k", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("retrieve", help="retrieval statistics of a matrix")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--labels", required=True)
    common(p)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("classify", help="1-NN labels from a test-by-train block")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--k", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("cpd", help="change-point detection on a feature CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--min-seg", dest="min_seg", type=int, default=5)
    p.add_argument("--permutations", type=int, default=199)
    p.add_argument("--sig", type=float, default=0.05)
    p.add_argument("--alpha", type=float, default=1.0)
    common(p)
    p.set_defaults(func=cmd_cpd)

    p = sub.add_parser("bench", help="VPB vs PI timing benchmark")
    p.add_argument("--scale", choices=("desk", "paper"), default="desk")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stdout", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("run", help="run a full experiment")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--scale", choices=("desk", "paper"), default="desk")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--method", choices=("vpb", "pi", "both"), default="vpb")
    p.add_argument("--grid-size", type=int, default=8)
    p.add_argument("--norm", choices=("L1", "L2", "Linf"), default="L2")
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--filter-atypical", action="store_true")
    p.add_argument("--config", help="JSON config file overriding the flags")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stdout", action="store_true")
    p.set_defaults(func=cmd_run)

    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DiagramError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
