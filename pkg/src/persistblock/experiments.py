"""End-to-end experiment pipelines with manifest and CSV artifacts.

Every experiment is a pure function of its config: the manifest written next
to the results is enough to re-run it bit-identically (cost-bench timings are
the one exception, since wall-clock is not a function of the config; its
input diagrams still are).
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

from .baseline import PIConfig, cost_benchmark, default_sigma, persistence_image
from .block import default_config
from .cpd import cpd_error, e_divisive
from .datagen import SHAPE_KINDS, LTMSpec, ShapeSpec, ltm_orbit, rng_for, sample_shape
from .diagram import Diagram, bounding_domain
from .homology import rips_h1
from .learn import (clustering_accuracy, k_medoids, knn_classify,
                    retrieval_stats, select_tau)
from .metrics import pairwise_matrix
from .vectorize import default_grid, vpb

__all__ = ["ExperimentConfig", "run_experiment", "EXPERIMENTS", "LTM_R_VALUES"]

LTM_R_VALUES = (2.0, 3.5, 4.0, 4.1, 4.3)
TAU_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)
EXPERIMENTS = ("six-shapes", "retrieval", "ltm-classify", "ltm-cpd",
               "cost-bench", "sensitivity")

# Dataset sizes per scale.  Desk keeps a full run within minutes on one core;
# paper restores the full-size datasets (slow).
SCALES = {
    "desk": {"clouds_per_shape": 10, "shape_points": 100,
             "orbits_per_r": 10, "orbit_length": 150,
             "cpd_steps_per_regime": 30, "cpd_orbit_length": 200,
             "bench_sizes": (1000, 2000), "bench_diagrams": 20},
    "paper": {"clouds_per_shape": 25, "shape_points": 500,
              "orbits_per_r": 100, "orbit_length": 1000,
              "cpd_steps_per_regime": 50, "cpd_orbit_length": 1000,
              "bench_sizes": (1000, 2000, 3000, 4000, 5000),
              "bench_diagrams": 100},
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    scale: str = "desk"
    seed: int = 0
    out_dir: str = "."
    method: str = "vpb"  # "vpb", "pi", or "both"
    tau_grid: tuple[float, ...] = TAU_GRID
    grid_size: int = 8
    norm: str = "L2"
    noise_eta: float = 0.05
    dim: int = 1
    cap: float | None = None  # None: 0.6 for shape corpora, 0.45 for orbits
    tau: float = 0.5  # fixed tau where no selection happens (cpd, classify)
    weight: str = "constant"  # block weight for the feature pipeline
    normalize: bool = True  # scale feature vectors to unit L2 length
    filter_atypical: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; "
                             f"choose one of {', '.join(EXPERIMENTS)}")
        if self.scale not in SCALES:
            raise ValueError(f"unknown scale {self.scale!r}")
        if self.method not in ("vpb", "pi", "both"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.dim not in (0, 1):
            raise ValueError("dim must be 0 or 1")
        if self.grid_size < 1:
            raise ValueError("grid_size must be positive")

    @property
    def sizes(self) -> dict:
        return SCALES[self.scale]


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def _write_manifest(cfg: ExperimentConfig, out: Path, extra: dict | None = None) -> None:
    try:
        version = metadata.version("persistblock")
    except metadata.PackageNotFoundError:
        version = "unknown"
    doc = {"config": asdict(cfg), "version": version}
    if extra:
        doc.update(extra)
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


def _child_seed(seed: int, index: int) -> int:
    """Stable per-item seed derived from (global seed, item index)."""
    return int(np.random.SeedSequence((int(seed), int(index))).generate_state(1)[0])


def _shape_corpus(cfg: ExperimentConfig):
    """Clouds and labels for the six-shapes dataset at the configured scale."""
    sizes = cfg.sizes
    clouds, labels = [], []
    idx = 0
    for kind in SHAPE_KINDS:
        for _ in range(sizes["clouds_per_shape"]):
            spec = ShapeSpec(kind, sizes["shape_points"], cfg.noise_eta,
                             seed=_child_seed(cfg.seed, idx))
            clouds.append(sample_shape(spec))
            labels.append(kind)
            idx += 1
    return clouds, labels


SHAPE_CAP = 0.6
ORBIT_CAP = 0.45


def _cap(cfg: ExperimentConfig, default: float) -> float:
    return default if cfg.cap is None else cfg.cap


def _diagrams(clouds, cfg: ExperimentConfig, default_cap: float = SHAPE_CAP) -> list[Diagram]:
    from .homology import rips_h0
    cap = _cap(cfg, default_cap)
    if cfg.dim == 0:
        return [rips_h0(c, cap, essential="cap") for c in clouds]
    return [rips_h1(c, cap, essential="cap") for c in clouds]


def _nonempty_domain(diagrams):
    return bounding_domain(diagrams, margin=0.01)


def _vpb_features(diagrams, tau: float, cfg: ExperimentConfig):
    from .block import BlockConfig, LengthFunction, WeightFunction
    domain = _nonempty_domain(diagrams)
    if cfg.weight == "constant":
        weight = WeightFunction("constant", c=1.0)
    else:
        weight = WeightFunction(cfg.weight)
    block = BlockConfig(LengthFunction(tau=tau, pers_max=domain.pers_max),
                        weight, domain)
    grid = default_grid(domain, tau, cfg.grid_size, cfg.grid_size)
    feats = [vpb(block, grid, d) for d in diagrams]
    if cfg.normalize:
        feats = [_unit(f) for f in feats]
    return feats


def _unit(f):
    from .vectorize import FeatureVector
    norm = float(np.linalg.norm(f.values))
    if norm <= 0:
        return f
    return FeatureVector(f.values / norm, f.provenance)


def _pi_features(diagrams, cfg: ExperimentConfig):
    domain = _nonempty_domain(diagrams)
    grid = default_grid(domain, 0.5, cfg.grid_size, cfg.grid_size)
    sigma = default_sigma(diagrams, cfg.grid_size)
    pic = PIConfig(sigma=sigma, grid=grid, weighting="linear",
                   pers_max=domain.pers_max)
    feats = [persistence_image(pic, d) for d in diagrams]
    if cfg.normalize:
        feats = [_unit(f) for f in feats]
    return feats


def _methods(cfg: ExperimentConfig):
    return ("vpb", "pi") if cfg.method == "both" else (cfg.method,)


def _clustering_run(diagrams, labels, method: str, cfg: ExperimentConfig):
    """Tau selection by Davies-Bouldin, then k-medoids accuracy."""
    k = len(set(labels))
    if method == "vpb":
        def pipeline(tau):
            feats = _vpb_features(diagrams, tau, cfg)
            return pairwise_matrix(feats, cfg.norm, labels=labels)
        tau, db_rows = select_tau(cfg.tau_grid, pipeline, k, seed=cfg.seed)
        M = pipeline(tau)
    else:
        feats = _pi_features(diagrams, cfg)
        M = pairwise_matrix(feats, cfg.norm, labels=labels)
        tau, db_rows = None, []
    result = k_medoids(M, k, seed=cfg.seed)
    acc = clustering_accuracy(result, labels)
    return {"tau": tau, "db_rows": db_rows, "accuracy": acc, "matrix": M}


def six_shapes(cfg: ExperimentConfig, out: Path) -> dict:
    clouds, labels = _shape_corpus(cfg)
    diagrams = _diagrams(clouds, cfg)
    rows, db_rows = [], []
    summary = {}
    for method in _methods(cfg):
        run = _clustering_run(diagrams, labels, method, cfg)
        rows.append((cfg.norm, cfg.dim, cfg.noise_eta, method, run["accuracy"]))
        for r in run["db_rows"]:
            db_rows.append((method, r["tau"], r["db"]))
        summary[method] = {"accuracy": run["accuracy"], "tau": run["tau"]}
    _write_csv(out / "results.csv",
               ["metric", "dim", "noise", "method", "accuracy"], rows)
    if db_rows:
        _write_csv(out / "tau_table.csv", ["method", "tau", "db"], db_rows)
    return summary


def retrieval(cfg: ExperimentConfig, out: Path) -> dict:
    clouds, labels = _shape_corpus(cfg)
    diagrams = _diagrams(clouds, cfg)
    rows = []
    summary = {}
    for method in _methods(cfg):
        if method == "vpb":
            feats = _vpb_features(diagrams, cfg.tau, cfg)
        else:
            feats = _pi_features(diagrams, cfg)
        M = pairwise_matrix(feats, cfg.norm, labels=labels)
        stats = retrieval_stats(M, labels)
        rows.append((method, stats["NN"], stats["FT"], stats["ST"],
                     stats["E"], stats["DCG"]))
        summary[method] = stats
    _write_csv(out / "retrieval.csv", ["method", "NN", "FT", "ST", "E", "DCG"], rows)
    return summary


def _ltm_corpus(cfg: ExperimentConfig, per_r: int, length: int):
    """Orbits and r-labels; initial points drawn per orbit from seeded streams."""
    clouds, labels = [], []
    idx = 0
    for r in LTM_R_VALUES:
        for _ in range(per_r):
            rng = rng_for(cfg.seed, idx)
            x0, y0 = rng.random(2)
            clouds.append(ltm_orbit(LTMSpec(r, float(x0), float(y0), length)))
            labels.append(f"r={r}")
            idx += 1
    return clouds, labels


def _mad_filter(diagrams, labels):
    """Drop orbits whose total persistence strays > 3 MAD from the class median."""
    totals = np.array([float(d.persistences.sum()) for d in diagrams])
    keep = np.ones(len(diagrams), dtype=bool)
    for lab in set(labels):
        members = np.array([i for i, l in enumerate(labels) if l == lab])
        med = np.median(totals[members])
        mad = np.median(np.abs(totals[members] - med))
        if mad > 0:
            keep[members] &= np.abs(totals[members] - med) <= 3 * mad
    return keep


def ltm_classify(cfg: ExperimentConfig, out: Path) -> dict:
    sizes = cfg.sizes
    clouds, labels = _ltm_corpus(cfg, sizes["orbits_per_r"], sizes["orbit_length"])
    diagrams = _diagrams(clouds, cfg, ORBIT_CAP)
    if cfg.filter_atypical:
        keep = _mad_filter(diagrams, labels)
        diagrams = [d for d, k in zip(diagrams, keep) if k]
        labels = [l for l, k in zip(labels, keep) if k]
    feats = _vpb_features(diagrams, cfg.tau, cfg)
    # alternating split keeps classes balanced across train and test
    train = [i for i in range(len(feats)) if i % 2 == 0]
    test = [i for i in range(len(feats)) if i % 2 == 1]
    X = np.stack([f.values for f in feats])
    block = np.linalg.norm(X[test][:, None, :] - X[train][None, :, :], axis=2)
    predicted = knn_classify(block, [labels[i] for i in train], k=1)
    truth = [labels[i] for i in test]
    acc = float(np.mean([p == t for p, t in zip(predicted, truth)]))
    _write_csv(out / "classify.csv", ["method", "dim", "accuracy"],
               [("vpb", cfg.dim, acc)])
    return {"accuracy": acc, "n_train": len(train), "n_test": len(test)}


def ltm_cpd(cfg: ExperimentConfig, out: Path) -> dict:
    sizes = cfg.sizes
    per = sizes["cpd_steps_per_regime"]
    clouds, _ = _ltm_corpus(cfg, per, sizes["cpd_orbit_length"])
    diagrams = _diagrams(clouds, cfg, ORBIT_CAP)
    feats = _vpb_features(diagrams, cfg.tau, cfg)
    X = np.stack([f.values for f in feats])
    result = e_divisive(X, min_seg=5, R=199, sig=0.05, alpha=1.0, seed=cfg.seed)
    truth = [per * i + 1 for i in range(1, len(LTM_R_VALUES))]
    errors = cpd_error(result.change_points, truth, gap=50.0)
    doc = {"change_points": list(result.change_points),
           "p_values": list(result.p_values),
           "truth": truth, "errors": errors,
           "config": {"min_seg": 5, "R": 199, "sig": 0.05, "alpha": 1.0,
                      "seed": cfg.seed}}
    with open(out / "cpd.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
    _write_csv(out / "errors.csv", ["truth", "error"],
               list(zip(truth, errors)))
    return doc


def cost_bench(cfg: ExperimentConfig, out: Path) -> dict:
    sizes = cfg.sizes
    domain = bounding_domain([Diagram([[1.0, 1.0]], dim=1)])  # beta support is [0,1]^2
    block = default_config(domain, tau=cfg.tau)
    grid = default_grid(domain, cfg.tau, 10, 10)
    rows = cost_benchmark(sizes["bench_sizes"], block, grid,
                          n_diagrams=sizes["bench_diagrams"], seed=cfg.seed)
    flat = []
    for r in rows:
        flat.append((r["size"], "vpb", r["vpb_seconds"]))
        flat.append((r["size"], "pi", r["pi_seconds"]))
    _write_csv(out / "cost.csv", ["n", "method", "seconds"], flat)
    return {"rows": rows}


def sensitivity(cfg: ExperimentConfig, out: Path) -> dict:
    """Clustering accuracy as tau and the grid size vary, all else fixed."""
    clouds, labels = _shape_corpus(cfg)
    diagrams = _diagrams(clouds, cfg)
    k = len(set(labels))
    rows = []
    for tau in cfg.tau_grid:
        feats = _vpb_features(diagrams, tau, cfg)
        M = pairwise_matrix(feats, cfg.norm, labels=labels)
        acc = clustering_accuracy(k_medoids(M, k, seed=cfg.seed), labels)
        rows.append(("tau", tau, acc))
    saved = cfg.grid_size
    for gs in (5, 10, 20, 40):
        cfg_gs = ExperimentConfig(**{**asdict(cfg), "grid_size": gs})
        feats = _vpb_features(diagrams, cfg.tau, cfg_gs)
        M = pairwise_matrix(feats, cfg.norm, labels=labels)
        acc = clustering_accuracy(k_medoids(M, k, seed=cfg.seed), labels)
        rows.append(("grid_size", float(gs), acc))
    _write_csv(out / "sensitivity.csv", ["parameter", "value", "accuracy"], rows)
    return {"rows": rows, "grid_size": saved}


_RUNNERS = {
    "six-shapes": six_shapes,
    "retrieval": retrieval,
    "ltm-classify": ltm_classify,
    "ltm-cpd": ltm_cpd,
    "cost-bench": cost_bench,
    "sensitivity": sensitivity,
}


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run one experiment; write manifest.json plus result CSVs to out_dir."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = _RUNNERS[cfg.experiment](cfg, out)
    _write_manifest(cfg, out, extra={
        "deterministic": cfg.experiment != "cost-bench"})
    return summary
