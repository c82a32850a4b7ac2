"""Reproduction harness: seeded benchmark suites with MSE and timing stats.

A benchmark run is fully determined by its configuration: the scenario
instance, every direction sample and every method-specific random draw are
derived from the base seed through a keyed 64-bit hash, so no two cells
share a seed and reruns reproduce every estimate bit-exactly (wall times of
course vary).  Rows are emitted in canonical (method, n, replication) order.
"""
from __future__ import annotations

import csv
import hashlib
import json
import statistics
import time
from dataclasses import dataclass
from math import fsum, pi, sqrt
from pathlib import Path

import numpy as np

from . import estimators
from .gaussian_exact import (
    ReferenceEstimate,
    sw2_gaussian_proportional,
    sw2_gaussian_reference,
)
from .harmonics import build_basis
from .measures import DiscreteMeasure, GaussianMeasure, load_point_cloud
from .sphere import random_rotation, qmc_directions, sample_uniform
from .wasserstein1d import IntegrandHandle

__all__ = [
    "SCENARIOS",
    "METHODS",
    "TWO_ATOM_SW22",
    "BenchmarkConfig",
    "BenchmarkRow",
    "ScenarioInstance",
    "build_scenario",
    "derive_seed",
    "ground_truth",
    "reference_sw_discrete",
    "run_benchmark",
    "summarize",
    "write_rows_csv",
    "read_rows_csv",
    "bundled_cloud_paths",
]

SCENARIOS = (
    "gaussian-exact",
    "gaussian-sampled",
    "pointcloud",
    "two-atom",
    "exactness-check",
)
METHODS = ("mc", "cvlow", "cvup", "cvnn", "shcv", "qmc", "rqmc")

# Closed-form sliced squared 2-Wasserstein value of the bundled two-atom
# pair {(0,0),(1,0)} vs {(0,0),(1,1)} with equal weights.
TWO_ATOM_SW22 = 3.0 / 8.0 - 1.0 / (2.0 * pi)

CSV_HEADER = (
    "method",
    "d",
    "n",
    "replication",
    "estimate",
    "abs_error",
    "squared_error",
    "wall_time_ms",
)


def derive_seed(*parts) -> int:
    """Mix arbitrary labels into a 64-bit seed.

    Hashes the decimal/string form of each part, separated by an unambiguous
    delimiter, through BLAKE2b-64.  Distinct part tuples give independent
    seeds for all practical purposes.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(str(part).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class BenchmarkConfig:
    """Everything needed to reproduce one benchmark suite."""

    scenario: str
    d: int
    n_grid: tuple = (100, 250, 500, 1000)
    methods: tuple = ("mc", "shcv")
    replications: int = 100
    base_seed: int = 0
    degree: int = 4
    m: int = 1000
    gamma: float = 2.0
    input_a: str | None = None
    input_b: str | None = None
    max_functions: int | None = None
    timing_repeats: int = 3

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}")
        if not self.methods:
            raise ValueError("methods must be nonempty")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
            raise ValueError("n_grid must be strictly increasing and positive")
        object.__setattr__(self, "n_grid", grid)
        object.__setattr__(self, "methods", tuple(self.methods))


@dataclass(frozen=True)
class BenchmarkRow:
    method: str
    d: int
    n: int
    replication: int
    estimate: float
    abs_error: float
    squared_error: float
    wall_time_ms: float


@dataclass(frozen=True)
class ScenarioInstance:
    """Concrete measure pair targeted by a benchmark, with its truth source."""

    name: str
    d: int
    mu: object
    nu: object
    p: float = 2.0
    closed_form: float | None = None
    gamma: float | None = None


def bundled_cloud_paths() -> list:
    """Paths of the point clouds shipped with the package, sorted by name."""
    from importlib.resources import files

    root = Path(str(files("swcv").joinpath("data/clouds")))
    return sorted(root.glob("*.txt"))


def _random_gaussian_pair(d: int, seed: int, proportional_gamma: float | None):
    """Two Gaussians with dense random covariances (retries guard round-off)."""
    for bump in range(10):
        rng = np.random.default_rng(derive_seed(seed, "gaussian", bump))
        mean_a = 1.0 + rng.standard_normal(d)
        mean_b = 1.0 + rng.standard_normal(d)
        factor_a = rng.standard_normal((d, d))
        cov_a = factor_a @ factor_a.T
        if proportional_gamma is not None:
            cov_b = proportional_gamma * cov_a
        else:
            factor_b = rng.standard_normal((d, d))
            cov_b = factor_b @ factor_b.T
        try:
            return GaussianMeasure(mean_a, cov_a), GaussianMeasure(mean_b, cov_b)
        except ValueError:
            continue
    raise RuntimeError("could not draw positive-definite covariances")


def _sample_from(g: GaussianMeasure, m: int, seed: int) -> DiscreteMeasure:
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(g.covariance)
    points = g.mean + rng.standard_normal((m, g.d)) @ chol.T
    return DiscreteMeasure.uniform(points)


def build_scenario(cfg: BenchmarkConfig) -> ScenarioInstance:
    """Materialize the measure pair for a configuration, deterministically."""
    seed = derive_seed(cfg.base_seed, cfg.scenario, "instance")
    if cfg.scenario == "two-atom":
        mu = DiscreteMeasure.uniform([[0.0, 0.0], [1.0, 0.0]])
        nu = DiscreteMeasure.uniform([[0.0, 0.0], [1.0, 1.0]])
        return ScenarioInstance("two-atom", 2, mu, nu, closed_form=TWO_ATOM_SW22)
    if cfg.scenario == "exactness-check":
        mu, nu = _random_gaussian_pair(cfg.d, seed, cfg.gamma)
        truth = sw2_gaussian_proportional(mu.mean, nu.mean, mu.covariance, cfg.gamma)
        return ScenarioInstance(
            "exactness-check", cfg.d, mu, nu, closed_form=truth, gamma=cfg.gamma
        )
    if cfg.scenario == "gaussian-exact":
        mu, nu = _random_gaussian_pair(cfg.d, seed, None)
        return ScenarioInstance("gaussian-exact", cfg.d, mu, nu)
    if cfg.scenario == "gaussian-sampled":
        g1, g2 = _random_gaussian_pair(cfg.d, seed, None)
        mu = _sample_from(g1, cfg.m, derive_seed(seed, "sample", 0))
        nu = _sample_from(g2, cfg.m, derive_seed(seed, "sample", 1))
        return ScenarioInstance("gaussian-sampled", cfg.d, mu, nu)
    if cfg.scenario == "pointcloud":
        if cfg.input_a and cfg.input_b:
            path_a, path_b = cfg.input_a, cfg.input_b
        else:
            bundled = bundled_cloud_paths()
            if len(bundled) < 2:
                raise FileNotFoundError("no bundled point clouds found")
            path_a, path_b = bundled[0], bundled[1]
        mu = load_point_cloud(path_a)
        nu = load_point_cloud(path_b)
        if mu.d != nu.d:
            raise ValueError("point clouds have different dimensions")
        return ScenarioInstance("pointcloud", mu.d, mu, nu)
    raise ValueError(f"unknown scenario {cfg.scenario!r}")


def reference_sw_discrete(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    p: float,
    n_ref: int,
    seed: int,
    kind: str = "halton",
    replicates: int = 10,
) -> ReferenceEstimate:
    """Randomized-QMC reference value for a discrete pair.

    Same protocol as the Gaussian reference: one low-discrepancy set split
    over independent rotations, replicate mean and standard error.
    """
    if n_ref < 10**5:
        raise ValueError("reference runs need n_ref >= 1e5")
    per = -(-n_ref // replicates)
    base = qmc_directions(per, mu.d, kind)
    handle = IntegrandHandle(mu, nu, p)
    means = []
    for rep in range(replicates):
        rot = random_rotation(mu.d, derive_seed(seed, "rotation", rep))
        vals = handle.evaluate_many(base.directions @ rot.T)
        means.append(fsum(vals) / per)
    value = fsum(means) / replicates
    spread = sqrt(fsum((m - value) ** 2 for m in means) / (replicates - 1))
    return ReferenceEstimate(value, spread / sqrt(replicates))


def _instance_key(inst: ScenarioInstance, n_ref: int) -> str:
    h = hashlib.blake2b(digest_size=16)
    h.update(f"{inst.name}|{inst.d}|{inst.p}|{n_ref}|".encode())
    for measure in (inst.mu, inst.nu):
        if isinstance(measure, GaussianMeasure):
            h.update(measure.mean.tobytes())
            h.update(measure.covariance.tobytes())
        else:
            h.update(measure.atoms.tobytes())
            h.update(measure.weights.tobytes())
    return h.hexdigest()


def _reference_truth(inst: ScenarioInstance, n_ref: int, cache_dir) -> ReferenceEstimate:
    key = _instance_key(inst, n_ref)
    cache_file = None
    if cache_dir is not None:
        cache_file = Path(cache_dir) / f"truth-{key}.json"
        if cache_file.exists():
            try:
                payload = json.loads(cache_file.read_text())
                if payload.get("key") == key:
                    return ReferenceEstimate(payload["value"], payload["stderr"])
            except (json.JSONDecodeError, KeyError, TypeError):
                pass  # corrupted cache entry, recompute below
    seed = derive_seed("ground-truth", key)
    if isinstance(inst.mu, GaussianMeasure):
        ref = sw2_gaussian_reference(inst.mu, inst.nu, n_ref=n_ref, seed=seed)
    else:
        ref = reference_sw_discrete(inst.mu, inst.nu, inst.p, n_ref, seed)
    if cache_file is not None:
        cache_file.parent.mkdir(parents=True, exist_ok=True)
        cache_file.write_text(
            json.dumps({"key": key, "value": ref.value, "stderr": ref.stderr, "n_ref": n_ref})
        )
    return ref


def ground_truth(cfg: BenchmarkConfig, n_ref: int = 10**7, cache_dir=None, with_stderr: bool = False):
    """Ground-truth sliced value for a configuration's scenario.

    Closed forms are used where they exist (proportional covariances and the
    two-atom pair); otherwise a randomized-QMC reference run is performed and
    cached on disk keyed by a content hash of the inputs.
    """
    inst = build_scenario(cfg)
    return instance_truth(inst, n_ref=n_ref, cache_dir=cache_dir, with_stderr=with_stderr)


def instance_truth(inst: ScenarioInstance, n_ref: int = 10**7, cache_dir=None, with_stderr: bool = False):
    if inst.closed_form is not None:
        return (inst.closed_form, 0.0) if with_stderr else inst.closed_form
    ref = _reference_truth(inst, n_ref, cache_dir)
    return (ref.value, ref.stderr) if with_stderr else ref.value


def _paired_directions(cfg: BenchmarkConfig, d: int, n: int, rep: int):
    seed = derive_seed(cfg.base_seed, cfg.scenario, "dirs", n, rep)
    return sample_uniform(n, d, seed)


def _estimate_once(method, inst, n, dirs, cell_seed, basis):
    if method == "mc":
        handle = IntegrandHandle(inst.mu, inst.nu, inst.p)
        t0 = time.perf_counter()
        report = estimators.mc_estimate(handle.evaluate_many(dirs))
        report.wall_time = time.perf_counter() - t0
        return report
    if method == "cvlow":
        return estimators.cv_lower(inst.mu, inst.nu, inst.p, dirs)
    if method == "cvup":
        return estimators.cv_upper(inst.mu, inst.nu, inst.p, dirs)
    if method == "cvnn":
        return estimators.cvnn(inst.mu, inst.nu, inst.p, dirs, seed=cell_seed)
    if method == "shcv":
        return estimators.shcv(inst.mu, inst.nu, inst.p, dirs, basis)
    if method == "qmc":
        return estimators.qmc_estimate(inst.mu, inst.nu, inst.p, n, kind="sobol")
    if method == "rqmc":
        return estimators.rqmc_estimate(
            inst.mu, inst.nu, inst.p, n, kind="halton", seed=cell_seed
        )
    raise ValueError(f"unknown method {method!r}")


def run_benchmark(
    cfg: BenchmarkConfig,
    cache_dir=None,
    n_ref: int = 10**7,
    truth: float | None = None,
) -> list:
    """Run the configured suite and return rows in canonical order.

    ``truth`` overrides the ground-truth value (useful when the caller
    already holds one); otherwise it is resolved through
    :func:`ground_truth` with the given ``n_ref`` and cache directory.
    Per-cell wall time is the median over ``cfg.timing_repeats`` identical
    calls; the estimate itself is taken from the first call.
    """
    inst = build_scenario(cfg)
    if truth is None:
        truth = instance_truth(inst, n_ref=n_ref, cache_dir=cache_dir)
    basis = None
    if "shcv" in cfg.methods:
        basis = build_basis(
            inst.d,
            cfg.degree,
            seed=derive_seed(cfg.base_seed, cfg.scenario, "basis"),
            max_functions=cfg.max_functions,
        )
    rows = []
    for method in cfg.methods:
        for n in cfg.n_grid:
            for rep in range(cfg.replications):
                cell_seed = derive_seed(cfg.base_seed, cfg.scenario, method, n, rep)
                dirs = None
                if method in ("mc", "cvlow", "cvup", "cvnn", "shcv"):
                    dirs = _paired_directions(cfg, inst.d, n, rep)
                timings = []
                report = None
                for _ in range(max(1, cfg.timing_repeats)):
                    out = _estimate_once(method, inst, n, dirs, cell_seed, basis)
                    timings.append(out.wall_time)
                    if report is None:
                        report = out
                err = abs(report.estimate - truth)
                rows.append(
                    BenchmarkRow(
                        method=method,
                        d=inst.d,
                        n=n,
                        replication=rep,
                        estimate=report.estimate,
                        abs_error=err,
                        squared_error=err * err,
                        wall_time_ms=1000.0 * statistics.median(timings),
                    )
                )
    return rows


def summarize(rows) -> list:
    """Aggregate rows into per-(method, n) MSE and timing statistics."""
    cells = {}
    for row in rows:
        cells.setdefault((row.method, row.n), []).append(row)
    out = []
    for (method, n), group in sorted(cells.items()):
        sq = [r.squared_error for r in group]
        times = [r.wall_time_ms for r in group]
        out.append(
            {
                "method": method,
                "n": n,
                "replications": len(group),
                "mse": fsum(sq) / len(sq),
                "mean_time_ms": fsum(times) / len(times),
                "time_sd_ms": statistics.stdev(times) if len(times) > 1 else 0.0,
            }
        )
    return out


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_rows_csv(rows, path) -> None:
    """Write rows with the canonical header; reals carry 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.method,
                    r.d,
                    r.n,
                    r.replication,
                    _fmt(r.estimate),
                    _fmt(r.abs_error),
                    _fmt(r.squared_error),
                    _fmt(r.wall_time_ms),
                ]
            )


def read_rows_csv(path) -> list:
    """Parse rows written by :func:`write_rows_csv` (exact round trip)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header!r}")
        for rec in reader:
            rows.append(
                BenchmarkRow(
                    method=rec[0],
                    d=int(rec[1]),
                    n=int(rec[2]),
                    replication=int(rec[3]),
                    estimate=float(rec[4]),
                    abs_error=float(rec[5]),
                    squared_error=float(rec[6]),
                    wall_time_ms=float(rec[7]),
                )
            )
    return rows
