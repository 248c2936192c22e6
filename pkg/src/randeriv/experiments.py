"""Manifest-driven Monte Carlo experiments and figure generation.

Every (n, trial) task draws from streams keyed by (n, trial, purpose), so
outputs depend only on the manifest, never on thread scheduling.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadManifest, BadSpec, NoConvergence
from .metrics import (bump_family, bump_integrals, circular_w1, sliced_w1)
from .numerics import ToleranceConfig
from .operator import ScheduleSpec, Variant, iterate
from .plotting import scatter_svg
from .sampling import MeasureSpec, RngStream, derive_stream_id, sample_points

log = logging.getLogger(__name__)

ALL_METRICS = (
    "bump_dev_initial",
    "bump_dev_reference",
    "sliced_w1_initial",
    "sliced_w1_reference",
    "max_modulus",
    "min_modulus",
)
OPTIONAL_METRICS = ("circular_w1_initial",)
CSV_HEADER = ("n", "trial", "stage", "metric", "value", "stderr")


@dataclass
class ExperimentManifest:
    measure: MeasureSpec
    n_grid: list
    beta: float = 2.0
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    variant: Variant = Variant.FLAT
    trials: int = 1
    master_seed: int = 0
    metrics: list = field(default_factory=lambda: list(ALL_METRICS))
    bump_family: dict = field(default_factory=lambda: {"step": 0.5, "half_width": 2.0, "radii": [0.5, 1.0]})
    output_dir: str = "out"
    n_directions: int = 64
    tail_exponent: float | None = None
    modulus_moment_B: float | None = None
    max_failure_fraction: float = 0.0
    tol: ToleranceConfig = field(default_factory=ToleranceConfig)

    def __post_init__(self):
        grid = list(self.n_grid)
        if not grid or any(int(n) != n or n < 2 for n in grid):
            raise BadManifest("n_grid must be a nonempty list of integers >= 2")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise BadManifest("n_grid must be strictly increasing")
        self.n_grid = [int(n) for n in grid]
        if not self.beta > 0:
            raise BadManifest("beta must be positive")
        if self.trials < 1:
            raise BadManifest("trials must be >= 1")
        self.variant = Variant(self.variant)
        for n in self.n_grid:
            m = self.schedule.m(n)
            if m < 1 or (self.variant is Variant.FLAT and m > n - 1):
                raise BadManifest(f"schedule gives m({n}) = {m}, outside [1, n-1]")
        unknown = set(self.metrics) - set(ALL_METRICS) - set(OPTIONAL_METRICS)
        if unknown:
            raise BadManifest(f"unknown metrics: {sorted(unknown)}")
        if self.n_directions < 2:
            raise BadManifest("n_directions must be >= 2")
        if not 0 <= self.max_failure_fraction <= 1:
            raise BadManifest("max_failure_fraction must lie in [0, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentManifest":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise BadManifest(f"unknown manifest keys: {sorted(extra)}")
        try:
            if "measure" not in d or "n_grid" not in d:
                raise BadManifest("manifest needs 'measure' and 'n_grid'")
            d["measure"] = MeasureSpec.from_dict(d["measure"])
            if "schedule" in d:
                d["schedule"] = ScheduleSpec.from_dict(d["schedule"])
            if "tol" in d:
                d["tol"] = ToleranceConfig(**d["tol"])
            return cls(**d)
        except (BadSpec, TypeError, ValueError) as e:
            if isinstance(e, BadManifest):
                raise
            raise BadManifest(str(e)) from e

    @classmethod
    def load(cls, path) -> "ExperimentManifest":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as e:
            raise BadManifest(f"cannot read manifest {path}: {e}") from e
        try:
            if path.suffix in (".yaml", ".yml"):
                import yaml
                data = yaml.safe_load(text)
            else:
                data = json.loads(text)
        except Exception as e:
            raise BadManifest(f"cannot parse manifest {path}: {e}") from e
        if not isinstance(data, dict):
            raise BadManifest("manifest must be a mapping")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "measure": self.measure.to_dict(),
            "n_grid": self.n_grid,
            "beta": self.beta,
            "schedule": self.schedule.to_dict(),
            "variant": self.variant.value,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "metrics": list(self.metrics),
            "bump_family": self.bump_family,
            "output_dir": str(self.output_dir),
            "n_directions": self.n_directions,
            "tail_exponent": self.tail_exponent,
            "modulus_moment_B": self.modulus_moment_B,
            "max_failure_fraction": self.max_failure_fraction,
            "tol": {"root_tol": self.tol.root_tol, "residual_tol": self.tol.residual_tol,
                    "max_iters": self.tol.max_iters, "cluster_tol": self.tol.cluster_tol},
        }

    def stream(self, *keys) -> RngStream:
        return RngStream(self.master_seed, derive_stream_id(*keys))


@dataclass
class MetricSeries:
    """Trial-level rows (n, trial, stage, metric, value, stderr) plus failure records."""

    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def append(self, *row):
        self.rows.append(tuple(row))

    def values(self, metric, n=None, stage=None) -> np.ndarray:
        return np.array([r[4] for r in self.rows
                         if r[3] == metric and (n is None or r[0] == n)
                         and (stage is None or r[2] == stage)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for n, trial, stage, metric, value, stderr in self.rows:
            w.writerow([n, trial, stage, metric, _fmt(value), _fmt(stderr)])
        return buf.getvalue()


def _fmt(x) -> str:
    return format(float(x), ".17g")


def resolve_threads(threads=None) -> int:
    cap = os.environ.get("RANDERIV_THREADS")
    t = threads if threads is not None else (os.cpu_count() or 1)
    if cap:
        t = min(t, int(cap)) if threads is None else min(threads, int(cap))
    return max(1, int(t))


def _reference_sample(man: ExperimentManifest) -> np.ndarray:
    return sample_points(man.measure, 4 * max(man.n_grid), man.stream("reference"))


def _run_task(man: ExperimentManifest, n: int, trial: int, ref, ref_bumps, ref_bump_se, family):
    rows = []
    metrics = set(man.metrics)
    m = man.schedule.m(n)
    pts = sample_points(man.measure, n, man.stream("points", n, trial))
    try:
        trace = iterate(pts, m, man.beta, man.variant, man.stream("trace", n, trial), man.tol)
    except NoConvergence as e:
        log.warning("solver failure at n=%d trial=%d stage=%s: %s", n, trial, e.stage, e)
        return [(n, trial, e.stage, "solver_failure", 1.0, 0.0)], True
    init_bumps = bump_integrals(pts, family)
    for j, (stage, diag) in enumerate(zip(trace.stages, trace.diagnostics)):
        if "max_modulus" in metrics:
            rows.append((n, trial, j, "max_modulus", diag.max_modulus, 0.0))
        if "min_modulus" in metrics:
            rows.append((n, trial, j, "min_modulus", diag.min_modulus, 0.0))
        if man.modulus_moment_B is not None:
            rows.append((n, trial, j, "moment_B", n ** (-man.modulus_moment_B) * diag.min_modulus, 0.0))
        if "bump_dev_initial" in metrics or "bump_dev_reference" in metrics:
            b = bump_integrals(stage, family)
            if "bump_dev_initial" in metrics and j > 0:
                rows.append((n, trial, j, "bump_dev_initial", float(np.abs(b - init_bumps).max()), 0.0))
            if "bump_dev_reference" in metrics:
                rows.append((n, trial, j, "bump_dev_reference", float(np.abs(b - ref_bumps).max()),
                             ref_bump_se))
    final = trace.final
    directions = man.stream("directions", n, trial)
    if "sliced_w1_initial" in metrics:
        r = sliced_w1(final, pts, man.n_directions, directions)
        rows.append((n, trial, m, "sliced_w1_initial", r.value, r.estimator_error))
    if "sliced_w1_reference" in metrics:
        for j in (0, m):
            r = sliced_w1(trace.stages[j], ref, man.n_directions, directions)
            rows.append((n, trial, j, "sliced_w1_reference", r.value, r.estimator_error))
    if "circular_w1_initial" in metrics and len(final) == len(pts):
        if np.all(np.abs(np.abs(np.concatenate([final, pts])) - 1) <= 1e-6):
            rows.append((n, trial, m, "circular_w1_initial", circular_w1(final, pts).value, 0.0))
    if man.tail_exponent is not None:
        radii = 2.0 ** np.arange(7)
        frac = (np.abs(pts)[None, :] > radii[:, None]).mean(axis=1)
        rows.append((n, trial, 0, "tail_ratio", float((radii ** man.tail_exponent * frac).max()), 0.0))
    return rows, False


def run_convergence(man: ExperimentManifest, threads=None) -> MetricSeries:
    """Run every (n, trial) task and collect trial-level rows in (n, trial) order."""
    if man.schedule.rule == "log_fraction":
        ratios = [man.schedule.m(n) * math.log(n) / n for n in man.n_grid]
        if any(b > a for a, b in zip(ratios, ratios[1:])):
            log.warning("m(n) log n / n is not decreasing over n_grid: %s", ratios)
    family = bump_family(**man.bump_family)
    ref = _reference_sample(man)
    ref_vals = np.stack([f(ref) for f in family])
    ref_bumps = ref_vals.mean(axis=1)
    ref_bump_se = float((ref_vals.std(axis=1) / np.sqrt(len(ref))).max())
    tasks = [(n, t) for n in man.n_grid for t in range(man.trials)]
    nthreads = resolve_threads(threads)

    def work(task):
        return _run_task(man, task[0], task[1], ref, ref_bumps, ref_bump_se, family)

    if nthreads == 1:
        results = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            results = list(pool.map(work, tasks))
    series = MetricSeries()
    for (n, trial), (rows, failed) in zip(tasks, results):
        series.rows.extend(rows)
        if failed:
            series.failures.append((n, trial))
    return series


def summarize(man: ExperimentManifest, series: MetricSeries) -> tuple[list, dict]:
    """Median across trials per (n, stage, metric); failed trials are excluded."""
    groups = {}
    for n, trial, stage, metric, value, _ in series.rows:
        if metric == "solver_failure":
            continue
        groups.setdefault((n, stage, metric), []).append(value)
    fails = {n: sum(1 for f in series.failures if f[0] == n) for n in man.n_grid}
    table = [(n, stage, metric, float(np.median(v)), len(v), fails[n])
             for (n, stage, metric), v in sorted(groups.items())]
    trend = {}
    first = man.n_grid[0]
    for metric in ("bump_dev_initial", "sliced_w1_initial"):
        med = {}
        for n in man.n_grid:
            v = series.values(metric, n=n, stage=man.schedule.m(n))
            if len(v):
                med[n] = float(np.median(v))
        if len(med) == len(man.n_grid):
            c_fit = med[first] * first / math.log(first)
            trend[metric] = {
                "medians": {str(k): v for k, v in med.items()},
                "fitted_C": c_fit,
                "within_C_log_n_over_n": {str(n): med[n] <= c_fit * math.log(n) / n * (1 + 1e-12)
                                          for n in man.n_grid},
                "non_increasing": all(med[b] <= med[a] for a, b in zip(man.n_grid, man.n_grid[1:])),
            }
    return table, {"failures": {str(k): v for k, v in fails.items()},
                   "total_tasks": len(man.n_grid) * man.trials, "trend": trend}


def write_outputs(man: ExperimentManifest, series: MetricSeries, output_dir=None) -> dict:
    out = Path(output_dir or man.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"metrics": out / "metrics.csv", "summary": out / "summary.csv",
             "summary_json": out / "summary.json", "manifest": out / "manifest.resolved.json"}
    paths["metrics"].write_text(series.to_csv())
    table, info = summarize(man, series)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("n", "stage", "metric", "median", "trials_ok", "failures"))
    for n, stage, metric, med, ok, nf in table:
        w.writerow([n, stage, metric, _fmt(med), ok, nf])
    paths["summary"].write_text(buf.getvalue())
    paths["summary_json"].write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    paths["manifest"].write_text(json.dumps(man.to_dict(), indent=2, sort_keys=True) + "\n")
    return paths


def failure_budget_exceeded(man: ExperimentManifest, series: MetricSeries) -> bool:
    total = len(man.n_grid) * man.trials
    return len(series.failures) > man.max_failure_fraction * total


# ------------------------------------------------------------------ figures

def _interlaces(inputs, roots) -> bool:
    """Every open arc between consecutive input angles holds exactly one root."""
    a = np.sort(np.mod(np.angle(inputs), 2 * np.pi))
    r = np.mod(np.angle(roots), 2 * np.pi)
    counts = np.bincount(np.searchsorted(a, r) % len(a), minlength=len(a))
    return bool(np.all(counts == 1)) and len(roots) == len(inputs)


def run_figures(man: ExperimentManifest, output_dir=None) -> list:
    """Scatter SVG plus backing point CSV for trial 0 of each n in the grid."""
    out = Path(output_dir or man.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e}") from e
    written = []
    info = {}
    for n in man.n_grid:
        m = man.schedule.m(n)
        pts = sample_points(man.measure, n, man.stream("points", n, 0))
        trace = iterate(pts, m, man.beta, man.variant, man.stream("trace", n, 0), man.tol)
        final = trace.final
        stem = f"{man.variant.value}_n{n}_m{m}"
        csv_path = out / f"{stem}.csv"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("stage", "index", "re", "im", "modulus", "angle"))
        for stage, layer in ((0, pts), (m, final)):
            for k, z in enumerate(layer):
                w.writerow([stage, k, _fmt(z.real), _fmt(z.imag), _fmt(abs(z)),
                            _fmt(math.atan2(z.imag, z.real))])
        svg_path = out / f"{stem}.svg"
        label = "circular variant" if man.variant is Variant.CIRCULAR else "randomized derivative"
        try:
            csv_path.write_text(buf.getvalue())
            scatter_svg([("initial points", pts), (f"stage {m}", final)],
                        title=f"{label}: n={n}, m={m}, beta={man.beta:g}", path=svg_path)
        except OSError as e:
            raise OSError(f"cannot write figure files under {out}: {e}") from e
        maxmod = trace.max_moduli()
        entry = {"n": n, "m": m, "max_modulus_initial": float(maxmod[0]),
                 "max_modulus_final": float(maxmod[-1]),
                 "max_modulus_non_increasing": bool(np.all(np.diff(maxmod) <= 1e-9))}
        if man.variant is Variant.CIRCULAR and m == 1 and np.all(np.abs(np.abs(pts) - 1) <= 1e-8):
            entry["interlaced"] = _interlaces(pts, final)
        info[stem] = entry
        written += [csv_path, svg_path]
    meta = out / "figures.json"
    meta.write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    written.append(meta)
    return written
