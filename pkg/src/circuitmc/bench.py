"""Experiment protocols: accuracy and timing sweeps over synthetic draws,
real-data evaluation by random deletion, and spectrum diagnostics."""

from __future__ import annotations

import csv
import io
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np

from .core import (
    ExperimentRecord,
    InvalidInputError,
    MaskedMatrix,
    bootstrap_ci,
    squared_errors,
)
from .methods import MethodOptions, parse_methods, requires_positive, run_method
from .simgen import SimConfig, delete_entries, draw
from .spectral import singular_vector_alignment, spectral_gaps

Axis = Literal["observe_prob", "noise_level", "size"]
AXES = ("observe_prob", "noise_level", "size")


def derive_seed(*parts: int) -> int:
    """Stable 32-bit seed from a tuple of nonnegative integers."""
    return int(np.random.SeedSequence([abs(int(p)) for p in parts]).generate_state(1)[0])


def _widen(ci: tuple[float, float], value: float) -> tuple[float, float]:
    # the bootstrap centre is the mean of resample means, not the sample mean
    return min(ci[0], value), max(ci[1], value)


@dataclass
class SweepSpec:
    axis: Axis
    values: Sequence[float]
    base_config: SimConfig
    methods: Sequence[str]
    trials: int = 20
    seed: int = 0
    options: MethodOptions = field(default_factory=MethodOptions)
    p_means: Literal["observe", "missing"] = "observe"
    bootstrap_iterations: int = 1000
    jobs: int = 1

    def __post_init__(self):
        if self.axis not in AXES:
            raise InvalidInputError(f"unknown sweep axis {self.axis!r}")
        if self.trials < 1:
            raise InvalidInputError("trials must be >= 1")
        if not len(self.values):
            raise InvalidInputError("sweep needs at least one axis value")
        if self.p_means not in ("observe", "missing"):
            raise InvalidInputError("p_means must be 'observe' or 'missing'")
        parse_methods(self.methods)

    def config_for(self, value, trial_seed: int) -> SimConfig:
        base = self.base_config
        if self.axis == "observe_prob":
            p = float(value) if self.p_means == "observe" else 1.0 - float(value)
            return replace(base, observe_prob=p, seed=trial_seed)
        if self.axis == "noise_level":
            return replace(base, noise_level=float(value), seed=trial_seed)
        n = int(value)
        return replace(base, rows=n, cols=n, seed=trial_seed)


def _run_trial(spec: SweepSpec, vi: int, trial: int) -> list[ExperimentRecord]:
    value = spec.values[vi]
    trial_seed = derive_seed(spec.seed, vi, trial)
    config = spec.config_for(value, trial_seed)
    sim = draw(config)
    truth = MaskedMatrix.full(sim.truth)
    eval_mask = ~sim.observed.mask
    options = replace(spec.options, seed=trial_seed)
    out = []
    for name in spec.methods:
        start = time.perf_counter()
        est = run_method(name, sim.observed, options)
        elapsed = time.perf_counter() - start
        mse = float(np.mean(squared_errors(truth, est, eval_mask))) if eval_mask.any() else 0.0
        out.append(
            ExperimentRecord(
                method=name, axis=spec.axis, axis_value=float(value), trial=trial,
                mse=mse, runtime_seconds=elapsed, seed=trial_seed, config=config,
            )
        )
    return out


def run_accuracy_sweep(spec: SweepSpec) -> list[ExperimentRecord]:
    """Per-trial rows followed, for each (value, method), by an aggregate row
    (``trial=None``) with the mean MSE and its bootstrap ±2σ interval.

    Row order is (axis value, trial, method) whatever ``jobs`` is.
    """
    tasks = [(vi, t) for vi in range(len(spec.values)) for t in range(spec.trials)]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = list(pool.map(_run_trial, [spec] * len(tasks), *zip(*tasks)))
    else:
        results = [_run_trial(spec, vi, t) for vi, t in tasks]

    records: list[ExperimentRecord] = []
    for vi, value in enumerate(spec.values):
        block = [r for (v, _), rows in zip(tasks, results) if v == vi for r in rows]
        records.extend(block)
        for k, name in enumerate(spec.methods):
            rows = [r for r in block if r.method == name]
            mses = [r.mse for r in rows]
            mean = float(np.mean(mses))
            lo, hi = _widen(
                bootstrap_ci(mses, spec.bootstrap_iterations, derive_seed(spec.seed, vi, k, 1)),
                mean,
            )
            records.append(
                ExperimentRecord(
                    method=name, axis=spec.axis, axis_value=float(value), trial=None,
                    mse=mean, ci_low=lo, ci_high=hi,
                    runtime_seconds=float(np.mean([r.runtime_seconds for r in rows])),
                    seed=spec.seed,
                )
            )
    return records


def time_method(name: str, A: MaskedMatrix, options: MethodOptions, repeats: int = 3) -> float:
    """Median wall time of ``repeats`` runs after one untimed warm-up."""
    run_method(name, A, options)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        run_method(name, A, options)
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def run_timing_sweep(
    sizes: Sequence[int],
    template: SimConfig,
    methods: Sequence[str],
    seed: int = 0,
    options: MethodOptions | None = None,
    repeats: int = 3,
) -> list[ExperimentRecord]:
    parse_methods(methods)
    options = options or MethodOptions()
    records = []
    for si, n in enumerate(sizes):
        trial_seed = derive_seed(seed, si)
        config = replace(template, rows=int(n), cols=int(n), seed=trial_seed)
        sim = draw(config)
        truth = MaskedMatrix.full(sim.truth)
        eval_mask = ~sim.observed.mask
        opts = replace(options, seed=trial_seed)
        for name in methods:
            seconds = time_method(name, sim.observed, opts, repeats)
            est = run_method(name, sim.observed, opts)
            mse = float(np.mean(squared_errors(truth, est, eval_mask))) if eval_mask.any() else 0.0
            records.append(
                ExperimentRecord(
                    method=name, axis="size", axis_value=float(n), trial=0, mse=mse,
                    runtime_seconds=seconds, seed=trial_seed, config=config,
                )
            )
    return records


def format_timing_csv(records: Sequence[ExperimentRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["method", "n", "seconds"])
    for rec in records:
        writer.writerow([rec.method, int(rec.axis_value), repr(rec.runtime_seconds)])
    return out.getvalue()


def run_realdata_eval(
    matrix: MaskedMatrix,
    deletions: int,
    methods: Sequence[str],
    distances: Sequence[float] | None = None,
    seed: int = 0,
    options: MethodOptions | None = None,
    tag: str = "dataset",
    bootstrap_iterations: int = 1000,
) -> list[ExperimentRecord]:
    """Delete ``deletions`` observed entries, complete with each method, and
    score column-normalised squared error on the deleted cells.

    Columns are normalised by the mean of their entries that survived
    deletion.
    """
    specs = parse_methods(methods)
    options = replace(options or MethodOptions(), seed=seed)
    if distances is not None:
        options = replace(options, distances=tuple(float(d) for d in distances))
    for spec in specs:
        if "riegel" in spec.walk() and options.distances is None:
            raise InvalidInputError("method riegel needs --distances")
        if requires_positive(spec, options):
            matrix.require_positive()
    reduced, deleted = delete_entries(matrix, deletions, seed)
    records = []
    for k, (name, spec) in enumerate(zip(methods, specs)):
        start = time.perf_counter()
        est = run_method(spec, reduced, options)
        elapsed = time.perf_counter() - start
        errs = squared_errors(matrix, est, deleted, column_normalize=True, normalize_from=reduced.mask)
        mse = float(np.mean(errs))
        lo, hi = _widen(bootstrap_ci(errs, bootstrap_iterations, derive_seed(seed, k)), mse)
        records.append(
            ExperimentRecord(
                method=name, axis="dataset", axis_value=tag, trial=0, mse=mse,
                ci_low=lo, ci_high=hi, runtime_seconds=elapsed, seed=seed,
            )
        )
    return records


def run_spectrum_report(
    config: SimConfig,
    inits: Sequence[str] = ("faccro", "meanfill"),
    trials: int = 1,
    gaps: int = 10,
    seed: int | None = None,
    k: int = 2,
    options: MethodOptions | None = None,
) -> list[dict[str, object]]:
    """Spectral gaps and k-th singular vector alignment per completion.

    One row per (trial, source); sources are ``truth`` and each init.
    """
    parse_methods(inits)
    options = options or MethodOptions()
    base_seed = config.seed if seed is None else seed
    rows = []
    for trial in range(trials):
        trial_seed = derive_seed(base_seed, trial)
        sim = draw(replace(config, seed=trial_seed))
        filled = {"truth": sim.truth}
        for name in inits:
            filled[name] = run_method(name, sim.observed, replace(options, seed=trial_seed))
        for source, X in filled.items():
            row: dict[str, object] = {"trial": trial, "seed": trial_seed, "source": source}
            for g, val in enumerate(spectral_gaps(X, gaps), start=1):
                row[f"gap_{g}"] = float(val)
            row[f"alignment_{k}"] = singular_vector_alignment(X, sim.truth, k)
            rows.append(row)
    return rows


def format_spectrum_csv(rows: Sequence[dict[str, object]]) -> str:
    if not rows:
        return ""
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return out.getvalue()
