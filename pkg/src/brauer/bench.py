"""Noisy low-rank recovery experiments comparing ALS initializations.

Each trial draws ``rank`` random unit rank-1 terms, sums them (rescaled to a
unit-norm signal), adds noise drawn uniformly from the sphere of radius
``noise``, and runs every requested method:

``random``      best of ``restarts`` ALS runs from uniform [0, 1) factors
``qr1``         ALS from the Quick Rank 1 deflation init
``sigma4+qr1``  same, on tensors amplified with the sigma4 gradient
``sharp+qr1``   same, on tensors amplified with the sharp gradient

Rank-1 trials are scored with ``|(a.a')(b.b')(c.c')|`` against the true
factors, higher ranks with ``(T . S) / ||S||`` against the clean signal.
"""

import csv
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .amplify import AmplifierKind
from .decompose import CPModel, amplified_init, cp_als, rank1_fit, rankr_fit
from .tensor3 import random_unit_rank1, random_unit_tensor

METHODS = ("random", "qr1", "sigma4+qr1", "sharp+qr1")
_KIND = {"qr1": AmplifierKind.IDENTITY, "sigma4+qr1": AmplifierKind.SIGMA4,
         "sharp+qr1": AmplifierKind.SHARP}
CSV_FIELDS = ("trial", "method", "fit", "iterations", "time_sec", "best_run_iterations",
              "fit_noisy")


@dataclass
class ExperimentConfig:
    dims: tuple = (30, 30, 30)
    rank: int = 1
    noise: float = 10.0
    trials: int = 1000
    restarts: int = 10
    tol: float = 1e-4
    max_iter: int = 50
    seed: int = 0
    methods: tuple = METHODS
    normalize_signal: bool = True

    def __post_init__(self):
        self.dims = tuple(int(n) for n in self.dims)
        self.methods = tuple(self.methods)
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ValueError(f"dims must be three positive integers, got {self.dims}")
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.noise < 0:
            raise ValueError("noise must be non-negative")
        if not self.methods:
            raise ValueError("at least one method is required")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")


@dataclass
class Instance:
    truth: list
    signal: np.ndarray
    noisy: np.ndarray


@dataclass
class TrialRecord:
    trial: int
    method: str
    fit: float
    iterations: int
    time_sec: float
    best_run_iterations: int
    fit_noisy: float = float("nan")


@dataclass
class AggregateStats:
    """Per-method ``{"fit": (mean, std), "iterations": ..., "time_sec": ...}``."""

    per_method: dict = field(default_factory=dict)
    trials: int = 0

    def as_dict(self):
        return {m: {k: {"mean": v[0], "std": v[1]} for k, v in s.items()}
                for m, s in self.per_method.items()}


def trial_streams(seed, trial):
    """Independent generators for instance creation and random restarts of one trial."""
    children = np.random.SeedSequence([int(seed), int(trial)]).spawn(2)
    return np.random.default_rng(children[0]), np.random.default_rng(children[1])


def make_noisy_instance(cfg, rng):
    truth = [random_unit_rank1(cfg.dims, rng) for _ in range(cfg.rank)]
    signal = sum(t.to_tensor() for t in truth)
    if cfg.normalize_signal:
        scale = np.linalg.norm(signal.ravel())
        signal = signal / scale
        truth = [type(t)(t.weight / scale, t.a, t.b, t.c) for t in truth]
    noisy = signal + cfg.noise * random_unit_tensor(cfg.dims, rng)
    return Instance(truth, signal, noisy)


def _score(cfg, instance, model):
    if cfg.rank == 1:
        return rank1_fit(instance.truth[0], model.term(0)), float("nan")
    return rankr_fit(instance.signal, model), rankr_fit(instance.noisy, model)


def run_trial(cfg, instance, method, rng=None, trial=0):
    """Run one method on one instance.

    ``rng`` is only used by the random method. Its record carries the best
    fit over the restarts and the summed iterations and time; the iteration
    count of the best run is kept separately.
    """
    T = instance.noisy
    if method == "random":
        if rng is None:
            raise ValueError("the random method needs an rng")
        best = None
        total_iter, total_time = 0, 0.0
        for _ in range(cfg.restarts):
            start = time.perf_counter()
            model, report = cp_als(T, cfg.rank, CPModel.random(cfg.dims, cfg.rank, rng),
                                   tol=cfg.tol, max_iter=cfg.max_iter)
            total_time += time.perf_counter() - start
            total_iter += report.iterations
            fit, fit_noisy = _score(cfg, instance, model)
            if best is None or fit > best[0]:
                best = (fit, fit_noisy, report.iterations)
        return TrialRecord(trial, method, best[0], total_iter, total_time, best[2], best[1])
    if method not in _KIND:
        raise ValueError(f"unknown method {method!r}")
    start = time.perf_counter()
    init = amplified_init(T, cfg.rank, _KIND[method])
    model, report = cp_als(T, cfg.rank, init, tol=cfg.tol, max_iter=cfg.max_iter)
    elapsed = time.perf_counter() - start
    fit, fit_noisy = _score(cfg, instance, model)
    return TrialRecord(trial, method, fit, report.iterations, elapsed, report.iterations,
                       fit_noisy)


def _run_one(args):
    cfg, trial = args
    inst_rng, restart_rng = trial_streams(cfg.seed, trial)
    instance = make_noisy_instance(cfg, inst_rng)
    return [run_trial(cfg, instance, m, restart_rng, trial) for m in cfg.methods]


def aggregate(records, methods=None):
    methods = methods or sorted({r.method for r in records})
    stats = AggregateStats(trials=len({r.trial for r in records}))
    for m in methods:
        rows = [r for r in records if r.method == m]
        if not rows:
            continue
        entry = {}
        for key in ("fit", "iterations", "time_sec"):
            vals = [float(getattr(r, key)) for r in rows]
            std = statistics.stdev(vals) if len(vals) > 1 else 0.0
            entry[key] = (math.fsum(vals) / len(vals), std)
        stats.per_method[m] = entry
    return stats


def run_experiment(cfg, jobs=1, progress=None):
    """Run ``cfg.trials`` trials; returns ``(records, stats)``.

    Every trial has its own seed-derived streams, so the records do not
    depend on ``jobs``.
    """
    tasks = [(cfg, t) for t in range(cfg.trials)]
    records = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, recs in enumerate(pool.map(_run_one, tasks, chunksize=4)):
                records.extend(recs)
                if progress:
                    progress(i + 1, cfg.trials)
    else:
        for i, task in enumerate(tasks):
            records.extend(_run_one(task))
            if progress:
                progress(i + 1, cfg.trials)
    return records, aggregate(records, cfg.methods)


def write_csv(records, path, include_time=True):
    fields = [f for f in CSV_FIELDS if include_time or f != "time_sec"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        for r in records:
            row = asdict(r)
            for key in ("fit", "fit_noisy"):
                row[key] = repr(float(row[key]))
            writer.writerow(row)


def read_csv(path):
    with open(path, newline="") as fh:
        return [TrialRecord(int(row["trial"]), row["method"], float(row["fit"]),
                            int(row["iterations"]), float(row.get("time_sec") or "nan"),
                            int(row["best_run_iterations"]), float(row["fit_noisy"]))
                for row in csv.DictReader(fh)]


def write_json(stats, cfg, path):
    payload = {"config": asdict(cfg), "trials": stats.trials, "methods": stats.as_dict()}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
