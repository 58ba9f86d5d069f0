"""Seeded Monte Carlo sweeps over the solvers.

Trial ``t`` of a run uses the instance ``sample_instance(m, n, ensemble,
mix_seed(base_seed, t))`` and every requested algorithm sees that same instance.
Trials are independent, so they may be farmed out to worker processes; results are
always reassembled in trial order, which makes the output independent of scheduling.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import analytic
from .core import (GENERATOR_VERSION, Algorithm, Ensemble, EnergyReport, Form, mix_seed,
                   sample_instance)
from .exact import DEFAULT_LIMIT, solve_exact
from .greedy import greedy_solve
from .spectral import eigen_solve

__all__ = [
    "THREADS_ENV",
    "ExperimentConfig",
    "TrialRecord",
    "ExperimentResult",
    "ConcentrationReport",
    "default_workers",
    "run_experiment",
    "run_trial",
    "serialize_result",
    "result_to_json",
    "result_to_csv",
    "load_result",
    "concentration_report",
    "concentration_sweep",
    "upper_bound_violation_rate",
]

THREADS_ENV = "HOPBOUND_THREADS"
CSV_COLUMNS = ("trial", "seed", "algorithm", "raw_quadratic", "normalized_xi",
               "normalized_quadratic")
OUTPUT_FORMATS = ("csv", "json")


@dataclass(frozen=True)
class ExperimentConfig:
    m: int
    n: int
    ensemble: Ensemble = Ensemble.GAUSSIAN
    form: Form = Form.POSITIVE
    algorithms: Tuple[Algorithm, ...] = (Algorithm.GREEDY,)
    trials: int = 1
    base_seed: int = 0
    output_format: str = "json"

    def __post_init__(self):
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "base_seed", int(self.base_seed))
        object.__setattr__(self, "ensemble", Ensemble.parse(self.ensemble))
        object.__setattr__(self, "form", Form.parse(self.form))
        algos = self.algorithms
        if isinstance(algos, (str, Algorithm)):
            algos = (algos,)
        parsed = []
        for a in algos:
            a = Algorithm.parse(a)
            if a not in parsed:
                parsed.append(a)
        object.__setattr__(self, "algorithms", tuple(parsed))
        object.__setattr__(self, "output_format", str(self.output_format).lower())

        if self.m < 1 or self.n < 1:
            raise ValueError(f"m and n must be positive, got m={self.m}, n={self.n}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must be a 64-bit unsigned integer")
        if self.ensemble is Ensemble.LOADED:
            raise ValueError("experiments sample their instances; the loaded ensemble is not allowed")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        if Algorithm.EXACT in self.algorithms and self.n > DEFAULT_LIMIT:
            raise ValueError(f"exact solving requires n <= {DEFAULT_LIMIT}, got n={self.n}")
        if Algorithm.EIGEN in self.algorithms and self.form is Form.NEGATIVE:
            raise ValueError("eigenvector rounding is only defined for the positive form")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"output format must be one of {OUTPUT_FORMATS}")

    @property
    def alpha(self) -> float:
        return self.m / self.n

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "ensemble": self.ensemble.value,
            "form": self.form.value,
            "algorithms": [a.value for a in self.algorithms],
            "trials": self.trials,
            "base_seed": self.base_seed,
            "output_format": self.output_format,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {"m", "n", "ensemble", "form", "algorithms", "trials", "base_seed", "output_format"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        missing = {"m", "n"} - set(data)
        if missing:
            raise ValueError(f"config is missing required keys: {sorted(missing)}")
        kwargs = dict(data)
        if "algorithms" in kwargs:
            kwargs["algorithms"] = tuple(kwargs["algorithms"]) if not isinstance(
                kwargs["algorithms"], str) else (kwargs["algorithms"],)
        return cls(**kwargs)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    reports: Dict[str, EnergyReport]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    per_trial: List[TrialRecord]
    aggregates: Dict[str, dict] = field(default_factory=dict)
    references: dict = field(default_factory=dict)
    concentration: Dict[str, dict] = field(default_factory=dict)

    def values(self, algorithm, key: str = "normalized_xi") -> np.ndarray:
        name = Algorithm.parse(algorithm).value
        return np.array([getattr(rec.reports[name], key) for rec in self.per_trial])

    def to_dict(self) -> dict:
        return {
            "generator": GENERATOR_VERSION,
            "config": self.config.to_dict(),
            "per_trial": [
                {
                    "trial": rec.trial,
                    "seed": rec.seed,
                    "reports": {name: rep.to_dict() for name, rep in rec.reports.items()},
                }
                for rec in self.per_trial
            ],
            "aggregates": self.aggregates,
            "references": self.references,
            "concentration": self.concentration,
        }


def _stats(values: np.ndarray) -> dict:
    ddof = 1 if values.size > 1 else 0
    return {
        "mean": float(values.mean()),
        "stddev": float(values.std(ddof=ddof)),
        "min": float(values.min()),
        "max": float(values.max()),
    }


def aggregate(config: ExperimentConfig, records: Sequence[TrialRecord]) -> Tuple[dict, dict]:
    """Per-algorithm statistics and concentration figures, in trial order."""
    aggregates, concentration = {}, {}
    for algo in config.algorithms:
        xi = np.array([rec.reports[algo.value].normalized_xi for rec in records])
        quad = np.array([rec.reports[algo.value].normalized_quadratic for rec in records])
        aggregates[algo.value] = {"normalized_xi": _stats(xi), "normalized_quadratic": _stats(quad)}
        std = aggregates[algo.value]["normalized_xi"]["stddev"]
        mean = aggregates[algo.value]["normalized_xi"]["mean"]
        concentration[algo.value] = {
            "stddev_xi": std,
            "ratio": std / mean if mean != 0 else float("nan"),
        }
    return aggregates, concentration


def references(config: ExperimentConfig) -> dict:
    bound_set = analytic.bounds(config.alpha, m=config.m, n=config.n)
    rec = analytic.recursion(config.m, config.n, config.form)
    return {
        "bounds": bound_set.to_dict(),
        "recursion_normalized_quadratic": rec.normalized_limit,
        "recursion_normalized_xi": rec.normalized_xi,
    }


def run_trial(config: ExperimentConfig, trial: int) -> TrialRecord:
    seed = mix_seed(config.base_seed, trial)
    inst = sample_instance(config.m, config.n, config.ensemble, seed)
    reports = {}
    for algo in config.algorithms:
        if algo is Algorithm.EXACT:
            rep = solve_exact(inst, config.form).report
        elif algo is Algorithm.GREEDY:
            rep = greedy_solve(inst, config.form, "natural")[1]
        elif algo is Algorithm.GREEDY_SORTED:
            rep = greedy_solve(inst, config.form, "by_column_norm")[1]
        else:
            rep = eigen_solve(inst).report
        reports[algo.value] = rep
    return TrialRecord(trial, seed, reports)


def _run_chunk(config: ExperimentConfig, trials: Sequence[int]) -> List[TrialRecord]:
    return [run_trial(config, t) for t in trials]


def default_workers() -> int:
    """Worker count from ``HOPBOUND_THREADS``, else the number of CPUs."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
        if value < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return value
    return os.cpu_count() or 1


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentResult:
    """Run every trial of ``config`` and aggregate.

    With ``workers > 1`` trials are split into contiguous chunks evaluated in separate
    processes; the output is identical to the single-worker run.
    """
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError("workers must be at least 1")
    indices = list(range(config.trials))
    workers = min(workers, config.trials)
    if workers == 1:
        records = _run_chunk(config, indices)
    else:
        chunks = [indices[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [config] * workers, chunks))
        records = sorted((rec for part in parts for rec in part), key=lambda rec: rec.trial)
    aggregates, concentration = aggregate(config, records)
    return ExperimentResult(config, records, aggregates, references(config), concentration)


def upper_bound_violation_rate(result: ExperimentResult) -> Dict[str, float]:
    """Fraction of trials whose heuristic ``normalized_xi`` reaches the positive upper bound.

    Only meaningful for positive-form runs; the bound holds with overwhelming
    probability for large ``n``, so a healthy run reports (close to) zero.
    """
    if result.config.form is not Form.POSITIVE:
        raise ValueError("the upper bound concerns the positive form")
    upper = result.references["bounds"]["positive_upper"]
    out = {}
    for algo in result.config.algorithms:
        if algo is Algorithm.EXACT:
            continue
        xi = result.values(algo)
        out[algo.value] = float(np.mean(xi >= upper))
    return out


# ---------------------------------------------------------------- serialization


def _fmt(x: float) -> str:
    return format(x, ".17g")


def result_to_json(result: ExperimentResult) -> str:
    return json.dumps(result.to_dict(), indent=2) + "\n"


def result_to_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in result.per_trial:
        for name, rep in rec.reports.items():
            writer.writerow([rec.trial, rec.seed, name, _fmt(rep.raw_quadratic),
                             _fmt(rep.normalized_xi), _fmt(rep.normalized_quadratic)])
    return buf.getvalue()


def companion_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".summary.json")


def serialize_result(result: ExperimentResult, path, fmt: Optional[str] = None) -> List[Path]:
    """Write ``result`` to ``path``.

    ``json`` writes one document with everything.  ``csv`` writes the per-trial table to
    ``path`` and the config, aggregates, references and concentration figures to the
    companion ``<stem>.summary.json``.

    Returns:
        list: the paths written.
    """
    fmt = (fmt or result.config.output_format).lower()
    if fmt not in OUTPUT_FORMATS:
        raise ValueError(f"unknown output format {fmt!r}")
    path = Path(path)
    if fmt == "json":
        payloads = [(path, result_to_json(result))]
    else:
        summary = result.to_dict()
        del summary["per_trial"]
        payloads = [(path, result_to_csv(result)),
                    (companion_path(path), json.dumps(summary, indent=2) + "\n")]
    for target, text in payloads:
        try:
            with open(target, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write experiment output to {target}: {exc.strerror}",
                          str(target)) from exc
    return [target for target, _ in payloads]


def load_result(path) -> ExperimentResult:
    """Read back a single-document json result written by :func:`serialize_result`."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    config = ExperimentConfig.from_dict(data["config"])
    records = []
    for item in data["per_trial"]:
        reports = {
            name: EnergyReport(rep["raw_quadratic"], rep["normalized_xi"],
                               rep["normalized_quadratic"], Form.parse(rep["form"]),
                               Algorithm.parse(rep["algorithm"]))
            for name, rep in item["reports"].items()
        }
        records.append(TrialRecord(item["trial"], item["seed"], reports))
    return ExperimentResult(config, records, data["aggregates"], data["references"],
                            data["concentration"])


# ---------------------------------------------------------------- concentration


@dataclass(frozen=True)
class ConcentrationReport:
    algorithm: Algorithm
    sizes: Tuple[int, ...]
    means: Tuple[float, ...]
    stddevs: Tuple[float, ...]
    ratios: Tuple[float, ...]
    non_increasing: bool

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.value,
            "sizes": list(self.sizes),
            "means": list(self.means),
            "stddevs": list(self.stddevs),
            "ratios": list(self.ratios),
            "non_increasing": self.non_increasing,
        }


MIN_CONCENTRATION_SIZES = 3
MIN_CONCENTRATION_TRIALS = 50


def concentration_report(results: Sequence[ExperimentResult], algorithm) -> ConcentrationReport:
    """Relative spread ``stddev / mean`` of ``normalized_xi`` across growing ``n``.

    The verdict is diagnostic: it says whether the ratio is non-increasing in ``n``
    but never raises because it is not.
    """
    algorithm = Algorithm.parse(algorithm)
    if len(results) < MIN_CONCENTRATION_SIZES:
        raise ValueError(f"need results for at least {MIN_CONCENTRATION_SIZES} sizes, "
                         f"got {len(results)}")
    ordered = sorted(results, key=lambda res: res.config.n)
    sizes = tuple(res.config.n for res in ordered)
    if len(set(sizes)) != len(sizes):
        raise ValueError("sizes must be distinct")
    for res in ordered:
        if res.config.trials < MIN_CONCENTRATION_TRIALS:
            raise ValueError(f"each size needs at least {MIN_CONCENTRATION_TRIALS} trials, "
                             f"n={res.config.n} has {res.config.trials}")
        if algorithm not in res.config.algorithms:
            raise ValueError(f"algorithm {algorithm.value} missing from the run at n={res.config.n}")
    stats = [res.aggregates[algorithm.value]["normalized_xi"] for res in ordered]
    means = tuple(s["mean"] for s in stats)
    stds = tuple(s["stddev"] for s in stats)
    ratios = tuple(sd / mu if mu != 0 else math.nan for sd, mu in zip(stds, means))
    verdict = all(b <= a for a, b in zip(ratios, ratios[1:]))
    return ConcentrationReport(algorithm, sizes, means, stds, ratios, verdict)


def concentration_sweep(alpha: float, sizes: Sequence[int], algorithm="greedy", trials: int = 100,
                        base_seed: int = 0, ensemble="gaussian", form="positive",
                        workers: Optional[int] = None) -> ConcentrationReport:
    """Run one experiment per ``n`` in ``sizes`` at ``m = round(alpha n)`` and report."""
    sizes = [int(s) for s in sizes]
    if len(sizes) < MIN_CONCENTRATION_SIZES:
        raise ValueError(f"need at least {MIN_CONCENTRATION_SIZES} sizes, got {len(sizes)}")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    results = []
    for n in sizes:
        config = ExperimentConfig(m=max(1, round(alpha * n)), n=n, ensemble=ensemble, form=form,
                                  algorithms=(algorithm,), trials=trials, base_seed=base_seed)
        results.append(run_experiment(config, workers))
    return concentration_report(results, algorithm)
