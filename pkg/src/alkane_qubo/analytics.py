"""Analysis surfaces: Hamming structure, energy histograms, coverage runs.

All emission is data-only (CSV with a header row, UTF-8, LF endings);
plotting belongs to external tools.
"""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass, replace

import numpy as np

from .decode import (
    DegreeSequence,
    IsomerRegistry,
    NonConstructible,
    canonicalize,
    encode_sequence,
    sequence_to_tree,
)
from .oracle import brute_force_isomers, enumerate_feasible_interiors
from .qubo import QuboProblem, build_qubo
from .sampler import PipelineReport, SampleRecord, SamplerConfig, method_label, run_pipeline

__all__ = [
    "HammingReport",
    "EnergyHistogram",
    "CoverageStats",
    "representative_encodings",
    "hamming_report",
    "energy_histogram",
    "coverage_experiment",
    "hamming_csv",
    "histogram_csv",
    "coverage_csv",
]


@dataclass(frozen=True)
class HammingReport:
    """All pairwise bit distances between isomer encodings plus, for each
    isomer, the distance to its nearest neighbor. Distances are always even
    (a degree change flips two bits) and lie in ``[4, 2(n-2)]``."""

    pairwise: tuple[int, ...]
    per_isomer_min: tuple[int, ...]


@dataclass(frozen=True)
class EnergyHistogram:
    """Sample counts grouped by original-matrix energy."""

    bins: dict[float, int]

    @property
    def total(self) -> int:
        return sum(self.bins.values())


@dataclass(frozen=True)
class CoverageStats:
    """Batches needed to reach full coverage, over repeated runs.

    Runs that hit the iteration cap are recorded at the cap value and
    flagged censored.
    """

    per_run_iterations: tuple[int, ...]
    censored: tuple[bool, ...]
    mean: float
    median: float

    @staticmethod
    def from_runs(iterations: list[int], censored: list[bool]) -> "CoverageStats":
        if not iterations:
            return CoverageStats((), (), float("nan"), float("nan"))
        return CoverageStats(
            per_run_iterations=tuple(iterations),
            censored=tuple(censored),
            mean=statistics.fmean(iterations),
            median=float(statistics.median(iterations)),
        )


def representative_encodings(n: int) -> list[tuple[str, np.ndarray]]:
    """One one-hot encoding per isomer, keyed by certificate.

    The representative of an isomer is its lexicographically smallest
    constructible ordered degree sequence; results are sorted by
    certificate. Covers every isomer because the constructible sequences
    are surjective onto the max-degree-4 trees.
    """
    reps: dict[str, np.ndarray] = {}
    for interior in enumerate_feasible_interiors(n):
        seq = DegreeSequence((1, *interior, 1))
        try:
            tree = sequence_to_tree(seq)
        except NonConstructible:
            continue
        cert = canonicalize(tree)
        if cert not in reps:
            reps[cert] = encode_sequence(seq)
    return sorted(reps.items())


def hamming_report(encodings, n: int) -> HammingReport:
    """Pairwise distances and per-isomer minima over distinct encodings.

    ``encodings`` holds one representative bit vector per distinct isomer;
    with fewer than two isomers both result fields are empty.
    """
    m = 4 * (n - 2)
    rows = np.asarray([np.asarray(e, dtype=np.int8) for e in encodings], dtype=np.int8)
    if rows.size and rows.shape[1] != m:
        raise ValueError(f"encodings must have length {m}, got {rows.shape[1]}")
    k = rows.shape[0]
    if k < 2:
        return HammingReport((), ())
    distance = (rows[:, None, :] != rows[None, :, :]).sum(axis=2)
    pairwise = tuple(int(distance[i, j]) for i in range(k) for j in range(i + 1, k))
    off_diag = distance + np.eye(k, dtype=int) * (m + 1)
    minima = tuple(int(v) for v in off_diag.min(axis=1))
    return HammingReport(pairwise=pairwise, per_isomer_min=minima)


def energy_histogram(records: list[SampleRecord], decimals: int = 6) -> EnergyHistogram:
    """Group samples by original-matrix energy, rounded to ``decimals``."""
    bins: dict[float, int] = {}
    for record in records:
        key = round(record.energy_original, decimals)
        bins[key] = bins.get(key, 0) + 1
    return EnergyHistogram(bins=bins)


def coverage_experiment(
    n: int,
    methods: list[SamplerConfig],
    repetitions: int,
    max_iterations: int = 100,
) -> list[CoverageStats]:
    """Batches-to-full-coverage statistics for each sampling strategy.

    Every repetition runs the pipeline on the default problem for ``n``
    with a fresh registry until all oracle isomers are found (or the cap is
    hit, recorded as censored). Repetition r of a method reuses its config
    with the seed offset by r, so results are reproducible run to run.
    """
    problem = build_qubo(n)
    target = len(brute_force_isomers(n))
    results = []
    for config in methods:
        iterations: list[int] = []
        censored: list[bool] = []
        for rep in range(repetitions):
            rep_config = replace(config, rng_seed=config.rng_seed + rep)
            registry = IsomerRegistry()
            report = run_pipeline(
                problem, rep_config, registry,
                target_count=target, max_iterations=max_iterations,
            )
            complete = len(registry) >= target
            iterations.append(report.iterations_used if complete else max_iterations)
            censored.append(not complete)
        results.append(CoverageStats.from_runs(iterations, censored))
    return results


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def hamming_csv(encodings_with_certs: list[tuple[str, np.ndarray]], n: int) -> str:
    """Rows ``(isomer_a, isomer_b, distance)`` over all unordered pairs."""
    certs = [c for c, _ in encodings_with_certs]
    rows = np.asarray([e for _, e in encodings_with_certs], dtype=np.int8)
    out = []
    for i in range(len(certs)):
        for j in range(i + 1, len(certs)):
            out.append([certs[i], certs[j], int((rows[i] != rows[j]).sum())])
    return _csv_text(["isomer_a", "isomer_b", "distance"], out)


def histogram_csv(histogram: EnergyHistogram) -> str:
    """Rows ``(energy, count)`` sorted by energy."""
    rows = [[repr(e), c] for e, c in sorted(histogram.bins.items())]
    return _csv_text(["energy", "count"], rows)


def coverage_csv(methods: list[SamplerConfig], stats: list[CoverageStats]) -> str:
    """Rows ``(method, repetition, iterations)``; censored runs carry ``*``."""
    rows = []
    for config, stat in zip(methods, stats):
        label = method_label(config)
        for rep, (iters, cens) in enumerate(zip(stat.per_run_iterations, stat.censored)):
            rows.append([label, rep, f"{iters}*" if cens else str(iters)])
    return _csv_text(["method", "repetition", "iterations"], rows)


def run_histogram_batch(problem: QuboProblem, config: SamplerConfig) -> tuple[PipelineReport, EnergyHistogram]:
    """One batch with record collection, reduced to its energy histogram."""
    registry = IsomerRegistry()
    report = run_pipeline(problem, config, registry, max_iterations=1, collect_records=True)
    return report, energy_histogram(report.records)
