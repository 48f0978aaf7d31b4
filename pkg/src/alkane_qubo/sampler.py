"""Annealing-style samplers over the isomer QUBO.

The workhorse is a single-bit-flip Metropolis kernel swept from hot to cold
(forward anneal). Refinement restarts finished chains at a mid-schedule
temperature, holds there, and re-cools — a classical stand-in for reverse
annealing that searches the neighborhood of a candidate. The batch pipeline
combines both with an iterated rank-one penalty on the most-sampled ground
state to push later batches toward unseen solutions.

Every chain owns an independent splitmix64 stream derived from the run
seed, so results are reproducible bit-for-bit regardless of thread count
or scheduling.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from numba import njit, prange

from .decode import IsomerRegistry, NonConstructible, decode_onehot, sequence_to_tree
from .qubo import QuboProblem, matrix_eval, matrix_eval_batch, perturb

__all__ = [
    "AnnealSchedule",
    "SamplerConfig",
    "SampleRecord",
    "IterationStats",
    "PipelineReport",
    "ground_energy",
    "simulated_anneal",
    "anneal_batch",
    "reverse_refine",
    "reverse_batch",
    "run_pipeline",
    "method_label",
]

GROUND_TOL = 1e-6

_U64 = np.uint64
_INV_2_53 = 1.0 / 9007199254740992.0


@dataclass(frozen=True)
class AnnealSchedule:
    """Inverse-temperature ramp: ``sweeps`` full passes from hot to cold."""

    sweeps: int
    beta_start: float = 0.1
    beta_end: float = 10.0
    interpolation: str = "geometric"

    def __post_init__(self) -> None:
        if self.sweeps < 1:
            raise ValueError("need at least one sweep")
        if not 0 < self.beta_start <= self.beta_end:
            raise ValueError(f"need 0 < beta_start <= beta_end, got {self.beta_start}, {self.beta_end}")
        if self.interpolation not in ("linear", "geometric"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")

    @staticmethod
    def default_for(m: int) -> "AnnealSchedule":
        """Default ramp: geometric 0.1 -> 10 over ``50 m`` sweeps."""
        return AnnealSchedule(sweeps=50 * m)

    def betas(self) -> np.ndarray:
        if self.interpolation == "geometric":
            return np.geomspace(self.beta_start, self.beta_end, self.sweeps)
        return np.linspace(self.beta_start, self.beta_end, self.sweeps)


@dataclass(frozen=True)
class SamplerConfig:
    """Knobs for one pipeline run.

    ``lam`` is the rank-one penalty strength added after each batch when
    ``perturb_enabled``; ``s_star`` locates the refinement re-entry point on
    the schedule and ``pause_sweeps`` (default ``10 m``) holds there before
    the final cool-down. ``block_moves`` mixes in valence-preserving swaps
    inside one-hot blocks, which removes the flip-only plateau traps.
    ``perturb_reset`` keeps only the latest penalty instead of accumulating.
    """

    batch_size: int = 10000
    lam: float = 5e-6
    perturb_enabled: bool = False
    reverse_enabled: bool = False
    s_star: float = 0.5
    pause_sweeps: int | None = None
    rng_seed: int = 0
    block_moves: bool = False
    perturb_reset: bool = False
    schedule: AnnealSchedule | None = None

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0 < self.s_star < 1:
            raise ValueError(f"s_star must lie strictly inside (0, 1), got {self.s_star}")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")


@dataclass(frozen=True)
class SampleRecord:
    """One sampled state with its energies under the original and the
    currently-sampled (possibly penalized) matrices."""

    bits: tuple[int, ...]
    energy_original: float
    energy_sampling: float
    iteration: int
    chain_id: int


@njit(inline="always")
def _mix(state):
    # splitmix64; uint64 arithmetic wraps
    state = state + _U64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    z = z ^ (z >> _U64(31))
    return state, z


@njit(parallel=True, cache=True)
def _metropolis_kernel(S, diag, betas, starts, seeds, block_moves):
    B, m = starts.shape
    nblocks = m // 4
    out = np.empty((B, m), dtype=np.int8)
    for b in prange(B):
        state = seeds[b]
        y = starts[b, :].copy()
        # local fields f_i = sum_j S_ij y_j (S symmetric, zero diagonal)
        f = np.zeros(m)
        for i in range(m):
            if y[i] == 1:
                for j in range(m):
                    f[j] += S[i, j]
        for t in range(betas.size):
            beta = betas[t]
            for _ in range(m):
                state, z = _mix(state)
                if block_moves and (z & _U64(1)) == _U64(1):
                    # swap two positions of one block; a no-op on equal bits
                    state, z2 = _mix(state)
                    blk = int(z2 % _U64(nblocks))
                    state, z3 = _mix(state)
                    p = int(z3 % _U64(4))
                    state, z4 = _mix(state)
                    r = (p + 1 + int(z4 % _U64(3))) % 4
                    i = 4 * blk + p
                    k = 4 * blk + r
                    if y[i] == y[k]:
                        continue
                    dyi = 1 - 2 * y[i]
                    dyk = 1 - 2 * y[k]
                    d_e = dyi * (diag[i] + f[i]) + dyk * (diag[k] + f[k]) + dyi * dyk * S[i, k]
                    accept = d_e <= 0.0
                    if not accept:
                        state, z5 = _mix(state)
                        u = (z5 >> _U64(11)) * _INV_2_53
                        accept = u < np.exp(-beta * d_e)
                    if accept:
                        y[i] += dyi
                        y[k] += dyk
                        for j in range(m):
                            f[j] += dyi * S[i, j] + dyk * S[k, j]
                else:
                    state, z2 = _mix(state)
                    i = int(z2 % _U64(m))
                    dy = 1 - 2 * y[i]
                    d_e = dy * (diag[i] + f[i])
                    accept = d_e <= 0.0
                    if not accept:
                        state, z3 = _mix(state)
                        u = (z3 >> _U64(11)) * _INV_2_53
                        accept = u < np.exp(-beta * d_e)
                    if accept:
                        y[i] += dy
                        for j in range(m):
                            f[j] += dy * S[i, j]
        out[b, :] = y
    return out


def _dense_parts(problem: QuboProblem) -> tuple[np.ndarray, np.ndarray]:
    upper = np.triu(problem.q, 1)
    return upper + upper.T, np.diag(problem.q).copy()


def _chain_seeds(seed: int, iteration: int, phase: int, count: int) -> np.ndarray:
    return np.random.SeedSequence((seed, iteration, phase)).generate_state(count, np.uint64)


def _random_starts(seed: int, iteration: int, count: int, m: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, iteration, 0))))
    return rng.integers(0, 2, size=(count, m)).astype(np.int8)


def ground_energy(problem: QuboProblem) -> float:
    """Matrix energy of any valid isomer encoding: ``-offset``."""
    return -problem.offset


def anneal_batch(
    problem: QuboProblem,
    schedule: AnnealSchedule | None = None,
    n_chains: int = 1,
    seed: int = 0,
    starts: np.ndarray | None = None,
    block_moves: bool = False,
) -> np.ndarray:
    """Forward-anneal ``n_chains`` independent chains; returns final bits."""
    m = problem.m
    if schedule is None:
        schedule = AnnealSchedule.default_for(m)
    if starts is None:
        starts = _random_starts(seed, 0, n_chains, m)
    else:
        starts = np.ascontiguousarray(starts, dtype=np.int8)
        if starts.shape != (n_chains, m):
            raise ValueError(f"starts must have shape ({n_chains}, {m}), got {starts.shape}")
    S, diag = _dense_parts(problem)
    seeds = _chain_seeds(seed, 0, 1, n_chains)
    return _metropolis_kernel(S, diag, schedule.betas(), starts, seeds, block_moves)


def simulated_anneal(
    problem: QuboProblem,
    schedule: AnnealSchedule | None = None,
    seed: int = 0,
    block_moves: bool = False,
) -> SampleRecord:
    """Run one forward-annealed chain to completion; deterministic per seed."""
    bits = anneal_batch(problem, schedule, n_chains=1, seed=seed, block_moves=block_moves)[0]
    energy = matrix_eval(problem, bits)
    return SampleRecord(
        bits=tuple(int(v) for v in bits),
        energy_original=energy,
        energy_sampling=energy,
        iteration=0,
        chain_id=0,
    )


def _reverse_betas(schedule: AnnealSchedule, s_star: float, pause_sweeps: int) -> np.ndarray:
    if not 0 < s_star < 1:
        raise ValueError(f"s_star must lie strictly inside (0, 1), got {s_star}")
    if pause_sweeps < 0:
        raise ValueError("pause_sweeps must be >= 0")
    betas = schedule.betas()
    idx = int(round(s_star * (schedule.sweeps - 1)))
    return np.concatenate([np.full(pause_sweeps, betas[idx]), betas[idx:]])


def reverse_batch(
    problem: QuboProblem,
    starts: np.ndarray,
    s_star: float = 0.5,
    pause_sweeps: int | None = None,
    schedule: AnnealSchedule | None = None,
    seed: int = 0,
    block_moves: bool = False,
) -> np.ndarray:
    """Refine each start state: re-heat to the schedule's value at
    ``s_star``, hold for ``pause_sweeps`` sweeps, then finish the cool-down."""
    m = problem.m
    if schedule is None:
        schedule = AnnealSchedule.default_for(m)
    if pause_sweeps is None:
        pause_sweeps = 10 * m
    starts = np.ascontiguousarray(starts, dtype=np.int8)
    if starts.ndim != 2 or starts.shape[1] != m:
        raise ValueError(f"starts must have shape (k, {m}), got {starts.shape}")
    S, diag = _dense_parts(problem)
    betas = _reverse_betas(schedule, s_star, pause_sweeps)
    seeds = _chain_seeds(seed, 0, 2, starts.shape[0])
    return _metropolis_kernel(S, diag, betas, starts, seeds, block_moves)


def reverse_refine(
    problem: QuboProblem,
    start,
    s_star: float = 0.5,
    pause_sweeps: int | None = None,
    schedule: AnnealSchedule | None = None,
    seed: int = 0,
    block_moves: bool = False,
) -> SampleRecord:
    """Local search around one candidate state (see :func:`reverse_batch`)."""
    start = np.asarray(start, dtype=np.int8)
    if start.shape != (problem.m,):
        raise ValueError(f"start must have length {problem.m}, got shape {start.shape}")
    bits = reverse_batch(
        problem, start[None, :], s_star=s_star, pause_sweeps=pause_sweeps,
        schedule=schedule, seed=seed, block_moves=block_moves,
    )[0]
    energy = matrix_eval(problem, bits)
    return SampleRecord(
        bits=tuple(int(v) for v in bits),
        energy_original=energy,
        energy_sampling=energy,
        iteration=0,
        chain_id=0,
    )


@dataclass
class IterationStats:
    """Per-batch tallies reported by the pipeline."""

    ground_hits: int
    unique_isomers_cumulative: int
    nonconstructible_skips: int
    max_frequency_state: str | None


@dataclass
class PipelineReport:
    """Deterministic transcript of a pipeline run."""

    n: int
    config: SamplerConfig
    iterations_used: int
    isomers_found: int
    per_iteration: list[IterationStats] = field(default_factory=list)
    records: list[SampleRecord] | None = None

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "config": asdict(self.config),
            "iterations_used": self.iterations_used,
            "isomers_found": self.isomers_found,
            "per_iteration": [asdict(s) for s in self.per_iteration],
        }
        return json.dumps(doc, sort_keys=True, indent=2)


def _bits_to_str(row: np.ndarray) -> str:
    return "".join("1" if v else "0" for v in row)


def run_pipeline(
    problem: QuboProblem,
    config: SamplerConfig,
    registry: IsomerRegistry,
    target_count: int | None = None,
    max_iterations: int = 20,
    collect_records: bool = False,
) -> PipelineReport:
    """Iterate sample / filter / decode / register / penalize batches.

    Each iteration draws ``batch_size`` forward-annealed samples of the
    current (possibly penalized) matrix, optionally refines every one of
    them, keeps those whose energy under the ORIGINAL matrix is the ground
    energy, decodes and registers the survivors, and finally penalizes the
    most frequent ground-state bit vector for the next batch. Filtering on
    the original matrix is what keeps "ground energy <=> isomer" exact once
    penalties start splitting the degeneracy. Stops when the registry holds
    ``target_count`` isomers or after ``max_iterations`` batches.
    """
    m = problem.m
    schedule = config.schedule or AnnealSchedule.default_for(m)
    pause = config.pause_sweeps if config.pause_sweeps is not None else 10 * m
    original = problem
    sampling = problem
    ground = ground_energy(problem)
    report = PipelineReport(
        n=problem.n, config=config, iterations_used=0,
        isomers_found=len(registry), records=[] if collect_records else None,
    )

    for iteration in range(1, max_iterations + 1):
        starts = _random_starts(config.rng_seed, iteration, config.batch_size, m)
        seeds = _chain_seeds(config.rng_seed, iteration, 1, config.batch_size)
        S, diag = _dense_parts(sampling)
        bits = _metropolis_kernel(S, diag, schedule.betas(), starts, seeds, config.block_moves)
        if config.reverse_enabled:
            betas = _reverse_betas(schedule, config.s_star, pause)
            seeds2 = _chain_seeds(config.rng_seed, iteration, 2, config.batch_size)
            bits = _metropolis_kernel(S, diag, betas, bits, seeds2, config.block_moves)

        energies = matrix_eval_batch(original, bits)
        if collect_records:
            sampling_energies = matrix_eval_batch(sampling, bits)
            for chain in range(config.batch_size):
                report.records.append(
                    SampleRecord(
                        bits=tuple(int(v) for v in bits[chain]),
                        energy_original=float(energies[chain]),
                        energy_sampling=float(sampling_energies[chain]),
                        iteration=iteration,
                        chain_id=chain,
                    )
                )

        hit_mask = np.abs(energies - ground) <= GROUND_TOL
        ground_hits = int(hit_mask.sum())
        skips = 0
        best_state: np.ndarray | None = None
        best_count = 0
        if ground_hits:
            # np.unique sorts rows lexicographically, so the first strict
            # maximum is also the lexicographically smallest tie-winner
            unique_rows, counts = np.unique(bits[hit_mask], axis=0, return_counts=True)
            for row, count in zip(unique_rows, counts):
                count = int(count)
                if count > best_count:
                    best_count = count
                    best_state = row
                seq = decode_onehot(row, problem.n)
                try:
                    tree = sequence_to_tree(seq)
                except NonConstructible:
                    skips += count
                    continue
                registry.register(tree, iteration=iteration, count=count)

        report.per_iteration.append(
            IterationStats(
                ground_hits=ground_hits,
                unique_isomers_cumulative=len(registry),
                nonconstructible_skips=skips,
                max_frequency_state=None if best_state is None else _bits_to_str(best_state),
            )
        )
        report.iterations_used = iteration
        report.isomers_found = len(registry)

        if target_count is not None and len(registry) >= target_count:
            break
        if config.perturb_enabled and config.lam > 0 and best_state is not None:
            base = original if config.perturb_reset else sampling
            sampling = perturb(base, best_state, config.lam)

    return report


def method_label(config: SamplerConfig) -> str:
    """Short name for the sampling strategy: FA / RA with optional +QP."""
    label = "RA" if config.reverse_enabled else "FA"
    if config.perturb_enabled:
        label += "+QP"
    return label
