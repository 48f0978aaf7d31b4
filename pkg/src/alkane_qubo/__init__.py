"""Enumerate alkane structural isomers by sampling a degenerate QUBO.

The package builds the penalty QUBO whose ground states one-hot encode all
valid carbon degree sequences of C_n H_{2n+2}, samples it with annealing
style Metropolis chains (forward, refined, and iteratively penalized),
decodes samples into molecular trees, and deduplicates them up to
isomorphism — with exhaustive brute-force oracles to validate every step.
"""

from .analytics import (
    CoverageStats,
    EnergyHistogram,
    HammingReport,
    coverage_experiment,
    energy_histogram,
    hamming_report,
    representative_encodings,
)
from .decode import (
    DegreeSequence,
    IsomerEntry,
    IsomerRegistry,
    MolecularTree,
    NonConstructible,
    OneHotViolation,
    canonicalize,
    decode_onehot,
    encode_sequence,
    sequence_to_tree,
)
from .oracle import (
    brute_force_ground_states,
    brute_force_isomers,
    constraint_check,
    enumerate_feasible_interiors,
)
from .qubo import (
    IsingProblem,
    PenaltyConfig,
    QuboProblem,
    build_qubo,
    ising_eval,
    ising_from_matrix,
    matrix_eval,
    matrix_eval_batch,
    num_variables,
    objective_eval,
    perturb,
    problem_from_json,
    problem_to_json,
    qubo_to_ising,
    scale_ising,
)
from .sampler import (
    AnnealSchedule,
    PipelineReport,
    SampleRecord,
    SamplerConfig,
    anneal_batch,
    ground_energy,
    method_label,
    reverse_refine,
    run_pipeline,
    simulated_anneal,
)

__version__ = "0.1.0"
