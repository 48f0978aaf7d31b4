"""QUBO construction, evaluation and transforms for the isomer search.

The carbon skeleton of an alkane with ``n`` carbons is a tree whose degree
sequence ``(x_1, ..., x_n)`` satisfies ``x_1 = x_n = 1``, ``1 <= x_j <= 4``
and ``sum(x_j) = 2(n-1)``. Each of the ``n - 2`` interior carbons is one-hot
encoded in a 4-bit block (bit ``j`` set means degree ``j + 1``), giving
``m = 4(n-2)`` binary variables. Both constraints enter the objective as
weighted squared violations, so every valid degree assignment sits at
objective zero, i.e. at matrix energy ``-offset``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PenaltyConfig",
    "QuboProblem",
    "IsingProblem",
    "num_variables",
    "degree_values",
    "build_qubo",
    "objective_eval",
    "matrix_eval",
    "matrix_eval_batch",
    "qubo_to_ising",
    "ising_from_matrix",
    "ising_eval",
    "scale_ising",
    "perturb",
    "problem_to_json",
    "problem_from_json",
]


@dataclass(frozen=True)
class PenaltyConfig:
    """Positive penalty weights for the two constraint families.

    ``p1`` weighs the per-block one-hot constraints, ``p2`` the interior
    degree-sum constraint. Any positive values produce the same ground-state
    set because the objective is a sum of squared violations.
    """

    p1: float = 1.0
    p2: float = 1.0

    def __post_init__(self) -> None:
        if not (self.p1 > 0 and self.p2 > 0):
            raise ValueError(f"penalty weights must be positive, got p1={self.p1}, p2={self.p2}")


@dataclass(frozen=True)
class QuboProblem:
    """Upper-triangular QUBO ``min y^T q y`` over ``m = 4(n-2)`` binaries.

    ``offset`` is the constant completing the squared-penalty objective:
    for every bit vector ``y``, ``y^T q y + offset`` equals the direct
    constraint-violation objective and is therefore >= 0, with equality
    exactly on the valid degree assignments.
    """

    n: int
    q: np.ndarray
    offset: float
    penalties: PenaltyConfig

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError(f"need n >= 3 carbons (no interior carbons for n={self.n})")
        q = np.array(self.q, dtype=np.float64)
        m = num_variables(self.n)
        if q.shape != (m, m):
            raise ValueError(f"coefficient matrix must be {m}x{m}, got {q.shape}")
        if not np.isfinite(q).all():
            raise ValueError("coefficient matrix has non-finite entries")
        if np.any(np.tril(q, -1) != 0.0):
            raise ValueError("coefficient matrix must be upper triangular")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def m(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True)
class IsingProblem:
    """Spin form ``sum_i h_i s_i + sum_{i<j} j_ij s_i s_j + offset``.

    Produced from a :class:`QuboProblem` via the substitution
    ``s = 2y - 1``; the offset is chosen so that the total Ising energy of
    ``2y - 1`` equals the QUBO matrix energy ``y^T q y``.
    """

    h: np.ndarray
    j: np.ndarray
    offset: float

    def __post_init__(self) -> None:
        h = np.array(self.h, dtype=np.float64)
        j = np.array(self.j, dtype=np.float64)
        m = h.shape[0]
        if j.shape != (m, m):
            raise ValueError(f"coupling matrix must be {m}x{m}, got {j.shape}")
        if np.any(np.tril(j) != 0.0):
            raise ValueError("couplings must be strictly upper triangular")
        h.setflags(write=False)
        j.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "j", j)

    @property
    def m(self) -> int:
        return self.h.shape[0]


def num_variables(n: int) -> int:
    """Number of binary variables for an ``n``-carbon problem: ``4(n-2)``."""
    if n < 3:
        raise ValueError(f"need n >= 3 carbons, got {n}")
    return 4 * (n - 2)


def degree_values(m: int) -> np.ndarray:
    """Degree encoded by each variable: 1,2,3,4 repeating per block."""
    return np.arange(m, dtype=np.float64) % 4 + 1.0


def _check_bits(y, m: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != m:
        raise ValueError(f"bit vector must have length {m}, got shape {y.shape}")
    return y.astype(np.float64)


def build_qubo(n: int, penalties: PenaltyConfig | None = None) -> QuboProblem:
    """Assemble the penalty QUBO for an ``n``-carbon skeleton.

    Diagonal entries carry ``p2*a_i^2 - 4(n-2)*p2*a_i - p1`` where ``a_i``
    is the degree encoded by variable ``i``; couplings are
    ``2*p2*a_i*a_j`` plus an extra ``2*p1`` inside a one-hot block. The
    constant completing the squares is ``4(n-2)^2*p2 + (n-2)*p1``.
    """
    if penalties is None:
        penalties = PenaltyConfig()
    m = num_variables(n)
    p1, p2 = penalties.p1, penalties.p2
    alpha = degree_values(m)

    q = 2.0 * p2 * np.triu(np.outer(alpha, alpha), 1)
    same_block = np.arange(m) // 4
    q += 2.0 * p1 * np.triu(same_block[:, None] == same_block[None, :], 1)
    np.fill_diagonal(q, p2 * alpha**2 - 4.0 * (n - 2) * p2 * alpha - p1)

    offset = 4.0 * (n - 2) ** 2 * p2 + (n - 2) * p1
    return QuboProblem(n=n, q=q, offset=offset, penalties=penalties)


def objective_eval(y, n: int, penalties: PenaltyConfig | None = None) -> float:
    """Direct constraint-violation objective of a bit vector.

    ``p1 * sum_blocks (block_sum - 1)^2 + p2 * (sum_i a_i y_i - 2(n-2))^2``.
    Always >= 0; zero exactly when every block is one-hot and the encoded
    interior degrees sum to ``2(n-2)``.
    """
    if penalties is None:
        penalties = PenaltyConfig()
    m = num_variables(n)
    y = _check_bits(y, m)
    block_sums = y.reshape(n - 2, 4).sum(axis=1)
    onehot_term = float(((block_sums - 1.0) ** 2).sum())
    degree_term = float(degree_values(m) @ y) - 2.0 * (n - 2)
    return penalties.p1 * onehot_term + penalties.p2 * degree_term**2


def matrix_eval(problem: QuboProblem, y) -> float:
    """Quadratic form ``y^T q y``; equals ``objective_eval(y) - offset``."""
    y = _check_bits(y, problem.m)
    return float(y @ problem.q @ y)


def matrix_eval_batch(problem: QuboProblem, ys) -> np.ndarray:
    """Vectorized ``y^T q y`` over rows of ``ys`` (shape ``(k, m)``)."""
    ys = np.asarray(ys, dtype=np.float64)
    if ys.ndim != 2 or ys.shape[1] != problem.m:
        raise ValueError(f"expected shape (k, {problem.m}), got {ys.shape}")
    return np.einsum("ki,ij,kj->k", ys, problem.q, ys)


def ising_from_matrix(q) -> IsingProblem:
    """Spin form of an arbitrary upper-triangular QUBO matrix.

    Substituting ``y = (s + 1) / 2`` into ``y^T q y`` gives fields
    ``q_ii/2 + sum_j q_ij/4``, couplings ``q_ij/4`` and a constant
    ``sum_i q_ii/2 + sum_{i<j} q_ij/4``; the total Ising energy of
    ``2y - 1`` then equals ``y^T q y`` exactly, on every state.
    """
    q = np.asarray(q, dtype=np.float64)
    diag = np.diag(q)
    upper = np.triu(q, 1)
    h = diag / 2.0 + (upper.sum(axis=1) + upper.sum(axis=0)) / 4.0
    j = upper / 4.0
    offset = float(diag.sum() / 2.0 + upper.sum() / 4.0)
    return IsingProblem(h=h, j=j, offset=offset)


def qubo_to_ising(problem: QuboProblem) -> IsingProblem:
    """Transform to spin variables via ``s = 2y - 1``.

    The returned offset makes total Ising energy equal the QUBO matrix
    energy on every state, so the argmin sets correspond bijectively.
    """
    return ising_from_matrix(problem.q)


def ising_eval(problem: IsingProblem, spins) -> float:
    """Total Ising energy (including offset) of a +/-1 spin vector."""
    s = np.asarray(spins, dtype=np.float64)
    if s.shape != (problem.m,):
        raise ValueError(f"spin vector must have length {problem.m}, got shape {s.shape}")
    return float(problem.h @ s + s @ problem.j @ s + problem.offset)


def scale_ising(problem: IsingProblem, h_bound: float = 2.0, j_bound: float = 1.0) -> IsingProblem:
    """Uniformly rescale fields, couplings and offset into the given ranges.

    One common factor multiplies everything, so the energy landscape keeps
    its exact shape (all energies scale together) and the state ordering is
    unchanged. Problems already inside the bounds, and all-zero problems,
    are returned unchanged. A tighter negative-coupling floor can be imposed
    by passing the floor magnitude as ``j_bound``.
    """
    if not (h_bound > 0 and j_bound > 0):
        raise ValueError("bounds must be positive")
    h_max = float(np.max(np.abs(problem.h))) if problem.m else 0.0
    j_max = float(np.max(np.abs(problem.j))) if problem.m else 0.0
    if h_max == 0.0 and j_max == 0.0:
        return problem
    scale = 1.0
    if h_max > 0:
        scale = min(scale, h_bound / h_max)
    if j_max > 0:
        scale = min(scale, j_bound / j_max)
    if scale == 1.0:
        return problem
    return IsingProblem(h=problem.h * scale, j=problem.j * scale, offset=problem.offset * scale)


def perturb(problem: QuboProblem, psi, lam: float) -> QuboProblem:
    """Add ``lam`` times the outer product of a bit vector with itself.

    For every ``y`` the matrix energy shifts by exactly
    ``lam * (psi . y)^2``; the offset is untouched and the input problem is
    not modified. Used to penalize re-sampling an already-found ground state.
    """
    if not lam > 0:
        raise ValueError(f"perturbation strength must be positive, got {lam}")
    psi = _check_bits(psi, problem.m)
    outer = np.outer(psi, psi)
    bump = 2.0 * np.triu(outer, 1) + np.diag(np.diag(outer))
    return QuboProblem(
        n=problem.n,
        q=problem.q + lam * bump,
        offset=problem.offset,
        penalties=problem.penalties,
    )


def problem_to_json(problem: QuboProblem) -> str:
    """Serialize to ``{n, p1, p2, entries, offset}`` with 0-based ``i <= j``.

    Only nonzero coefficients are listed; the round trip is bit-exact for
    any value representable in double precision.
    """
    rows, cols = np.nonzero(problem.q)
    entries = [
        [int(i), int(j), float(problem.q[i, j])]
        for i, j in sorted(zip(rows.tolist(), cols.tolist()))
    ]
    doc = {
        "n": problem.n,
        "p1": problem.penalties.p1,
        "p2": problem.penalties.p2,
        "entries": entries,
        "offset": problem.offset,
    }
    return json.dumps(doc, sort_keys=True)


def problem_from_json(text: str) -> QuboProblem:
    """Inverse of :func:`problem_to_json`."""
    doc = json.loads(text)
    n = int(doc["n"])
    m = num_variables(n)
    q = np.zeros((m, m))
    for i, j, value in doc["entries"]:
        if not (0 <= i <= j < m):
            raise ValueError(f"entry ({i}, {j}) outside upper triangle of {m}x{m} matrix")
        q[i, j] = value
    return QuboProblem(
        n=n,
        q=q,
        offset=float(doc["offset"]),
        penalties=PenaltyConfig(p1=float(doc["p1"]), p2=float(doc["p2"])),
    )
