"""Independent brute-force ground truth.

Two exact references validate everything else: exhaustive enumeration of
all QUBO states (Gray-code order with incremental energy updates), and a
direct combinatorial generator of all n-node trees with maximum degree 4
(canonical rooted shapes assembled at the centroid). Nothing here goes
through the sampler or the penalty matrix assembly beyond plain evaluation.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement, product

import numpy as np
from numba import njit

from .decode import IsomerRegistry, MolecularTree
from .qubo import QuboProblem, matrix_eval_batch

__all__ = [
    "constraint_check",
    "enumerate_feasible_interiors",
    "brute_force_ground_states",
    "brute_force_isomers",
    "MAX_BRUTE_FORCE_BITS",
    "MAX_BRUTE_FORCE_CARBONS",
]

MAX_BRUTE_FORCE_BITS = 24
MAX_BRUTE_FORCE_CARBONS = 12


def constraint_check(y, n: int) -> bool:
    """True iff every block is one-hot and interior degrees sum to 2(n-2).

    Agrees with ``objective_eval(y, n) == 0`` on every input, for any
    positive penalties.
    """
    y = np.asarray(y)
    m = 4 * (n - 2)
    if y.shape != (m,):
        raise ValueError(f"bit vector must have length {m}, got shape {y.shape}")
    blocks = y.reshape(n - 2, 4)
    if not np.all(blocks.sum(axis=1) == 1):
        return False
    degrees = blocks.argmax(axis=1) + 1
    return int(degrees.sum()) == 2 * (n - 2)


def enumerate_feasible_interiors(n: int):
    """All interior degree tuples in lexicographic order.

    Yields every composition of ``2(n-2)`` into ``n - 2`` parts from 1..4,
    i.e. exactly the decodings of the QUBO ground states.
    """
    target = 2 * (n - 2)
    for interior in product(range(1, 5), repeat=n - 2):
        if sum(interior) == target:
            yield interior


@njit(cache=True)
def _gray_best(S, diag):
    m = diag.size
    y = np.zeros(m, np.int8)
    f = np.zeros(m)
    e = 0.0
    best = 0.0
    total = np.int64(1) << m
    for k in range(1, total):
        kk = k
        i = 0
        while kk & 1 == 0:
            kk >>= 1
            i += 1
        dy = 1 - 2 * y[i]
        e += dy * (diag[i] + f[i])
        y[i] += dy
        for j in range(m):
            f[j] += dy * S[i, j]
        if e < best:
            best = e
    return best


@njit(cache=True)
def _gray_collect(S, diag, threshold):
    m = diag.size
    y = np.zeros(m, np.int8)
    f = np.zeros(m)
    e = 0.0
    total = np.int64(1) << m
    count = 1 if 0.0 <= threshold else 0
    for k in range(1, total):
        kk = k
        i = 0
        while kk & 1 == 0:
            kk >>= 1
            i += 1
        dy = 1 - 2 * y[i]
        e += dy * (diag[i] + f[i])
        y[i] += dy
        for j in range(m):
            f[j] += dy * S[i, j]
        if e <= threshold:
            count += 1
    out = np.empty(count, np.int64)
    pos = 0
    if 0.0 <= threshold:
        out[pos] = 0
        pos += 1
    y[:] = 0
    f[:] = 0.0
    e = 0.0
    for k in range(1, total):
        kk = k
        i = 0
        while kk & 1 == 0:
            kk >>= 1
            i += 1
        dy = 1 - 2 * y[i]
        e += dy * (diag[i] + f[i])
        y[i] += dy
        for j in range(m):
            f[j] += dy * S[i, j]
        if e <= threshold:
            out[pos] = k
            pos += 1
    return out


def brute_force_ground_states(problem: QuboProblem, tol: float = 1e-6) -> np.ndarray:
    """Exact argmin set of ``y^T q y`` over all ``2^m`` states.

    Walks the hypercube in Gray-code order with O(m) incremental energy
    updates, then re-evaluates the near-minimal candidates from scratch to
    strip any accumulated rounding. Rows come back lexicographically
    sorted. Refuses ``m > 24``.
    """
    m = problem.m
    if m > MAX_BRUTE_FORCE_BITS:
        raise ValueError(f"refusing exhaustive enumeration for m={m} > {MAX_BRUTE_FORCE_BITS}")
    upper = np.triu(problem.q, 1)
    S = upper + upper.T
    diag = np.diag(problem.q).copy()
    best = _gray_best(S, diag)
    ks = _gray_collect(S, diag, best + tol)
    codes = ks ^ (ks >> 1)
    bits = ((codes[:, None] >> np.arange(m, dtype=np.int64)) & 1).astype(np.int8)
    energies = matrix_eval_batch(problem, bits)
    exact_best = energies.min()
    keep = np.abs(energies - exact_best) <= tol * max(1.0, abs(exact_best))
    bits = bits[keep]
    order = np.lexsort(bits.T[::-1])
    return bits[order]


def _partitions(total: int, max_parts: int, max_part: int):
    """Non-increasing positive partitions of ``total`` into <= max_parts parts."""
    if total == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(min(total, max_part), 0, -1):
        for rest in _partitions(total - first, max_parts - 1, first):
            yield (first, *rest)


def _child_multisets(total: int, max_parts: int, max_part: int):
    """Sorted child-shape tuples covering ``total`` nodes, each exactly once.

    Sizes run over partitions; within each run of equal sizes the shapes
    are an unordered choice with repetition, so no multiset repeats.
    """
    for part in _partitions(total, max_parts, max_part):
        pools = []
        start = 0
        while start < len(part):
            stop = start
            while stop < len(part) and part[stop] == part[start]:
                stop += 1
            pools.append(combinations_with_replacement(_rooted_shapes(part[start], 3), stop - start))
            start = stop
        for chosen in product(*pools):
            yield tuple(sorted(c for group in chosen for c in group))


@lru_cache(maxsize=None)
def _rooted_shapes(size: int, max_children: int) -> tuple:
    """Canonical shapes of rooted trees on ``size`` nodes.

    The root may hold up to ``max_children`` subtrees; every other node up
    to 3 (its fourth valence slot points at the parent). A shape is the
    sorted tuple of its child shapes, so each unordered rooted tree is
    produced exactly once.
    """
    if size == 1:
        return ((),)
    return tuple(_child_multisets(size - 1, max_children, size - 1))


def _shape_to_tree(shape, n: int, second_root=None) -> MolecularTree:
    """Lay out a rooted shape (plus optional sibling root) as labeled edges."""
    edges = []
    counter = [1]

    def grow(node_shape, label):
        for child in node_shape:
            counter[0] += 1
            edges.append((label, counter[0]))
            grow(child, counter[0])

    grow(shape, 1)
    if second_root is not None:
        other = counter[0] + 1
        counter[0] = other
        edges.append((1, other))
        grow(second_root, other)
    deg = [0] * (n + 1)
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    return MolecularTree(n=n, edges=tuple(sorted(tuple(sorted(e)) for e in edges)), degrees=tuple(deg[1:]))


def brute_force_isomers(n: int) -> IsomerRegistry:
    """Every unlabeled n-node tree with maximum degree 4, as a registry.

    Free trees are generated once each by rooting at the centroid: a tree
    has either a unique centroid (all branches hold at most floor((n-1)/2)
    nodes) or a centroid edge splitting it into two halves of n/2 nodes.
    Refuses ``n > 12`` to stay at desk scale.
    """
    if n < 1:
        raise ValueError(f"need at least one carbon, got {n}")
    if n > MAX_BRUTE_FORCE_CARBONS:
        raise ValueError(f"refusing tree enumeration for n={n} > {MAX_BRUTE_FORCE_CARBONS}")
    registry = IsomerRegistry()
    for children in _child_multisets(n - 1, 4, (n - 1) // 2):
        registry.register(_shape_to_tree(children, n))
    if n % 2 == 0 and n >= 2:
        for a, b in combinations_with_replacement(_rooted_shapes(n // 2, 3), 2):
            registry.register(_shape_to_tree(a, n, second_root=b))
    return registry
