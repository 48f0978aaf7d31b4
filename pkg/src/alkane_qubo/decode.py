"""Decoding of one-hot samples into degree sequences, trees and isomers.

A ground-state bit vector decodes to an ordered degree sequence, which is
realized as a labeled tree by a deterministic last-fit construction. Trees
are deduplicated up to isomorphism through a center-rooted canonical
certificate, and distinct isomers accumulate in a registry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "OneHotViolation",
    "NonConstructible",
    "DegreeSequence",
    "MolecularTree",
    "IsomerEntry",
    "IsomerRegistry",
    "decode_onehot",
    "encode_sequence",
    "sequence_to_tree",
    "canonicalize",
]


class OneHotViolation(ValueError):
    """A 4-bit block holds zero or several set bits (an excited-state sample)."""

    def __init__(self, block: int):
        self.block = block
        super().__init__(f"block {block} is not one-hot")


class NonConstructible(ValueError):
    """Last-fit construction found no earlier node with spare valence.

    The offending sequence is still a legitimate ground state; other
    permutations of the same degree multiset realize the isomer.
    """

    def __init__(self, position: int):
        self.position = position
        super().__init__(f"no open attachment point for node {position}")


@dataclass(frozen=True)
class DegreeSequence:
    """Ordered carbon degrees ``(x_1, ..., x_n)`` with unit endpoints."""

    degrees: tuple[int, ...]

    def __post_init__(self) -> None:
        d = self.degrees
        if len(d) < 2:
            raise ValueError("degree sequence needs at least two carbons")
        if d[0] != 1 or d[-1] != 1:
            raise ValueError(f"endpoint degrees must be 1, got {d[0]} and {d[-1]}")
        if any(not 1 <= x <= 4 for x in d):
            raise ValueError(f"degrees must lie in 1..4: {d}")
        if sum(d) != 2 * (len(d) - 1):
            raise ValueError(f"degree sum {sum(d)} != 2(n-1) = {2 * (len(d) - 1)}")

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def interior(self) -> tuple[int, ...]:
        return self.degrees[1:-1]


@dataclass(frozen=True)
class MolecularTree:
    """Carbon skeleton: a tree on nodes ``1..n`` with maximum degree 4.

    Hydrogens are implicit: carbon ``i`` carries ``4 - degree(i)`` of them,
    which totals ``2n + 2`` for any tree.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    degrees: tuple[int, ...]

    def __post_init__(self) -> None:
        n = self.n
        if len(self.edges) != n - 1:
            raise ValueError(f"tree on {n} nodes needs {n - 1} edges, got {len(self.edges)}")
        if len(self.degrees) != n:
            raise ValueError("degree cache length mismatch")
        deg = [0] * (n + 1)
        adj = {i: [] for i in range(1, n + 1)}
        for a, b in self.edges:
            if not (1 <= a < b <= n):
                raise ValueError(f"edge ({a}, {b}) must satisfy 1 <= a < b <= {n}")
            deg[a] += 1
            deg[b] += 1
            adj[a].append(b)
            adj[b].append(a)
        if tuple(deg[1:]) != self.degrees:
            raise ValueError("degree cache does not match edges")
        if max(deg[1:]) > 4:
            raise ValueError("maximum carbon degree is 4")
        # n-1 edges + connectivity <=> tree
        seen = {1}
        stack = [1]
        while stack:
            for v in adj[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(seen) != n:
            raise ValueError("edge list is not connected")

    @property
    def hydrogen_count(self) -> int:
        return sum(4 - d for d in self.degrees)

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {i: [] for i in range(1, self.n + 1)}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj


def decode_onehot(y, n: int) -> DegreeSequence:
    """Read interior degrees off a one-hot bit vector.

    Bit ``j`` (0-based) of block ``i`` encodes degree ``j + 1`` for interior
    carbon ``i``. Raises :class:`OneHotViolation` with the 0-based block
    index if any block does not hold exactly one set bit.
    """
    y = np.asarray(y)
    m = 4 * (n - 2)
    if y.shape != (m,):
        raise ValueError(f"bit vector must have length {m}, got shape {y.shape}")
    interior = []
    for b in range(n - 2):
        block = y[4 * b : 4 * b + 4]
        if int(block.sum()) != 1:
            raise OneHotViolation(b)
        interior.append(int(np.argmax(block)) + 1)
    return DegreeSequence(degrees=(1, *interior, 1))


def encode_sequence(seq: DegreeSequence) -> np.ndarray:
    """One-hot encoding of the interior degrees (inverse of decode_onehot)."""
    bits = np.zeros(4 * (seq.n - 2), dtype=np.int8)
    for i, d in enumerate(seq.interior):
        bits[4 * i + d - 1] = 1
    return bits


def sequence_to_tree(seq: DegreeSequence) -> MolecularTree:
    """Realize an ordered degree sequence as a tree by last-fit attachment.

    Nodes are processed in sequence order. Node 1 opens with its full
    degree as capacity; every later node attaches by one edge to the
    highest-indexed earlier node that still has spare capacity, then keeps
    ``degree - 1`` units for future arrivals. Because the degree sum is
    exactly ``2(n-1)``, a completed construction consumes all capacity and
    the node degrees match the sequence. Raises :class:`NonConstructible`
    with the 1-based position when no earlier node has room; every isomer
    remains reachable through at least one permutation, since a preorder
    walk from a leaf lists its nodes in an order this construction rebuilds.
    """
    degrees = seq.degrees
    n = seq.n
    capacity = [0] * (n + 1)
    capacity[1] = degrees[0]
    edges = []
    for i in range(2, n + 1):
        parent = 0
        for j in range(i - 1, 0, -1):
            if capacity[j] > 0:
                parent = j
                break
        if parent == 0:
            raise NonConstructible(i)
        capacity[parent] -= 1
        capacity[i] = degrees[i - 1] - 1
        edges.append((parent, i))
    return MolecularTree(n=n, edges=tuple(sorted(edges)), degrees=degrees)


def _centers(adj: dict[int, list[int]], n: int) -> list[int]:
    # peel leaves layer by layer; the last one or two nodes are the centers
    if n == 1:
        return [1]
    deg = {v: len(adj[v]) for v in adj}
    layer = [v for v in adj if deg[v] <= 1]
    removed = len(layer)
    while removed < n:
        nxt = []
        for u in layer:
            deg[u] = 0
            for v in adj[u]:
                if deg[v] > 0:
                    deg[v] -= 1
                    if deg[v] == 1:
                        nxt.append(v)
        removed += len(nxt)
        layer = nxt
    return layer


def _rooted_certificate(root: int, adj: dict[int, list[int]]) -> str:
    # iterative post-order; children certificates sorted before joining
    order = []
    stack = [(root, 0)]
    parent = {root: 0}
    while stack:
        u, p = stack.pop()
        order.append(u)
        for v in adj[u]:
            if v != p:
                parent[v] = u
                stack.append((v, u))
    cert: dict[int, str] = {}
    for u in reversed(order):
        children = sorted(cert[v] for v in adj[u] if v != parent[u])
        cert[u] = "(" + "".join(children) + ")"
    return cert[root]


def canonicalize(tree: MolecularTree) -> str:
    """Label-independent certificate: equal iff the trees are isomorphic.

    The tree is rooted at its center; for bicentral trees the smaller of
    the two center certificates is taken. Each node renders as a
    parenthesized concatenation of its sorted child certificates.
    """
    adj = tree.adjacency()
    return min(_rooted_certificate(c, adj) for c in _centers(adj, tree.n))


@dataclass
class IsomerEntry:
    """Representative tree plus bookkeeping for one distinct isomer."""

    tree: MolecularTree
    count: int
    first_seen_iteration: int


class IsomerRegistry:
    """Deduplicated isomer collection keyed by canonical certificate.

    Mutation is single-writer: concurrent samplers funnel candidates to one
    owning registry.
    """

    def __init__(self) -> None:
        self._entries: dict[str, IsomerEntry] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, certificate: str) -> bool:
        return certificate in self._entries

    def register(self, tree: MolecularTree, iteration: int = 0, count: int = 1) -> bool:
        """Insert or increment by certificate; True if previously unseen."""
        cert = canonicalize(tree)
        entry = self._entries.get(cert)
        if entry is None:
            self._entries[cert] = IsomerEntry(tree=tree, count=count, first_seen_iteration=iteration)
            return True
        entry.count += count
        return False

    def entries(self) -> dict[str, IsomerEntry]:
        return dict(self._entries)

    def certificates(self) -> list[str]:
        return sorted(self._entries)

    def to_jsonl(self) -> str:
        """One JSON object per isomer, sorted by certificate for stable diffs."""
        lines = []
        for cert in sorted(self._entries):
            entry = self._entries[cert]
            lines.append(
                json.dumps(
                    {
                        "certificate": cert,
                        "degree_multiset": sorted(entry.tree.degrees),
                        "edges": [list(e) for e in entry.tree.edges],
                        "count": entry.count,
                        "first_seen_iteration": entry.first_seen_iteration,
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + ("\n" if lines else "")
