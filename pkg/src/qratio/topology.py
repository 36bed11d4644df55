"""Directed communication graphs: generation, connectivity, diameter, file I/O.

Nodes are dense 0-based integers internally; the edge-list file format is
1-based. An edge (j, i) means node j receives from node i, so a directed
path from i to j walks sender-to-receiver links.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Digraph",
    "GraphFormatError",
    "NotStronglyConnectedError",
    "generate_random_digraph",
    "is_strongly_connected",
    "diameter",
    "load_digraph",
    "save_digraph",
]

# Row-block size for the reachability matmuls; bounds peak memory.
_MATMUL_BLOCK = 4096


class GraphFormatError(ValueError):
    """Malformed edge-list text: bad header, bad tokens, id out of range, self-edge."""


class NotStronglyConnectedError(ValueError):
    """The operation requires a strongly connected digraph."""


class Digraph:
    """Immutable directed graph over nodes 0..n-1, self-edges excluded.

    Neighbor arrays are kept sorted and deduplicated in CSR form for both
    directions. Strong connectivity and the diameter are computed on first
    use and cached; instances are safe for concurrent reads afterwards.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] | np.ndarray) -> None:
        if n < 1:
            raise ValueError(f"node count must be >= 1, got {n}")
        arr = np.asarray(edges if isinstance(edges, np.ndarray) else list(edges), dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("edges must be (receiver, sender) pairs")
        if arr.size:
            if arr.min() < 0 or arr.max() >= n:
                raise ValueError("edge endpoint out of range")
            if (arr[:, 0] == arr[:, 1]).any():
                raise ValueError("self-edges are not allowed")
            arr = np.unique(arr, axis=0)  # sorts by (receiver, sender)
        self.node_count = n
        receivers = arr[:, 0].astype(np.int32)
        senders = arr[:, 1].astype(np.int32)
        self._in_flat = senders
        self._in_indptr = _counts_to_indptr(receivers, n)
        out_order = np.lexsort((receivers, senders))
        self._out_flat = receivers[out_order]
        self._out_indptr = _counts_to_indptr(senders[out_order], n)
        self._diameter: int | None = None
        self._strong: bool | None = None

    @classmethod
    def _from_out_rows(cls, n: int, rows: Sequence[np.ndarray]) -> "Digraph":
        # Fast path for generated graphs: rows[i] holds the sorted, unique,
        # self-free receivers of sender i.
        g = object.__new__(cls)
        g.node_count = n
        lens = np.fromiter((len(r) for r in rows), dtype=np.int64, count=n)
        g._out_flat = np.concatenate(rows).astype(np.int32) if lens.sum() else np.empty(0, np.int32)
        g._out_indptr = np.concatenate(([0], np.cumsum(lens)))
        senders_flat = np.repeat(np.arange(n, dtype=np.int32), lens)
        order = np.argsort(g._out_flat, kind="stable")
        g._in_flat = senders_flat[order]
        g._in_indptr = _counts_to_indptr(g._out_flat[order], n)
        g._diameter = None
        g._strong = None
        return g

    @property
    def edge_count(self) -> int:
        return int(self._out_indptr[-1])

    def out_neighbors(self, i: int) -> np.ndarray:
        """Sorted receivers of node i (read-only view)."""
        return self._out_flat[self._out_indptr[i]:self._out_indptr[i + 1]]

    def in_neighbors(self, j: int) -> np.ndarray:
        """Sorted senders of node j (read-only view)."""
        return self._in_flat[self._in_indptr[j]:self._in_indptr[j + 1]]

    def out_degree(self, i: int) -> int:
        return int(self._out_indptr[i + 1] - self._out_indptr[i])

    def in_degree(self, j: int) -> int:
        return int(self._in_indptr[j + 1] - self._in_indptr[j])

    @property
    def max_out_degree(self) -> int:
        return int(np.diff(self._out_indptr).max())

    def has_edge(self, receiver: int, sender: int) -> bool:
        row = self.out_neighbors(sender)
        pos = np.searchsorted(row, receiver)
        return bool(pos < len(row) and row[pos] == receiver)

    def edge_set(self) -> set[tuple[int, int]]:
        """All (receiver, sender) pairs; materializes O(m) tuples."""
        return {
            (j, int(s))
            for j in range(self.node_count)
            for s in self.in_neighbors(j)
        }

    def is_complete(self) -> bool:
        return self.edge_count == self.node_count * (self.node_count - 1)

    def is_strongly_connected(self) -> bool:
        if self._strong is None:
            if self.node_count == 1:
                self._strong = True
            else:
                # reaches everyone forward, and everyone reaches it (in-direction BFS)
                self._strong = _covers_all_from_zero(
                    self._out_indptr, self._out_flat, self.node_count
                ) and _covers_all_from_zero(self._in_indptr, self._in_flat, self.node_count)
        return self._strong

    def diameter(self) -> int:
        """Longest shortest directed path over all ordered node pairs (cached)."""
        if self._diameter is None:
            self._diameter = self._compute_diameter()
        return self._diameter

    def _compute_diameter(self) -> int:
        n = self.node_count
        if n == 1:
            return 0
        if not self.is_strongly_connected():
            raise NotStronglyConnectedError("diameter is undefined for a non strongly connected digraph")
        if self.is_complete():
            return 1
        # Boolean reachability powers: reach(t) = pairs joined by a path of
        # length <= t (staying put allowed via the diagonal). The first t
        # covering every pair is the diameter; float32 matmul keeps counts
        # exact up to 2**24 per entry (n is far below that).
        base = np.zeros((n, n), dtype=bool)
        for i in range(n):
            base[i, self.out_neighbors(i)] = True
        np.fill_diagonal(base, True)
        base_f = base.astype(np.float32)
        reach = base
        for steps in range(1, n):
            if reach.all():
                return steps
            reach = _bool_matmul(reach, base_f)
        raise AssertionError("strongly connected graph must be covered within n-1 steps")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Digraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self._out_indptr, other._out_indptr)
            and np.array_equal(self._out_flat, other._out_flat)
        )

    def __repr__(self) -> str:
        return f"Digraph(n={self.node_count}, m={self.edge_count})"


def _counts_to_indptr(sorted_groups: np.ndarray, n: int) -> np.ndarray:
    counts = np.bincount(sorted_groups, minlength=n) if sorted_groups.size else np.zeros(n, np.int64)
    return np.concatenate(([0], np.cumsum(counts)))


def _covers_all_from_zero(indptr: np.ndarray, flat: np.ndarray, n: int) -> bool:
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    reached = 1
    frontier = [0]
    while frontier and reached < n:
        nxt: list[np.ndarray] = []
        for u in frontier:
            cand = flat[indptr[u]:indptr[u + 1]]
            new = cand[~seen[cand]]
            if new.size:
                seen[new] = True
                reached += new.size
                nxt.append(new)
        frontier = np.concatenate(nxt).tolist() if nxt else []
    return reached == n


def _bool_matmul(reach: np.ndarray, base_f: np.ndarray) -> np.ndarray:
    out = np.empty_like(reach)
    for s0 in range(0, reach.shape[0], _MATMUL_BLOCK):
        block = reach[s0:s0 + _MATMUL_BLOCK].astype(np.float32) @ base_f
        out[s0:s0 + _MATMUL_BLOCK] = block > 0.0
    return out


def generate_random_digraph(n: int, edge_prob: float, seed: int) -> Digraph:
    """Draw each ordered pair (receiver, sender) independently with edge_prob.

    The generator walks one sender row at a time (n uniforms per row, the
    diagonal draw is consumed and discarded), so identical (n, edge_prob,
    seed) yield bit-identical edge sets. Disconnected draws are returned
    as-is; retrying is the caller's policy.
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if not 0.0 < edge_prob <= 1.0:
        raise ValueError(f"edge_prob must be in (0, 1], got {edge_prob}")
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        u = rng.random(n)
        u[i] = 1.0
        rows.append(np.nonzero(u < edge_prob)[0].astype(np.int32))
    return Digraph._from_out_rows(n, rows)


def is_strongly_connected(g: Digraph) -> bool:
    """True iff every ordered node pair is joined by a directed path."""
    return g.is_strongly_connected()


def diameter(g: Digraph) -> int:
    """Diameter of a strongly connected digraph; raises otherwise."""
    return g.diameter()


def load_digraph(text: str) -> Digraph:
    """Parse edge-list text: header line "n <count>", then "receiver sender" lines (1-based)."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise GraphFormatError("empty graph text")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "n":
        raise GraphFormatError(f"bad header {lines[0]!r}, expected 'n <count>'")
    try:
        n = int(head[1])
    except ValueError:
        raise GraphFormatError(f"bad node count {head[1]!r}") from None
    if n < 1:
        raise GraphFormatError(f"node count must be >= 1, got {n}")
    edges = []
    for lineno, ln in enumerate(lines[1:], start=2):
        toks = ln.split()
        if len(toks) != 2:
            raise GraphFormatError(f"line {lineno}: expected 'receiver sender', got {ln!r}")
        try:
            j, i = int(toks[0]), int(toks[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: non-integer node id in {ln!r}") from None
        if not (1 <= j <= n and 1 <= i <= n):
            raise GraphFormatError(f"line {lineno}: node id out of range 1..{n} in {ln!r}")
        if j == i:
            raise GraphFormatError(f"line {lineno}: self-edge {j} -> {j}")
        edges.append((j - 1, i - 1))
    return Digraph(n, edges)


def save_digraph(g: Digraph) -> str:
    """Serialize to the edge-list format; lines sorted by (receiver, sender)."""
    out = [f"n {g.node_count}"]
    for j in range(g.node_count):
        for i in g.in_neighbors(j):
            out.append(f"{j + 1} {int(i) + 1}")
    return "\n".join(out) + "\n"
