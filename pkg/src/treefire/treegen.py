"""Uniform random labeled trees on {1..n} via the Pruefer bijection."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator

import numpy as np
from numba import njit

ENUMERATION_MAX_N = 8


@dataclass(frozen=True, eq=False)
class LabeledTree:
    """Unrooted tree on labels 1..n, stored as an (n-1, 2) array of pairs."""

    n: int
    edges: np.ndarray

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("vertex count must be >= 1")
        e = np.asarray(self.edges)
        if e.shape != (self.n - 1, 2):
            raise ValueError(f"expected {self.n - 1} edges, got shape {e.shape}")
        if self.n == 1:
            return
        if e.min() < 1 or e.max() > self.n:
            raise ValueError("edge labels outside 1..n")
        # connectivity + acyclicity by a disjoint-set scan
        parent = np.arange(self.n + 1)

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for u, v in e:
            ru, rv = find(u), find(v)
            if ru == rv:
                raise ValueError("edge list contains a cycle")
            parent[ru] = rv
        # n-1 acyclic edges on n vertices are automatically connected


@dataclass(frozen=True, eq=False)
class PruferSequence:
    """Pruefer code: n-2 symbols in 1..n."""

    n: int
    symbols: np.ndarray

    def validate(self) -> None:
        if self.n < 2:
            raise ValueError("Pruefer sequences need n >= 2")
        s = np.asarray(self.symbols)
        if s.shape != (self.n - 2,):
            raise ValueError(f"expected {self.n - 2} symbols, got shape {s.shape}")
        if self.n > 2 and (s.min() < 1 or s.max() > self.n):
            raise ValueError("symbol outside 1..n")


@njit(cache=True)
def _decode_kernel(code):
    # Linear-time pointer decoding, 0-based labels.
    n = code.shape[0] + 2
    deg = np.ones(n, dtype=np.int64)
    for i in range(code.shape[0]):
        deg[code[i]] += 1
    edges = np.empty((n - 1, 2), dtype=np.int64)
    ptr = 0
    while deg[ptr] != 1:
        ptr += 1
    leaf = ptr
    for i in range(code.shape[0]):
        s = code[i]
        edges[i, 0] = leaf
        edges[i, 1] = s
        deg[s] -= 1
        if deg[s] == 1 and s < ptr:
            leaf = s
        else:
            ptr += 1
            while deg[ptr] != 1:
                ptr += 1
            leaf = ptr
    edges[n - 2, 0] = leaf
    edges[n - 2, 1] = n - 1
    return edges


@njit(cache=True)
def _encode_kernel(n, eu, ev):
    # Orient toward vertex n-1, then strip smallest leaves with a pointer.
    deg = np.zeros(n, dtype=np.int64)
    for i in range(n - 1):
        deg[eu[i]] += 1
        deg[ev[i]] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + deg[v]
    cursor = indptr[:-1].copy()
    nbr = np.empty(2 * (n - 1), dtype=np.int64)
    for i in range(n - 1):
        u, v = eu[i], ev[i]
        nbr[cursor[u]] = v
        cursor[u] += 1
        nbr[cursor[v]] = u
        cursor[v] += 1
    parent = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    order[0] = n - 1
    seen = np.zeros(n, dtype=np.bool_)
    seen[n - 1] = True
    head, tail = 0, 1
    while head < tail:
        v = order[head]
        head += 1
        for idx in range(indptr[v], indptr[v + 1]):
            w = nbr[idx]
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                order[tail] = w
                tail += 1
    code = np.empty(n - 2, dtype=np.int64)
    ptr = 0
    while deg[ptr] != 1:
        ptr += 1
    leaf = ptr
    for i in range(n - 2):
        s = parent[leaf]
        code[i] = s
        deg[s] -= 1
        if deg[s] == 1 and s < ptr:
            leaf = s
        else:
            ptr += 1
            while deg[ptr] != 1:
                ptr += 1
            leaf = ptr
    return code


def prufer_decode(seq: PruferSequence) -> LabeledTree:
    """The unique tree whose Pruefer code is `seq` (bijective inverse of encode)."""
    seq.validate()
    if seq.n == 2:
        return LabeledTree(2, np.array([[1, 2]], dtype=np.int64))
    code = np.asarray(seq.symbols, dtype=np.int64) - 1
    edges = _decode_kernel(code) + 1
    return LabeledTree(seq.n, edges)


def prufer_encode(tree: LabeledTree) -> PruferSequence:
    """Pruefer code of a tree with n >= 2; inverse of prufer_decode."""
    tree.validate()
    if tree.n < 2:
        raise ValueError("encoding needs n >= 2")
    if tree.n == 2:
        return PruferSequence(2, np.empty(0, dtype=np.int64))
    e = np.asarray(tree.edges, dtype=np.int64) - 1
    code = _encode_kernel(tree.n, np.ascontiguousarray(e[:, 0]),
                          np.ascontiguousarray(e[:, 1]))
    return PruferSequence(tree.n, code + 1)


def sample_uniform_tree(n: int, stream: np.random.Generator) -> LabeledTree:
    """Uniform draw among the n^(n-2) labeled trees (n=1,2 degenerate)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return LabeledTree(1, np.empty((0, 2), dtype=np.int64))
    if n == 2:
        return LabeledTree(2, np.array([[1, 2]], dtype=np.int64))
    code = stream.integers(0, n, size=n - 2)
    return LabeledTree(n, _decode_kernel(code) + 1)


def enumerate_trees(n: int) -> Iterator[LabeledTree]:
    """All labeled trees on n vertices, in lexicographic Pruefer order."""
    if not 2 <= n <= ENUMERATION_MAX_N:
        raise ValueError(
            f"enumeration supports 2 <= n <= {ENUMERATION_MAX_N} "
            f"(n^(n-2) trees), got n={n}")
    for symbols in product(range(1, n + 1), repeat=n - 2):
        yield prufer_decode(PruferSequence(n, np.array(symbols, dtype=np.int64)))
