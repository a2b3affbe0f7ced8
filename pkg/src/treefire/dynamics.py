"""Burn/fireproof dynamics on labeled trees.

Two engines share one contract: `run_forward` is the semantic reference
(breadth-first fire propagation, O(n^2) worst case); `run_dynamics` delegates
to the cut-tree pipeline (O(n alpha(n))) and must agree field-for-field on
identical (order, coins) inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .treegen import LabeledTree


@dataclass(eq=False)
class DynamicsOutcome:
    """Observables of one run.

    burnt_by_appearance lists burnt component sizes in ignition order,
    burnt_ranked the same sizes non-increasing; fire_steps are the 1-based
    step indices of the ignitions; fireproof_components are the sizes of the
    maximal fireproof trees, non-increasing.
    """

    I: int
    B: int
    kappa: int
    burnt_by_appearance: np.ndarray
    burnt_ranked: np.ndarray
    fire_steps: np.ndarray
    fireproof_components: np.ndarray

    def validate(self, n: int) -> None:
        if self.I + self.B != n:
            raise ValueError("I + B != n")
        if self.burnt_by_appearance.sum() != self.B:
            raise ValueError("burnt sizes do not sum to B")
        if self.kappa != len(self.fire_steps) or self.kappa != len(self.burnt_by_appearance):
            raise ValueError("kappa inconsistent with sequences")
        if np.any(np.diff(self.fire_steps) <= 0):
            raise ValueError("fire_steps not strictly increasing")
        if not np.array_equal(np.sort(self.burnt_by_appearance)[::-1], self.burnt_ranked):
            raise ValueError("burnt_ranked is not the ranked rearrangement")
        if self.fireproof_components.sum() != self.I:
            raise ValueError("fireproof component sizes do not sum to I")

    def same_as(self, other: "DynamicsOutcome") -> bool:
        return (self.I == other.I and self.B == other.B and self.kappa == other.kappa
                and np.array_equal(self.burnt_by_appearance, other.burnt_by_appearance)
                and np.array_equal(self.burnt_ranked, other.burnt_ranked)
                and np.array_equal(self.fire_steps, other.fire_steps)
                and np.array_equal(self.fireproof_components, other.fireproof_components))


@njit(cache=True, nogil=True)
def _adjacency(n, eu, ev):
    deg = np.zeros(n, dtype=np.int64)
    for i in range(n - 1):
        deg[eu[i]] += 1
        deg[ev[i]] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + deg[v]
    cursor = indptr[:-1].copy()
    nbr_v = np.empty(2 * (n - 1), dtype=np.int64)
    nbr_e = np.empty(2 * (n - 1), dtype=np.int64)
    for i in range(n - 1):
        u, v = eu[i], ev[i]
        nbr_v[cursor[u]] = v
        nbr_e[cursor[u]] = i
        cursor[u] += 1
        nbr_v[cursor[v]] = u
        nbr_e[cursor[v]] = i
        cursor[v] += 1
    return indptr, nbr_v, nbr_e


@njit(cache=True, nogil=True)
def _forward_kernel(n, eu, ev, order, coins):
    # edge states: 0 flammable, 1 fireproofed, 2 burnt
    indptr, nbr_v, nbr_e = _adjacency(n, eu, ev)
    state = np.zeros(n - 1, dtype=np.uint8)
    vburnt = np.zeros(n, dtype=np.bool_)
    app_sizes = np.empty(n - 1, dtype=np.int64)
    app_steps = np.empty(n - 1, dtype=np.int64)
    kappa = 0
    stack = np.empty(n, dtype=np.int64)
    for k in range(n - 1):
        e = order[k]
        if state[e] != 0:
            continue
        if not coins[k]:
            state[e] = 1
            continue
        # ignition: burn the whole flammable component containing edge e
        size = 0
        top = 0
        stack[top] = eu[e]
        top += 1
        vburnt[eu[e]] = True
        while top > 0:
            top -= 1
            v = stack[top]
            size += 1
            for idx in range(indptr[v], indptr[v + 1]):
                ee = nbr_e[idx]
                if state[ee] == 0:
                    state[ee] = 2
                    w = nbr_v[idx]
                    if not vburnt[w]:
                        vburnt[w] = True
                        stack[top] = w
                        top += 1
        app_sizes[kappa] = size
        app_steps[kappa] = k + 1
        kappa += 1
    B = 0
    for v in range(n):
        if vburnt[v]:
            B += 1
    # fireproof components: BFS over fireproofed edges between fireproof vertices
    fp_sizes = np.empty(n, dtype=np.int64)
    nfp = 0
    visited = vburnt.copy()
    for s in range(n):
        if visited[s]:
            continue
        size = 0
        top = 0
        stack[top] = s
        top += 1
        visited[s] = True
        while top > 0:
            top -= 1
            v = stack[top]
            size += 1
            for idx in range(indptr[v], indptr[v + 1]):
                if state[nbr_e[idx]] == 1:
                    w = nbr_v[idx]
                    if not visited[w]:
                        visited[w] = True
                        stack[top] = w
                        top += 1
        fp_sizes[nfp] = size
        nfp += 1
    return n - B, B, kappa, app_sizes[:kappa], app_steps[:kappa], fp_sizes[:nfp]


def _as_order(n: int, order) -> np.ndarray:
    o = np.asarray(order, dtype=np.int64)
    if o.shape != (n - 1,):
        raise ValueError(f"order must have length {n - 1}")
    if n > 1:
        present = np.zeros(n - 1, dtype=bool)
        present[o] = True
        if not present.all():
            raise ValueError("order is not a permutation of 0..n-2")
    return o


def _as_coins(n: int, coins) -> np.ndarray:
    c = np.asarray(coins).astype(np.bool_)
    if c.shape != (n - 1,):
        raise ValueError(f"coins must have length {n - 1}")
    return c


def _package(n, I, B, kappa, app_sizes, app_steps, fp_sizes) -> DynamicsOutcome:
    ranked = np.sort(app_sizes)[::-1].copy()
    fp = np.sort(fp_sizes)[::-1].copy()
    return DynamicsOutcome(int(I), int(B), int(kappa), app_sizes, ranked,
                           app_steps, fp)


def run_forward(tree: LabeledTree, order, coins) -> DynamicsOutcome:
    """Reference engine: process edges in `order`, fireproof on coin 0, ignite
    on coin 1, burning the full flammable component; skip burnt edges."""
    n = tree.n
    if n == 1:
        return DynamicsOutcome(1, 0, 0, np.empty(0, np.int64), np.empty(0, np.int64),
                               np.empty(0, np.int64), np.ones(1, np.int64))
    order = _as_order(n, order)
    coins = _as_coins(n, coins)
    e = np.asarray(tree.edges, dtype=np.int64) - 1
    res = _forward_kernel(n, np.ascontiguousarray(e[:, 0]),
                          np.ascontiguousarray(e[:, 1]), order, coins)
    return _package(n, *res)


def run_dynamics(tree: LabeledTree, p: float, stream: np.random.Generator) -> DynamicsOutcome:
    """Draw an edge order and coins, then run the cut-tree pipeline.

    Coins are drawn for every step, including steps whose edge is already
    burnt, so stream consumption never depends on outcomes.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    from . import cuttree

    n = tree.n
    if n == 1:
        return run_forward(tree, np.empty(0, np.int64), np.empty(0, np.int64))
    order = stream.permutation(n - 1)
    coins = stream.random(n - 1) < p
    ct = cuttree.build_cut_tree(tree, order)
    marks = cuttree.mark_and_erase(ct, coins)
    return cuttree.read_outcome(ct, marks)


def first_fire_step(outcome: DynamicsOutcome) -> float:
    """First ignition step, or math.inf when nothing ever burns."""
    if outcome.kappa == 0:
        return math.inf
    return int(outcome.fire_steps[0])


@njit(cache=True, nogil=True)
def _forest_sizes_kernel(n, eu, ev, order, keep_from):
    # component sizes after deleting edges at order positions < keep_from
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for k in range(keep_from, n - 1):
        e = order[k]
        ru, rv = eu[e], ev[e]
        while parent[ru] != ru:
            parent[ru] = parent[parent[ru]]
            ru = parent[ru]
        while parent[rv] != rv:
            parent[rv] = parent[parent[rv]]
            rv = parent[rv]
        if size[ru] < size[rv]:
            ru, rv = rv, ru
        parent[rv] = ru
        size[ru] += size[rv]
    out = np.empty(keep_from + 1, dtype=np.int64)
    cnt = 0
    for v in range(n):
        if parent[v] == v:
            out[cnt] = size[v]
            cnt += 1
    return out[:cnt]


def subtree_forest_at_first_fire(tree: LabeledTree, order, coins, stream=None):
    """First ignition step zeta and the sizes of the zeta components left by
    deleting the first zeta-1 (fireproofed) edges.

    With a stream the components come back in uniform random order (the
    exchangeable presentation); without one they come back ranked.
    """
    n = tree.n
    order = _as_order(n, order)
    coins = _as_coins(n, coins)
    hits = np.flatnonzero(coins)
    if hits.size == 0:
        raise ValueError("conditioning event failed: no coin ignites")
    zeta = int(hits[0]) + 1
    e = np.asarray(tree.edges, dtype=np.int64) - 1
    sizes = _forest_sizes_kernel(n, np.ascontiguousarray(e[:, 0]),
                                 np.ascontiguousarray(e[:, 1]), order, zeta - 1)
    if stream is None:
        sizes = np.sort(sizes)[::-1]
    else:
        sizes = stream.permutation(sizes)
    return zeta, sizes


@njit(cache=True, nogil=True)
def _marked_kernel(n, eu, ev, order, unif):
    # Reverse union-find sweep: after adding order positions >= k the forest
    # equals the state after k removals; answer the step-k query right there.
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    out = np.empty(n - 2, dtype=np.int64)
    for k in range(n - 2, 0, -1):
        e = order[k]
        ru, rv = eu[e], ev[e]
        while parent[ru] != ru:
            parent[ru] = parent[parent[ru]]
            ru = parent[ru]
        while parent[rv] != rv:
            parent[rv] = parent[parent[rv]]
            rv = parent[rv]
        if size[ru] < size[rv]:
            ru, rv = rv, ru
        parent[rv] = ru
        size[ru] += size[rv]
        # uniform not-yet-removed edge at step k: order position in [k, n-2]
        j = k + int(unif[k - 1] * (n - 1 - k))
        if j > n - 2:
            j = n - 2
        w = eu[order[j]]
        while parent[w] != w:
            parent[w] = parent[parent[w]]
            w = parent[w]
        out[k - 1] = size[w]
    return out


def run_marked_process(tree: LabeledTree, order, stream: np.random.Generator) -> np.ndarray:
    """Sizes b'_1..b'_{n-2}: after the k-th removal, pick a component with
    probability proportional to its edge count (realized as the component of a
    uniformly random remaining edge) and record its vertex count.

    Subtrees are never burnt; removals continue regardless.
    """
    n = tree.n
    if n < 3:
        raise ValueError("marked process needs n >= 3")
    order = _as_order(n, order)
    unif = stream.random(n - 2)
    e = np.asarray(tree.edges, dtype=np.int64) - 1
    return _marked_kernel(n, np.ascontiguousarray(e[:, 0]),
                          np.ascontiguousarray(e[:, 1]), order, unif)
