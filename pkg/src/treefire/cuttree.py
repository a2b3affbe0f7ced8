"""Cut-trees: the recursive-splitting tree of an edge-removal order.

Node arena layout for a tree on n vertices: ids 0..n-1 are leaves (leaf id =
vertex label - 1); id n-1+k is the internal node split at step k (1-based), so
the root is id n (split step 1) whenever n >= 2.  Split steps strictly
increase along every root-to-leaf path.  All traversals are iterative; depth
can be Theta(n).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .dynamics import DynamicsOutcome, _as_coins, _as_order, _package
from .treegen import LabeledTree


@dataclass(eq=False)
class CutTree:
    """Rooted binary block tree: n leaves, n-1 internal split nodes."""

    n: int
    edges0: np.ndarray      # (n-1, 2) 0-based endpoints, original indexing
    order: np.ndarray       # order[k] = edge index removed at step k+1
    child_left: np.ndarray  # arena arrays of length 2n-1; -1 on leaves
    child_right: np.ndarray
    parent: np.ndarray      # -1 at the root
    leaf_count: np.ndarray
    root: int

    def split_step(self, node: int) -> int:
        """1-based split step of an internal node."""
        if node < self.n:
            raise ValueError("leaves have no split step")
        return node - self.n + 1

    def node_of_step(self, step: int) -> int:
        return self.n + step - 1

    def block(self, node: int) -> frozenset[int]:
        """Vertex labels under a node (iterative; for small-n checks/demo)."""
        out = []
        stack = [node]
        while stack:
            v = stack.pop()
            if v < self.n:
                out.append(v + 1)
            else:
                stack.append(self.child_left[v])
                stack.append(self.child_right[v])
        return frozenset(out)

    def validate(self) -> None:
        n = self.n
        if self.leaf_count[self.root] != n:
            raise ValueError("root leaf count != n")
        steps_seen = np.zeros(n, dtype=bool)
        for node in range(n, 2 * n - 1):
            l, r = self.child_left[node], self.child_right[node]
            if self.leaf_count[node] != self.leaf_count[l] + self.leaf_count[r]:
                raise ValueError("leaf counts not additive")
            if self.parent[l] != node or self.parent[r] != node:
                raise ValueError("parent links inconsistent")
            par = self.parent[node]
            # arena id n-1+step: an ancestor must carry a smaller step
            if par >= 0 and par >= node:
                raise ValueError("split steps do not increase along paths")
            s = self.split_step(node)
            if steps_seen[s - 1]:
                raise ValueError("duplicate split step")
            steps_seen[s - 1] = True
        if n >= 2 and not steps_seen[: n - 1].all():
            raise ValueError("split steps are not a permutation of 1..n-1")

    def to_text(self) -> str:
        """Indented debug rendering: one line per node, block and split step."""
        lines = []
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            indent = "  " * depth
            if node < self.n:
                lines.append(f"{indent}leaf {node + 1}")
            else:
                block = ",".join(str(v) for v in sorted(self.block(node)))
                lines.append(f"{indent}block {{{block}}} step {self.split_step(node)}")
                stack.append((self.child_right[node], depth + 1))
                stack.append((self.child_left[node], depth + 1))
        return "\n".join(lines)


@dataclass(eq=False)
class MarkSet:
    """Raw marks and the ones kept after erasing marks with marked ancestors.

    Both arrays are indexed by split step - 1; leaves are never marked.
    """

    raw: np.ndarray
    kept: np.ndarray

    def validate(self, ct: CutTree) -> None:
        if np.any(self.kept & ~self.raw):
            raise ValueError("kept mark that was never raw-marked")
        for k in np.flatnonzero(self.kept):
            node = ct.parent[ct.node_of_step(k + 1)]
            while node >= 0:
                if self.kept[ct.split_step(node) - 1]:
                    raise ValueError("kept mark below another kept mark")
                node = ct.parent[node]
        # kept = raw marks with no raw-marked proper ancestor
        for k in np.flatnonzero(self.raw & ~self.kept):
            node = ct.parent[ct.node_of_step(k + 1)]
            covered = False
            while node >= 0:
                if self.raw[ct.split_step(node) - 1]:
                    covered = True
                    break
                node = ct.parent[node]
            if not covered:
                raise ValueError("erased mark with no marked ancestor")


@njit(cache=True, nogil=True)
def _build_kernel(n, eu, ev, order):
    m = 2 * n - 1
    child_left = np.full(m, -1, dtype=np.int64)
    child_right = np.full(m, -1, dtype=np.int64)
    parent = np.full(m, -1, dtype=np.int64)
    leaf_count = np.ones(m, dtype=np.int64)
    dsu = np.arange(n)
    dsu_size = np.ones(n, dtype=np.int64)
    node_at = np.arange(n)  # arena node currently representing a DSU root
    for k in range(n - 2, -1, -1):
        e = order[k]
        ru, rv = eu[e], ev[e]
        while dsu[ru] != ru:
            dsu[ru] = dsu[dsu[ru]]
            ru = dsu[ru]
        while dsu[rv] != rv:
            dsu[rv] = dsu[dsu[rv]]
            rv = dsu[rv]
        new = n + k
        left, right = node_at[ru], node_at[rv]
        child_left[new] = left
        child_right[new] = right
        parent[left] = new
        parent[right] = new
        leaf_count[new] = leaf_count[left] + leaf_count[right]
        if dsu_size[ru] < dsu_size[rv]:
            ru, rv = rv, ru
        dsu[rv] = ru
        dsu_size[ru] += dsu_size[rv]
        node_at[ru] = new
    return child_left, child_right, parent, leaf_count


def build_cut_tree(tree: LabeledTree, order) -> CutTree:
    """Reverse construction: merge components while scanning the removal order
    backwards; the step-k node's block is the component split by that removal."""
    n = tree.n
    if n == 1:
        return CutTree(1, np.empty((0, 2), np.int64), np.empty(0, np.int64),
                       np.full(1, -1, np.int64), np.full(1, -1, np.int64),
                       np.full(1, -1, np.int64), np.ones(1, np.int64), 0)
    order = _as_order(n, order)
    e = np.asarray(tree.edges, dtype=np.int64) - 1
    eu = np.ascontiguousarray(e[:, 0])
    ev = np.ascontiguousarray(e[:, 1])
    cl, cr, parent, lc = _build_kernel(n, eu, ev, order)
    return CutTree(n, e, order, cl, cr, parent, lc, n)


@njit(cache=True, nogil=True)
def _erase_kernel(n, parent, raw):
    # Ascending split step is top-down: parents always carry smaller steps.
    kept = np.zeros(n - 1, dtype=np.bool_)
    covered = np.zeros(n - 1, dtype=np.bool_)
    for k in range(n - 1):
        par = parent[n + k]
        anc = covered[par - n] if par >= 0 else False
        kept[k] = raw[k] and not anc
        covered[k] = anc or raw[k]
    return kept


def mark_and_erase(ct: CutTree, coins) -> MarkSet:
    """Attach coin k to the internal node with split step k; keep only marks
    with no marked ancestor (closest to the root along each branch)."""
    if ct.n == 1:
        empty = np.zeros(0, dtype=bool)
        return MarkSet(empty, empty.copy())
    raw = _as_coins(ct.n, coins)
    kept = _erase_kernel(ct.n, ct.parent, raw)
    return MarkSet(raw, kept)


@njit(cache=True, nogil=True)
def _outcome_kernel(n, eu, ev, order, parent, leaf_count, kept):
    # covered = some kept mark at the node or above; those edges burn
    covered = np.zeros(n - 1, dtype=np.bool_)
    for k in range(n - 1):
        par = parent[n + k]
        covered[k] = kept[k] or (par >= 0 and covered[par - n])
    burnt = np.zeros(n, dtype=np.bool_)
    for k in range(n - 1):
        if covered[k]:
            e = order[k]
            burnt[eu[e]] = True
            burnt[ev[e]] = True
    B = 0
    for v in range(n):
        if burnt[v]:
            B += 1
    kappa = 0
    app_sizes = np.empty(n - 1, dtype=np.int64)
    app_steps = np.empty(n - 1, dtype=np.int64)
    for k in range(n - 1):
        if kept[k]:
            app_sizes[kappa] = leaf_count[n + k]
            app_steps[kappa] = k + 1
            kappa += 1
    # fireproof components: union fireproofed edges whose endpoints are both
    # fireproof (a fireproofed edge with a burnt endpoint is discarded)
    dsu = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for k in range(n - 1):
        if covered[k]:
            continue
        e = order[k]
        ru, rv = eu[e], ev[e]
        if burnt[ru] or burnt[rv]:
            continue
        while dsu[ru] != ru:
            dsu[ru] = dsu[dsu[ru]]
            ru = dsu[ru]
        while dsu[rv] != rv:
            dsu[rv] = dsu[dsu[rv]]
            rv = dsu[rv]
        if ru == rv:
            continue
        if size[ru] < size[rv]:
            ru, rv = rv, ru
        dsu[rv] = ru
        size[ru] += size[rv]
    fp_sizes = np.empty(n, dtype=np.int64)
    nfp = 0
    for v in range(n):
        if not burnt[v] and dsu[v] == v:
            fp_sizes[nfp] = size[v]
            nfp += 1
    return n - B, B, kappa, app_sizes[:kappa], app_steps[:kappa], fp_sizes[:nfp]


def read_outcome(ct: CutTree, marks: MarkSet) -> DynamicsOutcome:
    """Kept marks are exactly the burnt components (appearance order =
    increasing split step); everything else reads off the arena in one pass."""
    n = ct.n
    if n == 1:
        return DynamicsOutcome(1, 0, 0, np.empty(0, np.int64), np.empty(0, np.int64),
                               np.empty(0, np.int64), np.ones(1, np.int64))
    eu = np.ascontiguousarray(ct.edges0[:, 0])
    ev = np.ascontiguousarray(ct.edges0[:, 1])
    res = _outcome_kernel(n, eu, ev, ct.order, ct.parent, ct.leaf_count,
                          marks.kept)
    return _package(n, *res)


def worked_example():
    """An 11-vertex tree with a fixed removal order and two ignitions (steps
    6 and 9), small enough to trace by hand yet rich enough to exercise every
    outcome field.  Returns (tree, order, coins)."""
    from .treegen import LabeledTree

    edges = np.array([
        [10, 1], [6, 9], [5, 8], [9, 2], [10, 3],
        [11, 5], [7, 6], [1, 4], [9, 10], [5, 1],
    ], dtype=np.int64)
    tree = LabeledTree(11, edges)
    tree.validate()
    order = np.arange(10, dtype=np.int64)
    coins = np.zeros(10, dtype=bool)
    coins[5] = coins[8] = True
    return tree, order, coins
