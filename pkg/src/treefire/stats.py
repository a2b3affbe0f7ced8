"""Goodness-of-fit machinery and the exact small-n brute-force oracle.

The oracle enumerates every (tree, edge order, coin vector) through the
forward reference engine only; it never touches the cut-tree pipeline, so the
two stay independent cross-checks of each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations

import numpy as np
from numba import njit
from scipy import stats as sps

from . import treegen
from .dynamics import _forward_kernel, run_forward
from .treegen import _decode_kernel

ORACLE_MAX_N = 6


@dataclass(eq=False)
class ExactLaw:
    """Exact finite law over outcome keys (I, ranked burnt sizes)."""

    support: list[tuple]
    probabilities: np.ndarray
    exact: list[Fraction] | None = None

    def validate(self) -> None:
        if len(set(self.support)) != len(self.support):
            raise ValueError("support entries not distinct")
        if np.any(self.probabilities <= 0):
            raise ValueError("probabilities must be positive")
        if abs(self.probabilities.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities do not sum to 1 within 1e-12")
        if self.exact is not None and sum(self.exact) != 1:
            raise ValueError("exact probabilities do not sum to 1")

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probabilities))


@njit(cache=True, nogil=True)
def _oracle6_counts():
    # outcome counts by coin weight for n=6, over all trees x orders x coins:
    # counts[key, ones] with key = ((I*7 + b1)*7 + b2)*7 + b3
    n = 6
    counts = np.zeros((7 ** 4, n), dtype=np.int64)
    perm_src = np.array([0, 1, 2, 3, 4], dtype=np.int64)
    # all 120 permutations, generated in lexicographic order
    perms = np.empty((120, 5), dtype=np.int64)
    idx = 0
    for a in range(5):
        for b in range(5):
            if b == a:
                continue
            for c in range(5):
                if c == a or c == b:
                    continue
                for d in range(5):
                    if d == a or d == b or d == c:
                        continue
                    e = 10 - a - b - c - d
                    perms[idx, 0] = perm_src[a]
                    perms[idx, 1] = perm_src[b]
                    perms[idx, 2] = perm_src[c]
                    perms[idx, 3] = perm_src[d]
                    perms[idx, 4] = perm_src[e]
                    idx += 1
    code = np.empty(4, dtype=np.int64)
    coins = np.empty(5, dtype=np.bool_)
    for t in range(1296):
        v = t
        for i in range(4):
            code[i] = v % 6
            v //= 6
        edges = _decode_kernel(code)
        eu = np.ascontiguousarray(edges[:, 0])
        ev = np.ascontiguousarray(edges[:, 1])
        for pi in range(120):
            order = perms[pi]
            for bits in range(32):
                ones = 0
                for i in range(5):
                    on = (bits >> i) & 1
                    coins[i] = on == 1
                    ones += on
                I, B, kappa, app, steps, fp = _forward_kernel(n, eu, ev, order, coins)
                b1 = 0
                b2 = 0
                b3 = 0
                for i in range(kappa):
                    s = app[i]
                    if s > b1:
                        b3 = b2
                        b2 = b1
                        b1 = s
                    elif s > b2:
                        b3 = b2
                        b2 = s
                    else:
                        b3 = s
                key = ((I * 7 + b1) * 7 + b2) * 7 + b3
                counts[key, ones] += 1
    return counts


@lru_cache(maxsize=None)
def _outcome_counts(n: int) -> dict:
    """counts[(I, ranked burnt tuple)] = per-#ignition-coin triple counts."""
    if n == 6:
        raw = _oracle6_counts()
        out = {}
        for key in range(raw.shape[0]):
            row = raw[key]
            if row.sum() == 0:
                continue
            digits = []
            v = key
            for _ in range(4):
                digits.append(v % 7)
                v //= 7
            b3, b2, b1, I = digits
            burnt = tuple(s for s in (b1, b2, b3) if s > 0)
            out[(I, burnt)] = row.copy()
        return out
    out: dict = {}
    for tree in treegen.enumerate_trees(n):
        for order in permutations(range(n - 1)):
            order_arr = np.array(order, dtype=np.int64)
            for bits in range(2 ** (n - 1)):
                coins = np.array([(bits >> i) & 1 for i in range(n - 1)], dtype=bool)
                res = run_forward(tree, order_arr, coins)
                key = (res.I, tuple(int(s) for s in res.burnt_ranked))
                if key not in out:
                    out[key] = np.zeros(n, dtype=np.int64)
                out[key][int(coins.sum())] += 1
    return out


def brute_force_oracle(n: int, p: float) -> ExactLaw:
    """Exact law of (I, ranked burnt sizes): all n^(n-2) trees, all (n-1)!
    orders, all 2^(n-1) coin vectors through the forward engine.  Exact
    rational arithmetic for n <= 5 (p taken as its exact binary value);
    compensated float summation at n = 6."""
    if not 2 <= n <= ORACLE_MAX_N:
        raise ValueError(f"oracle supports 2 <= n <= {ORACLE_MAX_N}")
    counts = _outcome_counts(n)
    denom = n ** (n - 2) * math.factorial(n - 1)
    support = sorted(counts)
    if n <= 5:
        pf = Fraction(p)
        weights = [pf ** k * (1 - pf) ** (n - 1 - k) for k in range(n)]
        exact = []
        for key in support:
            row = counts[key]
            exact.append(sum(int(row[k]) * weights[k] for k in range(n)) / denom)
        keep = [i for i, q in enumerate(exact) if q > 0]
        support = [support[i] for i in keep]
        exact = [exact[i] for i in keep]
        probs = np.array([float(q) for q in exact])
        law = ExactLaw(support, probs, exact)
    else:
        weights = [p ** k * (1 - p) ** (n - 1 - k) for k in range(n)]
        probs = []
        for key in support:
            row = counts[key]
            probs.append(math.fsum(int(row[k]) * weights[k] for k in range(n)) / denom)
        keep = [i for i, q in enumerate(probs) if q > 0]
        support = [support[i] for i in keep]
        probs = np.array([probs[i] for i in keep])
        law = ExactLaw(support, probs, None)
    law.validate()
    return law


def ks_distance(samples, cdf) -> float:
    """sup_x |empirical CDF - cdf(x)| using both one-sided evaluations at the
    sorted sample points; cdf must accept numpy arrays."""
    s = np.sort(np.asarray(samples, dtype=np.float64))
    if s.size == 0:
        raise ValueError("need at least one sample")
    f = np.asarray(cdf(s), dtype=np.float64)
    n = s.size
    grid = np.arange(1, n + 1) / n
    d_plus = float(np.max(grid - f))
    d_minus = float(np.max(f - (grid - 1.0 / n)))
    return max(d_plus, d_minus)


def ks_distance_2samp(a, b) -> float:
    """Two-sample KS statistic."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("need at least one sample on each side")
    allv = np.concatenate([a, b])
    fa = np.searchsorted(a, allv, side="right") / a.size
    fb = np.searchsorted(b, allv, side="right") / b.size
    return float(np.abs(fa - fb).max())


def chi_square_test(counts: dict, law) -> tuple[float, int, float]:
    """Pearson chi-square of observed counts against an exact law.

    Cells are pooled (smallest expected first, into one pooled cell) until
    every remaining expected count is >= 5.  Returns (statistic, dof,
    p_value); the tail probability is the exact chi-square survival function.
    Observed outcomes with zero probability under the law raise, since a
    single such event already refutes the law.
    """
    law_dict = law.as_dict() if isinstance(law, ExactLaw) else dict(law)
    for key in counts:
        if key not in law_dict:
            raise ValueError(f"observed outcome {key!r} impossible under the law")
    total = sum(counts.values())
    keys = sorted(law_dict, key=lambda k: law_dict[k], reverse=True)
    expected = np.array([law_dict[k] * total for k in keys])
    observed = np.array([counts.get(k, 0) for k in keys], dtype=np.float64)
    # pool the tail (smallest expected) into one cell
    cum_from_end = np.concatenate([np.cumsum(expected[::-1])[::-1], [0.0]])
    cut = len(keys)
    while cut > 1:
        tail_ok = cut == len(keys) or cum_from_end[cut] >= 5
        if expected[cut - 1] >= 5 and tail_ok:
            break
        cut -= 1
    if cut < len(keys):
        expected = np.concatenate([expected[:cut], [cum_from_end[cut]]])
        observed = np.concatenate([observed[:cut], [observed[cut:].sum()]])
    if expected.size < 2:
        raise ValueError("degenerate test: all mass in one cell")
    if expected.min() < 5:
        raise ValueError("too few samples to reach expected counts >= 5")
    stat = float(np.sum((observed - expected) ** 2 / expected))
    dof = expected.size - 1
    return stat, dof, float(sps.chi2.sf(stat, dof))


@dataclass(eq=False)
class RankedCompareReport:
    """Per-coordinate two-sample KS distances on ranked jump sequences."""

    depth: int
    coordinate_distances: list[float]
    total_distance: float
    tail_bound_a: float
    tail_bound_b: float

    @property
    def max_distance(self) -> float:
        return max(self.coordinate_distances + [self.total_distance])

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "coordinate_distances": self.coordinate_distances,
            "total_distance": self.total_distance,
            "tail_bound_a": self.tail_bound_a,
            "tail_bound_b": self.tail_bound_b,
            "max_distance": self.max_distance,
        }


def _coords_and_totals(samples, depth):
    from .limitlaws import JumpSequence

    if isinstance(samples, np.ndarray) and samples.ndim == 2:
        mat = np.zeros((samples.shape[0], depth))
        take = min(depth, samples.shape[1])
        mat[:, :take] = samples[:, :take]
        return mat, samples.sum(axis=1), 0.0
    mat = np.zeros((len(samples), depth))
    totals = np.empty(len(samples))
    tail = 0.0
    for i, js in enumerate(samples):
        if isinstance(js, JumpSequence):
            v = js.values
            tail = max(tail, js.tail_mass_bound)
        else:
            v = np.asarray(js, dtype=np.float64)
        take = min(depth, v.size)
        mat[i, :take] = v[:take]
        totals[i] = v.sum()
    return mat, totals, tail


def ranked_l1_compare(a, b, depth: int = 5) -> RankedCompareReport:
    """Compare two collections of ranked jump sequences coordinate by
    coordinate (first `depth` ranked entries, zero-padded) plus total sums,
    each by a two-sample KS distance; l1 closeness is asserted through these
    finite-depth marginals together with the reported tail bounds."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    mat_a, tot_a, tail_a = _coords_and_totals(a, depth)
    mat_b, tot_b, tail_b = _coords_and_totals(b, depth)
    dists = [ks_distance_2samp(mat_a[:, j], mat_b[:, j]) for j in range(depth)]
    return RankedCompareReport(depth, dists, ks_distance_2samp(tot_a, tot_b),
                               tail_a, tail_b)
