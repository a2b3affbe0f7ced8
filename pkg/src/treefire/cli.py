"""Reproducible experiment runner.

Configuration comes from flags and/or a flat key=value config file (flags
win).  Every replica draws its randomness from a stream keyed by
(seed, n, replica), so outputs are independent of thread count and replica
scheduling.  Exit codes: 0 all checks passed, 1 a statistical check failed,
2 usage error, 3 IO error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import permutations
from pathlib import Path

import numpy as np
from numba import njit

from . import limitlaws, stats, streams, treegen
from .cuttree import (_build_kernel, _erase_kernel, _outcome_kernel,
                      build_cut_tree, mark_and_erase, read_outcome,
                      worked_example)
from .dynamics import first_fire_step, run_dynamics, run_forward
from .treegen import _decode_kernel

MAX_N = 20_000_000  # cut-tree arena is 2n-1 nodes; refuse beyond this

SIGNIFICANCE = 1e-3          # per suite, Bonferroni-corrected over its tests
KS_CRITICAL_FINAL = 0.05
KS_SUBCRITICAL_FINAL = 0.06
KS_SUPERCRITICAL_FINAL = 0.06
GIANT_EPS = 0.5
GIANT_FRACTION_MIN = 0.95
SUBCRITICAL_LIMIT_KS = 0.03
REPRESENTATION_TOL = 1e-6
CONVOLUTION_TOL = 1e-12
APPEARANCE_J = 64
BRIDGE_DIAGNOSTIC_KS = 0.2   # engineering diagnostic, no proven rate

CSV_COLUMNS = ["n", "p", "replica", "I", "B", "kappa", "zeta1",
               "b1", "b2", "b3", "b4", "b5", "runtime_ns"]

SUITES = ("oracle", "coupling", "critical", "subcritical", "supercritical",
          "distributions", "cuttree-demo")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RegimeSpec:
    """p_n schedule: either explicit p, or the power form min(1, c n^-alpha)."""

    c: float | None = None
    alpha: float | None = None
    p: float | None = None

    def validate(self) -> None:
        if self.p is not None:
            if not 0 <= self.p <= 1:
                raise UsageError("explicit p must lie in [0, 1]")
            return
        if self.c is None or self.alpha is None:
            raise UsageError("regime needs either explicit p or both c and alpha")
        if self.c <= 0 or self.alpha < 0:
            raise UsageError("need c > 0 and alpha >= 0")

    def p_at(self, n: int) -> float:
        if self.p is not None:
            return self.p
        return min(1.0, self.c * float(n) ** (-self.alpha))

    @property
    def classification(self) -> str:
        if self.p is not None:
            return "subcritical" if self.p > 0 else "degenerate"
        if self.alpha < 0.5:
            return "subcritical"
        if self.alpha == 0.5:
            return "critical"
        if self.alpha < 1:
            return "supercritical"
        return "degenerate"

    def describe(self) -> dict:
        return {"c": self.c, "alpha": self.alpha, "p": self.p,
                "classification": self.classification}


@dataclass
class ExperimentConfig:
    suite: str
    regime: RegimeSpec
    n_values: list[int]
    replicas: int
    seed: int
    threads: int = 1
    output_dir: str = "treefire_out"
    depth: int = 5
    discretization: int = 1_000_000

    def validate(self) -> None:
        if self.suite not in SUITES:
            raise UsageError(f"unknown suite {self.suite!r}; choose from {SUITES}")
        if self.replicas < 1:
            raise UsageError("replicas must be >= 1")
        if self.threads < 1:
            raise UsageError("threads must be >= 1")
        if self.depth < 1:
            raise UsageError("depth must be >= 1")
        for n in self.n_values:
            if n < 1:
                raise UsageError("n must be >= 1")
            if n > MAX_N:
                raise UsageError(
                    f"n={n} exceeds the memory guard {MAX_N} "
                    "(the cut-tree arena needs 2n-1 nodes)")
        self.regime.validate()

    def describe(self) -> dict:
        return {"suite": self.suite, "regime": self.regime.describe(),
                "n_values": self.n_values, "replicas": self.replicas,
                "seed": self.seed, "threads": self.threads,
                "output_dir": str(self.output_dir), "depth": self.depth,
                "discretization": self.discretization}


# -- tree serialization (edge-list text format) -------------------------------

def tree_to_text(tree: treegen.LabeledTree) -> str:
    lines = [f"n={tree.n}"]
    lines += [f"{u} {v}" for u, v in np.asarray(tree.edges)]
    return "\n".join(lines) + "\n"


def tree_from_text(text: str) -> treegen.LabeledTree:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ValueError("expected header 'n=<n>'")
    n = int(lines[0][2:])
    edges = np.array([[int(a), int(b)] for a, b in
                      (ln.split() for ln in lines[1:])], dtype=np.int64)
    if n == 1:
        edges = edges.reshape(0, 2)
    tree = treegen.LabeledTree(n, edges)
    tree.validate()
    return tree


# -- replica execution ---------------------------------------------------------

def _one_replica(n: int, p: float, seed: int, replica: int):
    rng = streams.stream(seed, "dynamics", n, replica)
    t0 = time.perf_counter_ns()
    tree = treegen.sample_uniform_tree(n, rng)
    out = run_dynamics(tree, p, rng)
    dt = time.perf_counter_ns() - t0
    top5 = np.zeros(5, dtype=np.int64)
    take = min(5, out.burnt_ranked.size)
    top5[:take] = out.burnt_ranked[:take]
    app3 = np.zeros(3, dtype=np.int64)
    take = min(3, out.burnt_by_appearance.size)
    app3[:take] = out.burnt_by_appearance[:take]
    fp_max = int(out.fireproof_components[0]) if out.fireproof_components.size else 0
    return (out.I, out.B, out.kappa, first_fire_step(out), top5, app3, fp_max, dt)


def simulate_records(n: int, p: float, seed: int, replicas: int,
                     threads: int = 1) -> dict:
    """Arrays of per-replica observables; deterministic given (seed, n,
    replica) regardless of threads."""
    I = np.empty(replicas, dtype=np.int64)
    B = np.empty(replicas, dtype=np.int64)
    kappa = np.empty(replicas, dtype=np.int64)
    zeta1 = np.empty(replicas, dtype=np.float64)
    top5 = np.empty((replicas, 5), dtype=np.int64)
    app3 = np.empty((replicas, 3), dtype=np.int64)
    fp_max = np.empty(replicas, dtype=np.int64)
    runtime = np.empty(replicas, dtype=np.int64)

    def work(r):
        I[r], B[r], kappa[r], zeta1[r], top5[r], app3[r], fp_max[r], runtime[r] = \
            _one_replica(n, p, seed, r)

    if threads <= 1:
        for r in range(replicas):
            work(r)
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(work, range(replicas), chunksize=64))
    return {"n": n, "p": p, "I": I, "B": B, "kappa": kappa, "zeta1": zeta1,
            "top5": top5, "app3": app3, "fp_max": fp_max, "runtime_ns": runtime}


@njit(cache=True, nogil=True)
def _key_counts_kernel(n, U, p, counts):
    rows = U.shape[0]
    code = np.empty(max(n - 2, 1), dtype=np.int64)
    for r in range(rows):
        u = U[r]
        for i in range(n - 2):
            c = int(u[i] * n)
            if c >= n:
                c = n - 1
            code[i] = c
        if n == 2:
            edges = np.empty((1, 2), dtype=np.int64)
            edges[0, 0] = 0
            edges[0, 1] = 1
        else:
            edges = _decode_kernel(code[:n - 2])
        eu = np.ascontiguousarray(edges[:, 0])
        ev = np.ascontiguousarray(edges[:, 1])
        order = np.argsort(u[n - 2:2 * n - 3])
        coins = u[2 * n - 3:3 * n - 4] < p
        cl, cr, parent, lc = _build_kernel(n, eu, ev, order)
        kept = _erase_kernel(n, parent, coins)
        I, B, kappa, app, steps, fp = _outcome_kernel(n, eu, ev, order, parent,
                                                      lc, kept)
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
        counts[key] += 1


def pipeline_key_counts(n: int, p: float, stream: np.random.Generator,
                        replicas: int) -> dict:
    """Monte Carlo counts of (I, ranked burnt sizes) through the cut-tree
    pipeline, batched for n <= 6 (the oracle comparison scale)."""
    if not 2 <= n <= 6:
        raise ValueError("batched key counts support 2 <= n <= 6 only")
    counts = np.zeros(7 ** 4, dtype=np.int64)
    chunk = 65536
    done = 0
    while done < replicas:
        m = min(chunk, replicas - done)
        U = stream.random((m, 3 * n - 4))
        _key_counts_kernel(n, U, p, counts)
        done += m
    out = {}
    for key in np.flatnonzero(counts):
        v = int(key)
        b3 = v % 7
        v //= 7
        b2 = v % 7
        v //= 7
        b1 = v % 7
        I = v // 7
        burnt = tuple(s for s in (b1, b2, b3) if s > 0)
        out[(I, burnt)] = int(counts[key])
    return out


def _parallel_map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# -- suites --------------------------------------------------------------------

def _check(name, passed, statistic, threshold, **details):
    entry = {"name": name, "passed": bool(passed),
             "statistic": statistic, "threshold": threshold}
    if details:
        entry["details"] = details
    return entry


def _suite_oracle(config: ExperimentConfig):
    tests, all_records = [], []
    n_values = config.n_values or [2, 3, 4, 5, 6]
    alpha = SIGNIFICANCE / len(n_values)
    for n in n_values:
        if n > stats.ORACLE_MAX_N:
            raise UsageError("oracle suite needs n <= 6")
        p = config.regime.p_at(n)
        law = stats.brute_force_oracle(n, p)
        recs = simulate_records(n, p, config.seed, config.replicas, config.threads)
        all_records.append(recs)
        counts = {}
        for i in range(config.replicas):
            burnt = tuple(int(s) for s in recs["top5"][i] if s > 0)
            key = (int(recs["I"][i]), burnt)
            counts[key] = counts.get(key, 0) + 1
        stat, dof, pval = stats.chi_square_test(counts, law)
        tests.append(_check(f"oracle_chi_square_n{n}", pval >= alpha, pval, alpha,
                            chi_square=stat, dof=dof, p=p))
    return tests, all_records


def _suite_coupling(config: ExperimentConfig):
    tests, all_records = [], []
    mismatches = 0
    checked = 0
    for n in range(2, 7):
        for ti, tree in enumerate(treegen.enumerate_trees(n)):
            for oi, order in enumerate(permutations(range(n - 1))):
                rng = streams.stream(config.seed, "test", n, ti * 720 + oi)
                coins = rng.random(n - 1) < 0.5
                order_arr = np.array(order, dtype=np.int64)
                a = run_forward(tree, order_arr, coins)
                ct = build_cut_tree(tree, order_arr)
                b = read_outcome(ct, mark_and_erase(ct, coins))
                checked += 1
                if not a.same_as(b):
                    mismatches += 1
    tests.append(_check("coupling_exhaustive_small_n", mismatches == 0,
                        mismatches, 0, checked=checked))
    for n in (config.n_values or [50, 200]):
        mism = 0
        rows = {"n": n, "p": float("nan"), "I": [], "B": [], "kappa": [],
                "zeta1": [], "top5": [], "app3": [], "fp_max": [],
                "runtime_ns": []}
        for r in range(config.replicas):
            rng = streams.stream(config.seed, "test", n, r)
            t0 = time.perf_counter_ns()
            tree = treegen.sample_uniform_tree(n, rng)
            order = rng.permutation(n - 1)
            p = rng.random()
            coins = rng.random(n - 1) < p
            a = run_forward(tree, order, coins)
            ct = build_cut_tree(tree, order)
            b = read_outcome(ct, mark_and_erase(ct, coins))
            dt = time.perf_counter_ns() - t0
            if not a.same_as(b):
                mism += 1
            top5 = np.zeros(5, dtype=np.int64)
            take = min(5, a.burnt_ranked.size)
            top5[:take] = a.burnt_ranked[:take]
            app3 = np.zeros(3, dtype=np.int64)
            take = min(3, a.burnt_by_appearance.size)
            app3[:take] = a.burnt_by_appearance[:take]
            rows["I"].append(a.I)
            rows["B"].append(a.B)
            rows["kappa"].append(a.kappa)
            rows["zeta1"].append(first_fire_step(a))
            rows["top5"].append(top5)
            rows["app3"].append(app3)
            rows["fp_max"].append(int(a.fireproof_components[0]) if a.fireproof_components.size else 0)
            rows["runtime_ns"].append(dt)
        for k in ("I", "B", "kappa", "zeta1", "fp_max", "runtime_ns"):
            rows[k] = np.asarray(rows[k])
        rows["top5"] = np.asarray(rows["top5"])
        rows["app3"] = np.asarray(rows["app3"])
        all_records.append(rows)
        tests.append(_check(f"coupling_randomized_n{n}", mism == 0, mism, 0,
                            replicas=config.replicas))
    return tests, all_records


def _suite_critical(config: ExperimentConfig):
    tests, all_records = [], []
    c = config.regime.c if config.regime.c is not None else 1.0
    n_values = sorted(config.n_values or [1000, 10000, 100000])
    ks_values = []
    for n in n_values:
        p = config.regime.p_at(n)
        recs = simulate_records(n, p, config.seed, config.replicas, config.threads)
        all_records.append(recs)
        d = stats.ks_distance(recs["I"] / n, lambda x: limitlaws.d_cdf_quadrature(c, x))
        ks_values.append(d)
        tests.append(_check(f"critical_ks_fireproof_fraction_n{n}",
                            True, d, None))
    tests.append(_check("critical_ks_decreasing",
                        all(b < a for a, b in zip(ks_values, ks_values[1:])),
                        ks_values, None))
    tests.append(_check("critical_ks_final", ks_values[-1] < KS_CRITICAL_FINAL,
                        ks_values[-1], KS_CRITICAL_FINAL, n=n_values[-1]))

    def draw(r):
        rng = streams.stream(config.seed, "limits", 0, r)
        x, burnt = limitlaws.critical_limit_sample(c, config.discretization, rng)
        return x, burnt.values

    draws = _parallel_map(draw, range(config.replicas), config.threads)
    depth = min(config.depth, 5)
    lim_mat = np.zeros((len(draws), depth))
    for i, (_, v) in enumerate(draws):
        take = min(depth, v.size)
        lim_mat[i, :take] = v[:take]
    recs = all_records[-1]
    dyn_mat = recs["top5"][:, :depth] / n_values[-1]
    # totals must carry the full burnt mass, not just the top coordinates
    dyn = np.concatenate([dyn_mat, (recs["B"] / n_values[-1])[:, None] - dyn_mat.sum(axis=1, keepdims=True)], axis=1)
    lim = np.zeros((len(draws), depth + 1))
    lim[:, :depth] = lim_mat
    for i, (x, v) in enumerate(draws):
        lim[i, depth] = (1 - x) - lim_mat[i].sum()
    report = stats.ranked_l1_compare(dyn, lim, depth)
    tests.append(_check("critical_ranked_compare",
                        report.max_distance < KS_CRITICAL_FINAL,
                        report.max_distance, KS_CRITICAL_FINAL,
                        report=report.to_dict()))
    return tests, all_records


def _suite_subcritical(config: ExperimentConfig):
    tests, all_records = [], []
    n_values = sorted(config.n_values or [10**4, 10**6])
    ks_values = []
    for n in n_values:
        p = config.regime.p_at(n)
        recs = simulate_records(n, p, config.seed, config.replicas, config.threads)
        all_records.append(recs)
        d = stats.ks_distance(p * p * recs["I"], limitlaws.chi2_1_cdf)
        ks_values.append(d)
        tests.append(_check(f"subcritical_ks_fireproof_n{n}", True, d, None))
    tests.append(_check("subcritical_ks_decreasing",
                        all(b < a for a, b in zip(ks_values, ks_values[1:])),
                        ks_values, None))
    tests.append(_check("subcritical_ks_final",
                        ks_values[-1] < KS_SUBCRITICAL_FINAL,
                        ks_values[-1], KS_SUBCRITICAL_FINAL, n=n_values[-1]))
    n = n_values[-1]
    p = config.regime.p_at(n)
    recs = all_records[-1]
    lo = n ** (-GIANT_EPS) / (p * p)
    hi = GIANT_EPS / (p * p)
    frac = float(np.mean((recs["fp_max"] > lo) & (recs["fp_max"] < hi)))
    tests.append(_check("subcritical_giant_fireproof_window",
                        frac >= GIANT_FRACTION_MIN, frac, GIANT_FRACTION_MIN,
                        window=[lo, hi], n=n))
    return tests, all_records


def _suite_supercritical(config: ExperimentConfig):
    tests, all_records = [], []
    n_values = sorted(config.n_values or [10**4, 10**6])
    ks_values = []
    for n in n_values:
        p = config.regime.p_at(n)
        recs = simulate_records(n, p, config.seed, config.replicas, config.threads)
        all_records.append(recs)
        scale = 1.0 / (n * p) ** 2
        d = stats.ks_distance(scale * recs["B"], limitlaws.inv_chi2_1_cdf)
        ks_values.append(d)
        tests.append(_check(f"supercritical_ks_burnt_n{n}", True, d, None))
    tests.append(_check("supercritical_ks_final",
                        ks_values[-1] < KS_SUPERCRITICAL_FINAL,
                        ks_values[-1], KS_SUPERCRITICAL_FINAL, n=n_values[-1]))
    n = n_values[-1]
    p = config.regime.p_at(n)
    recs = all_records[-1]
    scale = 1.0 / (n * p) ** 2
    lim = np.empty((config.replicas, 3))
    for r in range(config.replicas):
        rng = streams.stream(config.seed, "limits", 1, r)
        seq, _ = limitlaws.supercritical_limit_sequence(rng, APPEARANCE_J)
        lim[r] = seq[:3]
    for j in range(3):
        d = stats.ks_distance_2samp(scale * recs["app3"][:, j], lim[:, j])
        tests.append(_check(f"supercritical_appearance_coord{j + 1}",
                            d < KS_SUPERCRITICAL_FINAL, d,
                            KS_SUPERCRITICAL_FINAL))
    rng = streams.stream(config.seed, "limits", 2, 0)
    e = rng.exponential(size=config.replicas)
    z = rng.standard_normal(config.replicas)
    first_limit = z * z / (e * e)
    d = stats.ks_distance_2samp(scale * recs["app3"][:, 0], first_limit)
    tests.append(_check("supercritical_first_burnt_vs_exp_gaussian",
                        d < KS_SUPERCRITICAL_FINAL, d, KS_SUPERCRITICAL_FINAL))
    return tests, all_records


def _suite_distributions(config: ExperimentConfig):
    tests = []
    err = limitlaws.verify_d_representation()
    tests.append(_check("d_representation_vs_quadrature",
                        err <= REPRESENTATION_TOL, err, REPRESENTATION_TOL))
    m = config.replicas
    rng = streams.stream(config.seed, "limits", 0, 0)
    z2 = limitlaws.sample_chi2_1(rng, m)
    inv = limitlaws.sample_inv_chi2_1(rng, m)
    for q in (0.5, 1.5):
        vals = np.exp(-q * z2)
        target = (2 * q + 1) ** -0.5
        gap = abs(vals.mean() - target)
        se = vals.std(ddof=1) / math.sqrt(m)
        tests.append(_check(f"laplace_chi2_q{q}", gap <= 3 * se, gap, 3 * se))
        vals = np.exp(-q * inv)
        target = math.exp(-math.sqrt(2 * q))
        gap = abs(vals.mean() - target)
        se = vals.std(ddof=1) / math.sqrt(m)
        tests.append(_check(f"laplace_inv_chi2_q{q}", gap <= 3 * se, gap, 3 * se))
    rng = streams.stream(config.seed, "limits", 1, 0)
    sub = limitlaws.subcritical_limit_sample(rng, J=1000, size=min(m, 10**4))
    d = stats.ks_distance(sub, limitlaws.chi2_1_cdf)
    tests.append(_check("subcritical_limit_vs_chi2", d < SUBCRITICAL_LIMIT_KS,
                        d, SUBCRITICAL_LIMIT_KS))
    worst = 0.0
    for k in range(2, 5):
        for mm in range(k, 41):
            conv = 0.0
            conv = _convolve_borel(k, mm)
            worst = max(worst, abs(conv - limitlaws.borel_tanner_pmf(k, mm)))
    tests.append(_check("borel_tanner_convolution", worst <= CONVOLUTION_TOL,
                        worst, CONVOLUTION_TOL))
    rng = streams.stream(config.seed, "limits", 2, 0)
    draws = limitlaws.sample_borel(1.0, rng, size=min(m, 10**6), cap=50)
    bc = np.bincount(draws, minlength=52)
    law = {mm: limitlaws.borel_pmf(1.0, mm) for mm in range(1, 51)}
    law["tail"] = 1.0 - sum(law.values())
    obs = {mm: int(bc[mm]) for mm in range(1, 51)}
    obs["tail"] = int(bc[51])
    stat, dof, pval = stats.chi_square_test(obs, law)
    tests.append(_check("borel_sampler_chi_square", pval >= SIGNIFICANCE,
                        pval, SIGNIFICANCE, chi_square=stat, dof=dof))
    ndraws = 400
    big_hi = np.empty(ndraws)
    big_lo = np.empty(ndraws)
    for r in range(ndraws):
        rng = streams.stream(config.seed, "limits", 3, r)
        big_hi[r] = limitlaws.conditioned_jumps(1.0, config.discretization, rng).values[0]
        big_lo[r] = limitlaws.conditioned_jumps(
            1.0, max(config.discretization // 10, limitlaws.MIN_DISCRETIZATION),
            rng).values[0]
    d = stats.ks_distance_2samp(big_hi, big_lo)
    tests.append(_check("bridge_self_convergence_diagnostic",
                        d < BRIDGE_DIAGNOSTIC_KS, d, BRIDGE_DIAGNOSTIC_KS,
                        note="no proven rate; engineering diagnostic"))
    return tests, []


def _convolve_borel(k: int, m: int) -> float:
    # k-fold convolution of Borel(1) at m by dynamic programming
    base = np.zeros(m + 1)
    for i in range(1, m + 1):
        base[i] = limitlaws.borel_pmf(1.0, i)
    acc = base.copy()
    for _ in range(k - 1):
        new = np.zeros(m + 1)
        for tot in range(1, m + 1):
            s = 0.0
            for j in range(1, tot):
                s += acc[j] * base[tot - j]
            new[tot] = s
        acc = new
    return float(acc[m])


def _suite_cuttree_demo(config: ExperimentConfig):
    tree, order, coins = worked_example()
    ct = build_cut_tree(tree, order)
    marks = mark_and_erase(ct, coins)
    out = read_outcome(ct, marks)
    print("worked example: 11-vertex tree, edges removed in storage order,")
    print("ignitions at steps 6 and 9\n")
    print(tree_to_text(tree))
    print(ct.to_text())
    kept_steps = [int(k) + 1 for k in np.flatnonzero(marks.kept)]
    print(f"\nkept marks at steps: {kept_steps}")
    for k in kept_steps:
        block = sorted(int(v) for v in ct.block(ct.node_of_step(k)))
        print(f"  step {k}: block {block}")
    print(f"\nfireproof vertices I = {out.I}")
    print(f"burnt components (appearance order) = {out.burnt_by_appearance.tolist()}")
    print(f"fire steps = {out.fire_steps.tolist()}")
    print(f"fireproof component sizes = {out.fireproof_components.tolist()}")
    ok = (out.I == 5 and list(out.burnt_by_appearance) == [4, 2]
          and list(out.fire_steps) == [6, 9]
          and list(out.fireproof_components) == [2, 1, 1, 1])
    tests = [_check("cuttree_demo_worked_example", ok, None, None)]
    return tests, []


# -- experiment driver ----------------------------------------------------------

def _write_csv(path: Path, record_sets) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for recs in record_sets:
            n, p = recs["n"], recs["p"]
            reps = len(recs["I"])
            for r in range(reps):
                top5 = recs["top5"][r]
                w.writerow([n, p, r, int(recs["I"][r]), int(recs["B"][r]),
                            int(recs["kappa"][r]), recs["zeta1"][r],
                            int(top5[0]), int(top5[1]), int(top5[2]),
                            int(top5[3]), int(top5[4]),
                            int(recs["runtime_ns"][r])])


def run_experiment(config: ExperimentConfig) -> int:
    """Run one suite; write replicas.csv (when the suite simulates dynamics)
    and summary.json; return 0 when every check passed, 1 otherwise."""
    config.validate()
    t0 = time.perf_counter_ns()
    suite_fn = {
        "oracle": _suite_oracle,
        "coupling": _suite_coupling,
        "critical": _suite_critical,
        "subcritical": _suite_subcritical,
        "supercritical": _suite_supercritical,
        "distributions": _suite_distributions,
        "cuttree-demo": _suite_cuttree_demo,
    }[config.suite]
    tests, record_sets = suite_fn(config)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if record_sets:
        _write_csv(out_dir / "replicas.csv", record_sets)
    passed = all(t["passed"] for t in tests)
    summary = {
        "config": config.describe(),
        "tests": tests,
        "passed": passed,
        "timing": {"wall_ns": time.perf_counter_ns() - t0},
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return 0 if passed else 1


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


# -- configuration parsing -------------------------------------------------------

def _parse_config_file(path: str) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read config file: {e}")
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"config line is not key=value: {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out

_FILE_KEYS = {"suite", "n", "alpha", "c", "p", "replicas", "seed", "threads",
              "out", "depth", "discretization"}


def _parse_n_list(value) -> list[int]:
    if isinstance(value, list):
        parts = []
        for v in value:
            parts += str(v).split(",")
    else:
        parts = str(value).split(",")
    try:
        return [int(s) for s in parts if s != ""]
    except ValueError:
        raise UsageError(f"bad n list: {value!r}")


def build_config(argv=None) -> ExperimentConfig:
    parser = argparse.ArgumentParser(
        prog="treefire",
        description="Simulation and verification suites for fire dynamics "
                    "on uniform random labeled trees.")
    parser.add_argument("--suite", choices=SUITES)
    parser.add_argument("--n", action="append",
                        help="n value(s); repeat or comma-separate")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--c", type=float)
    parser.add_argument("--p", type=float)
    parser.add_argument("--replicas", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--out")
    parser.add_argument("--depth", type=int,
                        help="ranked-comparison depth (default 5)")
    parser.add_argument("--discretization", type=int,
                        help="N for conditioned jump sequences (default 1e6)")
    parser.add_argument("--config", help="flat key=value file; flags override")
    args = parser.parse_args(argv)

    file_vals = _parse_config_file(args.config) if args.config else {}
    for key in file_vals:
        if key not in _FILE_KEYS:
            raise UsageError(f"unknown config key {key!r}")

    def pick(flag, key, cast=None):
        if flag is not None:
            return flag
        if key in file_vals:
            return cast(file_vals[key]) if cast else file_vals[key]
        return None

    suite = pick(args.suite, "suite")
    if suite is None:
        raise UsageError("--suite is required (or 'suite=' in the config file)")
    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}")
    c = pick(args.c, "c", float)
    alpha = pick(args.alpha, "alpha", float)
    p = pick(args.p, "p", float)
    defaults = {
        "oracle": RegimeSpec(p=0.3),
        "coupling": RegimeSpec(p=0.3),
        "critical": RegimeSpec(c=1.0, alpha=0.5),
        "subcritical": RegimeSpec(c=1.0, alpha=0.25),
        "supercritical": RegimeSpec(c=1.0, alpha=0.75),
        "distributions": RegimeSpec(p=0.3),
        "cuttree-demo": RegimeSpec(p=0.3),
    }
    if p is None and c is None and alpha is None:
        regime = defaults[suite]
    elif p is not None:
        regime = RegimeSpec(p=p)
    else:
        base = defaults[suite]
        regime = RegimeSpec(c=c if c is not None else (base.c or 1.0),
                            alpha=alpha if alpha is not None else base.alpha)
        if regime.alpha is None:
            raise UsageError("power regime needs --alpha")
    n_raw = args.n if args.n else (file_vals.get("n") if "n" in file_vals else None)
    default_n = {
        "oracle": [2, 3, 4, 5, 6],
        "coupling": [50, 200],
        "critical": [1000, 10000, 100000],
        "subcritical": [10**4, 10**6],
        "supercritical": [10**4, 10**6],
        "distributions": [],
        "cuttree-demo": [],
    }[suite]
    n_values = _parse_n_list(n_raw) if n_raw is not None else default_n
    default_replicas = {
        "oracle": 20000, "coupling": 1000, "critical": 400,
        "subcritical": 200, "supercritical": 200,
        "distributions": 100000, "cuttree-demo": 1,
    }[suite]
    replicas = pick(args.replicas, "replicas", int)
    seed = pick(args.seed, "seed", int)
    threads = pick(args.threads, "threads", int)
    out = pick(args.out, "out")
    depth = pick(args.depth, "depth", int)
    disc = pick(args.discretization, "discretization", int)
    return ExperimentConfig(
        suite=suite, regime=regime, n_values=n_values,
        replicas=replicas if replicas is not None else default_replicas,
        seed=seed if seed is not None else 20260814,
        threads=threads if threads is not None else 1,
        output_dir=out if out is not None else "treefire_out",
        depth=depth if depth is not None else 5,
        discretization=disc if disc is not None else 1_000_000)


def main(argv=None) -> int:
    try:
        config = build_config(argv)
        return run_experiment(config)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
