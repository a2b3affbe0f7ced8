"""Full-scale acceptance checks, one test per quantitative criterion.

Every test pins its tolerance, runs at production scale (minutes, not
seconds), and prints one `criterion N: PASS/FAIL` line with the measured
statistics (visible with -s and in the captured output of failures).
Simulation runs shared by two criteria live in module-scoped fixtures.

Criteria 3, 4, 5 and 6 currently fail and are left failing: each misses
its tolerance by a finite-size atom that the limit theorems wash out too
slowly for the pinned n (all four would close near n = 1e7, one decade
past desk scale).  The per-test comments carry the quantitative analyses;
the exactness gates (1, 2) and identity checks (7, 8, 9) pass.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats as sps

from treefire.cli import (
    ExperimentConfig,
    RegimeSpec,
    _suite_coupling,
    _suite_critical,
    _suite_distributions,
    _suite_subcritical,
    _suite_supercritical,
    pipeline_key_counts,
)
from treefire.dynamics import run_marked_process
from treefire.limitlaws import joint_root_marks_table, rooted_mark_batch
from treefire.stats import brute_force_oracle, chi_square_test
from treefire.streams import stream
from treefire.treegen import sample_uniform_tree

SEED = 20260814
THREADS = 8
CHI2_ALPHA = 1e-3


def _report(num: int, ok: bool, detail: str) -> str:
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    return line


def _failed_names(tests):
    return [t["name"] for t in tests if not t["passed"]]


@pytest.fixture(scope="module")
def critical_run():
    config = ExperimentConfig(
        suite="critical", regime=RegimeSpec(c=1.0, alpha=0.5),
        n_values=[1000, 10_000, 100_000], replicas=2000, seed=SEED,
        threads=THREADS, depth=5, discretization=1_000_000)
    t0 = time.perf_counter()
    tests, records = _suite_critical(config)
    return tests, records, time.perf_counter() - t0


@pytest.fixture(scope="module")
def subcritical_run():
    config = ExperimentConfig(
        suite="subcritical", regime=RegimeSpec(c=1.0, alpha=0.25),
        n_values=[10**4, 10**6], replicas=1000, seed=SEED, threads=THREADS)
    tests, records = _suite_subcritical(config)
    return tests, records


@pytest.fixture(scope="module")
def supercritical_run():
    config = ExperimentConfig(
        suite="supercritical", regime=RegimeSpec(c=1.0, alpha=0.75),
        n_values=[10**4, 10**6], replicas=1000, seed=SEED, threads=THREADS)
    tests, records = _suite_supercritical(config)
    return tests, records


def test_criterion_1_exact_laws_at_scale():
    # 10^6 replicas against each exact law for n <= 6, p in {0.1, 0.3, 0.7}.
    # Replicas run through the batched cut-tree pipeline; criterion 2 pins
    # that route to the forward engine outcome by outcome.
    t0 = time.perf_counter()
    worst = 1.0
    for n in range(2, 7):
        for pi, p in enumerate((0.1, 0.3, 0.7)):
            law = brute_force_oracle(n, p)
            counts = pipeline_key_counts(n, p, stream(SEED, "test", n, pi), 10**6)
            _, _, pval = chi_square_test(counts, law)
            worst = min(worst, pval)
    elapsed = time.perf_counter() - t0
    ok = worst >= CHI2_ALPHA
    line = _report(1, ok, f"15 cells x 1e6 replicas, worst chi-square p "
                          f"{worst:.2e} vs alpha {CHI2_ALPHA}; {elapsed:.0f}s, "
                          f"single-thread budget 600s")
    assert ok, line


def test_criterion_2_pipeline_equals_forward():
    # zero tolerance: exhaustive n <= 6 (one pinned coin vector per tree and
    # order) plus 10^4 random triples at each of n = 50, 200
    config = ExperimentConfig(
        suite="coupling", regime=RegimeSpec(p=0.3), n_values=[50, 200],
        replicas=10_000, seed=SEED, threads=1)
    t0 = time.perf_counter()
    tests, _ = _suite_coupling(config)
    elapsed = time.perf_counter() - t0
    mismatches = sum(t["statistic"] for t in tests)
    checked = tests[0]["details"]["checked"]
    ok = mismatches == 0
    line = _report(2, ok, f"{checked} exhaustive configurations + 2 x 1e4 "
                          f"random triples, {mismatches} mismatches; {elapsed:.0f}s")
    assert ok, line


def test_criterion_3_critical_limit(critical_run):
    # c = 1, 2000 replicas at n = 1e3, 1e4, 1e5: the fireproof-fraction KS
    # chain must decrease to below 0.05, and the ranked burnt masses at
    # n = 1e5 must match 2000 limit draws (N = 1e6) coordinate by coordinate
    # (depth 5 plus totals) below 0.05.
    #
    # Known gap, left red on purpose: coordinates 4 and 5 sit at 0.056 and
    # 0.0625.  The gap is entirely the atom at zero: at n = 1e5 the dynamics
    # still produce fewer than 4 (resp. 5) burnt components with probability
    # 0.0745 (resp. 0.088), while the limit draws at N = 1e6 put about 0.02
    # there; the finite-n atom decays like n^{-1/4}, so closing it needs
    # n ~ 1e7.  Interior quantiles agree to three decimals.
    tests, _, elapsed = critical_run
    chain = next(t for t in tests if t["name"] == "critical_ks_decreasing")
    final = next(t for t in tests if t["name"] == "critical_ks_final")
    ranked = next(t for t in tests if t["name"] == "critical_ranked_compare")
    coords = ranked["details"]["report"]["coordinate_distances"]
    ok = all(t["passed"] for t in tests)
    line = _report(3, ok,
                   f"KS chain {[round(v, 4) for v in chain['statistic']]} "
                   f"(final<{final['threshold']}), ranked coords "
                   f"{[round(v, 4) for v in coords]} + total "
                   f"{ranked['details']['report']['total_distance']:.4f} vs 0.05; "
                   f"{elapsed:.0f}s, 8-thread budget 1800s")
    assert ok, line


def test_criterion_4_subcritical_fireproof_law(subcritical_run):
    # alpha = 1/4: p^2 I_n against the chi-square(1) CDF at n = 1e4 and 1e6,
    # KS decreasing and finally below 0.06.
    #
    # Known gap, left red on purpose: the chain does decrease (0.119 at
    # n = 1e4 to 0.0755 at n = 1e6) but the final distance misses the 0.06
    # bar.  The whole body of p^2 I_n still sits low at n = 1e6 (median
    # I = 322 vs the limit's 455); the distance shrank by a factor 0.63
    # over two decades of n, roughly n^{-1/8}, so 0.06 needs n ~ 1e7.  The
    # simulator itself is pinned exactly by criteria 1 and 2.
    tests, _ = subcritical_run
    relevant = [t for t in tests if t["name"].startswith("subcritical_ks")]
    chain = next(t for t in relevant if t["name"] == "subcritical_ks_decreasing")
    final = next(t for t in relevant if t["name"] == "subcritical_ks_final")
    ok = all(t["passed"] for t in relevant)
    line = _report(4, ok, f"KS chain {[round(v, 4) for v in chain['statistic']]}, "
                          f"final {final['statistic']:.4f} < {final['threshold']}")
    assert ok, line


def test_criterion_5_giant_fireproof_window(subcritical_run):
    # first 500 replicas at n = 1e6: the largest fireproof component must
    # land in (n^-0.5 p^-2, 0.5 p^-2) at least 95% of the time.
    #
    # Known gap, left red on purpose: holds 0.932.  At alpha = 1/4 the
    # lower edge is n^-0.5 p^-2 = 1 exactly, so a replica fails low iff no
    # two adjacent vertices are both fireproof.  That still happens in 6-7%
    # of runs at n = 1e6 (33 of the 34 violations at the pinned seed; the
    # single other one exceeded 0.5 p^-2 = 500).  The event vanishes in the
    # limit but decays on the same slow scale as criterion 4's law, so 0.95
    # needs n ~ 1e7.
    _, records = subcritical_run
    recs = records[-1]
    n = recs["n"]
    assert n == 10**6
    p = recs["p"]
    fp = recs["fp_max"][:500]
    lo = n ** -0.5 / (p * p)
    hi = 0.5 / (p * p)
    frac = float(np.mean((fp > lo) & (fp < hi)))
    ok = frac >= 0.95
    line = _report(5, ok, f"window ({lo:.0f}, {hi:.0f}) holds {frac:.3f} "
                          f"of 500 replicas, need >= 0.95")
    assert ok, line


def test_criterion_6_supercritical_burnt_law(supercritical_run):
    # alpha = 3/4: (np)^-2 B_n vs the inverse-chi-square CDF (KS < 0.06 at
    # n = 1e6), the first three appearance-order burnt masses against the
    # subordinator atoms, and the first burnt mass against Z^2/e^2.
    #
    # Known gap, left red on purpose: the totals law and the first-mass
    # checks pass (0.041 and 0.048) but appearance coordinates 2 and 3 sit
    # at 0.073 and 0.11.  The gap is the size lattice: a burnt component
    # has at least 2 vertices, i.e. 2/(np)^2 = 0.002 rescaled, while the
    # limit law of coordinate j (Z_j^2 / gamma_j^2) puts mass ~ j sqrt(2/pi)
    # sqrt(x) below x -- 0.036 / 0.071 / 0.107 below the cutoff for
    # j = 1, 2, 3, which is the observed KS to within noise.  Conditioned
    # above the cutoff the laws agree to 0.04-0.06, the two-sample floor at
    # 1000 replicas.  Clearing 0.06 on coordinate 3 needs np > 56, i.e.
    # n > 1.01e7 at this alpha.
    tests, _ = supercritical_run
    final = next(t for t in tests if t["name"] == "supercritical_ks_final")
    coords = [t["statistic"] for t in tests
              if t["name"].startswith("supercritical_appearance")]
    first = next(t for t in tests
                 if t["name"] == "supercritical_first_burnt_vs_exp_gaussian")
    ok = all(t["passed"] for t in tests)
    line = _report(6, ok, f"KS final {final['statistic']:.4f} < 0.06, appearance "
                          f"coords {[round(v, 4) for v in coords]} < 0.06, first "
                          f"vs Z^2/e^2 {first['statistic']:.4f} < 0.06")
    assert ok, line


def test_criterion_7_distribution_identities():
    # representation check <= 1e-6, Laplace transforms within 3 s.e. at 1e6
    # samples for q in {0.5, 1.5}, subcritical limit KS < 0.03 at 1e4 draws
    # (J = 1e3), Borel-Tanner convolution identity <= 1e-12
    config = ExperimentConfig(
        suite="distributions", regime=RegimeSpec(p=0.3), n_values=[],
        replicas=1_000_000, seed=SEED, threads=1)
    t0 = time.perf_counter()
    tests, _ = _suite_distributions(config)
    elapsed = time.perf_counter() - t0
    ok = all(t["passed"] for t in tests)
    named = {t["name"]: t["statistic"] for t in tests}
    line = _report(7, ok,
                   f"representation {named['d_representation_vs_quadrature']:.2e}"
                   f" <= 1e-6, subcritical-limit KS "
                   f"{named['subcritical_limit_vs_chi2']:.4f} < 0.03, convolution "
                   f"{named['borel_tanner_convolution']:.2e} <= 1e-12, Laplace "
                   f"within 3 s.e.; failed={_failed_names(tests)}; {elapsed:.0f}s")
    assert ok, line


def test_criterion_8_rooted_mark_law():
    # n = 30, p = 0.2, 1e6 replicas: joint (C0, M) counts against the closed
    # form, and M - 1 given C0 = 5 against Binomial(24, 1/26), both at 1e-3
    n, p, reps = 30, 0.2, 1_000_000
    t0 = time.perf_counter()
    c0s, ms, _ = rooted_mark_batch(n, p, stream(SEED, "marked", n, 0), reps)
    table = joint_root_marks_table(n, p)
    law = {}
    for x in range(n + 1):
        for y in range(n + 1):
            if table[x, y] > 0:
                law[(x, y)] = table[x, y]
    keys, counts = np.unique(np.stack([c0s, ms], axis=1), axis=0,
                             return_counts=True)
    observed = {(int(x), int(y)): int(c) for (x, y), c in zip(keys, counts)}
    _, _, p_joint = chi_square_test(observed, law)

    x0 = 5
    sel = ms[c0s == x0] - 1
    trials = n - x0 - 1
    succ = x0 * p / (n - x0 + x0 * p)
    cond_law = {k: float(sps.binom.pmf(k, trials, succ)) for k in range(trials + 1)}
    cond_counts = {int(k): int(c) for k, c in zip(*np.unique(sel, return_counts=True))}
    _, _, p_cond = chi_square_test(cond_counts, cond_law)
    elapsed = time.perf_counter() - t0
    ok = p_joint >= CHI2_ALPHA and p_cond >= CHI2_ALPHA
    line = _report(8, ok, f"joint chi-square p {p_joint:.3f}, conditional "
                          f"(C0=5, {sel.size} hits) p {p_cond:.3f}, both vs "
                          f"alpha {CHI2_ALPHA}; {elapsed:.0f}s")
    assert ok, line


def test_criterion_9_marked_window_bound():
    # normalized window sums of marked-component sizes: non-increasing in the
    # window start a/p (within Monte Carlo error) and uniformly below the
    # witness constant C = 2.0 for n = 1e3, 1e4 at alpha = 3/4
    C = 2.0
    reps = 1000
    results = {}
    t0 = time.perf_counter()
    for n in (1000, 10_000):
        p = n ** -0.75
        hi = int(n - n * math.exp(-math.sqrt(n * p)))
        for a in (1, 2, 4):
            lo = int(a / p)
            vals = np.empty(reps)
            for r in range(reps):
                rng = stream(SEED, "marked", n, r)
                tree = sample_uniform_tree(n, rng)
                order = rng.permutation(n - 1)
                sizes = run_marked_process(tree, order, rng)
                vals[r] = sizes[lo - 1:hi].sum()
            scale = n * n * p
            results[(n, a)] = (vals.mean() / scale,
                               vals.std(ddof=1) / math.sqrt(reps) / scale)
    elapsed = time.perf_counter() - t0
    ok_bound = all(q < C for q, _ in results.values())
    ok_mono = True
    for n in (1000, 10_000):
        for a, b in ((1, 2), (2, 4)):
            qa, sa = results[(n, a)]
            qb, sb = results[(n, b)]
            ok_mono = ok_mono and (qb <= qa + 3 * (sa + sb))
    ok = ok_bound and ok_mono
    shown = {f"n={n},a={a}": round(q, 4) for (n, a), (q, _) in results.items()}
    line = _report(9, ok, f"windowed means {shown} all < C = {C}, "
                          f"non-increasing in a within 3 s.e.; {elapsed:.0f}s")
    assert ok, line
