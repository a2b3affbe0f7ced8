"""Limit objects: Borel and Borel-Tanner laws, the critical fireproof-density
law D(c), the subtree law mu_x, Z^2 and Z^-2, stable-1/2 subordinator jumps,
conditioned jump sequences, and the three regime limit samplers.

All factorial/power terms are evaluated in log-space (log-gamma); masses are
exponentiated last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import integrate, special

from .treegen import _decode_kernel

MIN_DISCRETIZATION = 10_000


@dataclass(eq=False)
class JumpSequence:
    """Finite non-increasing positive sequence with an explicit bound on the
    expected l1 mass that was truncated away; total_hint carries the
    conditioned total when there is one."""

    values: np.ndarray
    tail_mass_bound: float
    total_hint: float | None = None

    def validate(self) -> None:
        v = self.values
        if v.size and (np.any(v <= 0) or np.any(np.diff(v) > 0)):
            raise ValueError("values must be positive and non-increasing")
        if self.tail_mass_bound < 0:
            raise ValueError("tail_mass_bound must be nonnegative")
        if self.total_hint is not None:
            slack = 1e-9 * max(1.0, abs(self.total_hint))
            if v.sum() > self.total_hint + slack:
                raise ValueError("values sum beyond the conditioned total")


@dataclass(eq=False)
class RootedMarkOutcome:
    """Root component size, kept-mark count, and the other component sizes."""

    C0: int
    M: int
    others_ranked: np.ndarray

    def validate(self, n: int) -> None:
        if self.C0 + self.others_ranked.sum() != n:
            raise ValueError("component sizes do not partition n")
        if self.M != len(self.others_ranked):
            raise ValueError("M inconsistent with others_ranked")


# -- Borel / Borel-Tanner ----------------------------------------------------

def borel_pmf(z: float, m) -> np.ndarray | float:
    """P(Borel(z) = m) = e^{-mz} (mz)^{m-1} / m!  for m >= 1, 0 < z <= 1."""
    if not 0 < z <= 1:
        raise ValueError("z must lie in (0, 1]")
    marr = np.asarray(m)
    if np.any(marr < 1):
        raise ValueError("m must be >= 1")
    mf = marr.astype(np.float64)
    logp = -mf * z + (mf - 1) * np.log(mf * z) - special.gammaln(mf + 1)
    out = np.exp(logp)
    return float(out) if np.isscalar(m) else out


def borel_tanner_pmf(k: int, m) -> np.ndarray | float:
    """P(sum of k i.i.d. Borel(1) = m) = k/(m-k)! e^{-m} m^{m-k-1}; 0 if m < k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    marr = np.asarray(m)
    mf = marr.astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        logp = (np.log(k) - special.gammaln(mf - k + 1) - mf
                + (mf - k - 1) * np.log(mf))
    out = np.where(marr >= k, np.exp(logp), 0.0)
    return float(out) if np.isscalar(m) else out


def sample_borel(z: float, stream: np.random.Generator, size: int | None = None,
                 cap: int | None = None):
    """Total progeny of a branching queue with Poisson(z) offspring.

    At z = 1 the progeny has an infinite mean (tail ~ m^{-3/2}); pass `cap`
    to stop chains whose total exceeds it, which then report cap + 1.
    """
    if not 0 < z <= 1:
        raise ValueError("z must lie in (0, 1] (z > 1 would not terminate)")
    scalar = size is None
    count = 1 if scalar else int(size)
    alive = np.ones(count, dtype=np.int64)
    total = np.ones(count, dtype=np.int64)
    capv = None if cap is None else int(cap)
    active = np.flatnonzero(alive)
    while active.size:
        off = stream.poisson(z * alive[active])
        alive[active] = off
        total[active] += off
        if capv is not None:
            alive[active[total[active] > capv]] = 0
        active = active[alive[active] > 0]
    if capv is not None:
        total = np.minimum(total, capv + 1)
    return int(total[0]) if scalar else total


# -- D(c), mu_x, Z^2, Z^-2 ---------------------------------------------------

def d_density(c: float, x) -> np.ndarray | float:
    """Density of the critical fireproof proportion:
    c / sqrt(2 pi x (1-x)^3) * exp(-c^2 x / (2 (1-x))) on (0, 1)."""
    if c <= 0:
        raise ValueError("c must be > 0")
    xarr = np.asarray(x, dtype=np.float64)
    if np.any(xarr <= 0) or np.any(xarr >= 1):
        raise ValueError("x must lie strictly inside (0, 1)")
    out = (c / np.sqrt(2 * np.pi * xarr * (1 - xarr) ** 3)
           * np.exp(-c * c * xarr / (2 * (1 - xarr))))
    return float(out) if np.isscalar(x) else out


def d_cdf(c: float, x) -> np.ndarray | float:
    """Closed-form CDF of D(c): 2 Phi(c sqrt(x/(1-x))) - 1 (clamped outside (0,1))."""
    if c <= 0:
        raise ValueError("c must be > 0")
    xarr = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    with np.errstate(divide="ignore"):
        t = np.where(xarr >= 1, np.inf, c * np.sqrt(xarr / np.maximum(1 - xarr, 1e-300)))
    out = special.erf(t / np.sqrt(2))
    return float(out) if np.isscalar(x) else out


def d_cdf_quadrature(c: float, x) -> np.ndarray | float:
    """CDF of D(c) by adaptive quadrature of the density (independent of the
    closed form; substitution t = sqrt(u) removes the endpoint singularity)."""
    if c <= 0:
        raise ValueError("c must be > 0")

    def integrand(t):
        s = t * t
        return 2 * c / np.sqrt(2 * np.pi * (1 - s) ** 3) * np.exp(-c * c * s / (2 * (1 - s)))

    def one(xv):
        if xv <= 0:
            return 0.0
        if xv >= 1:
            return 1.0
        val, _ = integrate.quad(integrand, 0.0, math.sqrt(xv), epsabs=1e-12,
                                epsrel=1e-11, limit=200)
        return min(val, 1.0)

    if np.isscalar(x):
        return one(float(x))
    return np.array([one(float(v)) for v in np.asarray(x)])


def verify_d_representation(c_values=(0.1, 1.0, 10.0), grid_points: int = 1000) -> float:
    """Max absolute gap between the CDF of Z^2/(c^2+Z^2) (the sampler's
    representation) and quadrature of the density, over a uniform grid.

    Gates the use of sample_d; callers assert the result is <= 1e-6.
    """
    xs = np.linspace(0.0, 1.0, grid_points + 2)[1:-1]
    worst = 0.0
    for c in c_values:
        gap = np.abs(d_cdf(c, xs) - d_cdf_quadrature(c, xs))
        worst = max(worst, float(gap.max()))
    return worst


def sample_d(c: float, stream: np.random.Generator, size: int | None = None):
    """D(c) via the representation Z^2 / (c^2 + Z^2), Z standard Gaussian.

    The representation is certified against quadrature of the density by
    verify_d_representation (checked in the test suite and the
    `distributions` suite before anything relies on it).
    """
    if c <= 0:
        raise ValueError("c must be > 0")
    z = stream.standard_normal(size)
    z2 = z * z
    out = z2 / (c * c + z2)
    return float(out) if size is None else out


def mu_x_sample(x: float, stream: np.random.Generator, size: int | None = None):
    """mu_x draw on (0, x): x times a D(sqrt(x)) draw."""
    if x <= 0:
        raise ValueError("x must be > 0")
    return x * sample_d(math.sqrt(x), stream, size)


def sample_chi2_1(stream: np.random.Generator, size: int | None = None):
    """Z^2 with Z standard Gaussian."""
    z = stream.standard_normal(size)
    out = z * z
    return float(out) if size is None else out


def sample_inv_chi2_1(stream: np.random.Generator, size: int | None = None):
    """Z^-2 with Z standard Gaussian."""
    out = 1.0 / sample_chi2_1(stream, size)
    return float(out) if size is None else out


def chi2_1_cdf(x) -> np.ndarray | float:
    """P(Z^2 <= x) = 2 Phi(sqrt(x)) - 1 = erf(sqrt(x/2))."""
    xarr = np.maximum(np.asarray(x, dtype=np.float64), 0.0)
    out = special.erf(np.sqrt(xarr / 2))
    return float(out) if np.isscalar(x) else out


def inv_chi2_1_cdf(x) -> np.ndarray | float:
    """P(Z^-2 <= x) = 2 Phi(-1/sqrt(x)) = erfc(1/sqrt(2x))."""
    xarr = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore"):
        out = np.where(xarr > 0, special.erfc(1.0 / np.sqrt(2 * np.maximum(xarr, 1e-300))), 0.0)
    return float(out) if np.isscalar(x) else out


# -- stable-1/2 jumps ---------------------------------------------------------

def stable_tail_mass_bound(J: int) -> float:
    """E[sum_{i>J} gamma_i^-2 Z_i^2] = 1/(J-1).

    Derivation: E[gamma_i^-2] = 1/((i-1)(i-2)) for i >= 3 (gamma_i is
    Gamma(i, 1)), E[Z^2] = 1, and the sum over i > J telescopes to 1/(J-1).
    """
    if J < 2:
        raise ValueError("tail bound needs J >= 2")
    return 1.0 / (J - 1)


def stable_jump_atoms(count: int, stream: np.random.Generator):
    """(gamma_i, gamma_i^-2 Z_i^2) for i = 1..count, in appearance order
    (gamma strictly increasing); these are the atoms of a Poisson measure with
    intensity (2 pi x^3)^{-1/2} dx."""
    if count < 1:
        raise ValueError("count must be >= 1")
    gammas = np.cumsum(stream.exponential(size=count))
    z = stream.standard_normal(count)
    atoms = z * z / (gammas * gammas)
    return gammas, atoms


# -- conditioned Borel decompositions ----------------------------------------

@njit(cache=True, nogil=True)
def _cond_borel_kernel(k, a, u):
    # Sequentially inverts P(beta = m | rest sums to ar with kr parts), the
    # conditional being bp(m) bt(kr-1, ar-m) / bt(kr, ar).  The pmf piles up
    # at both ends (small parts and one near-total giant), so the inverse-CDF
    # scan runs from both ends at once; log-factorials update incrementally,
    # one log per term.  Work per part = min(m, ar - m) + O(1).
    out = np.empty(k, dtype=np.int64)
    kr = k
    ar = a
    for i in range(k - 1):
        target = u[i]
        kk = kr - 1
        mmax = ar - kk
        if mmax == 1:
            out[i] = 1
            ar -= 1
            kr -= 1
            continue
        lden = (np.log(kr) - math.lgamma(ar - kr + 1.0) - ar
                + (ar - kr - 1) * np.log(ar))
        vtop = 1.0 - target
        accB = 0.0
        accT = 0.0
        b = 1
        t = mmax
        lfb = 0.0                              # log b!   (filled at eval)
        lf2 = math.lgamma(ar - 1.0 - kk + 1.0)  # log (ar - b - kk)!
        lf3 = 0.0                              # log (j - kk)!, j = ar - t
        lf4 = math.lgamma(mmax + 1.0)          # log t!
        chosen = -1
        while True:
            lfb += np.log(b)
            s = ar - b
            lb = -b + (b - 1) * np.log(b) - lfb
            lt = np.log(kk) - lf2 - s + (s - kk - 1) * np.log(s)
            accB += np.exp(lb + lt - lden)
            if accB >= target:
                chosen = b
                break
            if b == t:
                chosen = b  # float leftovers; probability ~ 0
                break
            lf2 -= np.log(s - kk)
            b += 1
            j = ar - t
            lbp = -t + (t - 1) * np.log(t) - lf4
            ltt = np.log(kk) - lf3 - j + (j - kk - 1) * np.log(j)
            accT += np.exp(lbp + ltt - lden)
            if accT > vtop:
                chosen = t
                break
            if t == b:
                chosen = b
                break
            lf4 -= np.log(t)
            t -= 1
            lf3 += np.log(ar - t - kk)
        out[i] = chosen
        ar -= chosen
        kr -= 1
    out[k - 1] = ar
    return out


def conditioned_borel_vector(k: int, a: int, stream: np.random.Generator) -> np.ndarray:
    """Exact draw of k i.i.d. Borel(1) variables conditioned to sum to a,
    by sequential conditionals (log-space, cumulative inversion).

    The output vector is exchangeable in law.
    """
    if k < 1 or a < k:
        raise ValueError("need k >= 1 and a >= k")
    if k == 1:
        return np.array([a], dtype=np.int64)
    u = stream.random(k - 1)
    return _cond_borel_kernel(k, a, u)


Z_FULL_RESOLUTION = 16.0


def conditioned_jumps(z: float, N: int, stream: np.random.Generator) -> JumpSequence:
    """Ranked jumps of the stable-1/2 subordinator given sigma(1) = z,
    approximated by floor(sqrt(N)) conditioned Borel(1) variables summing to
    floor(zN), rescaled by 1/N.  Accuracy improves with N (no closed-form
    rate; see the `distributions` suite for the self-convergence diagnostic).

    Only the ratio total/parts^2 pins the bridge parameter: k ~ lambda*sqrt(m)
    parts summing to a ~ nu*m converge to the jumps given sigma(1) = nu/lambda^2
    for any lambda.  For z > 16 the draw therefore uses fewer parts,
    k' = floor(sqrt(16 N / z)) with total floor(z k'^2), keeping the ratio at z
    while bounding the inverse-CDF scan by 32 N terms; the direct construction
    would cost O(zN) with no gain in accuracy for the top jumps.
    """
    if z <= 0:
        raise ValueError("z must be > 0")
    if N < MIN_DISCRETIZATION:
        raise ValueError(f"N must be >= {MIN_DISCRETIZATION}")
    k = int(math.isqrt(N))
    if int(z * N) < k:
        raise ValueError("z too small for this discretization (floor(zN) < sqrt(N))")
    total = int(z * N) / N
    if z <= Z_FULL_RESOLUTION:
        vec = conditioned_borel_vector(k, int(z * N), stream)
        values = np.sort(vec)[::-1].astype(np.float64) / N
    else:
        kp = max(1, int(math.isqrt(int(Z_FULL_RESOLUTION * N / z))))
        if kp == 1:
            values = np.array([total], dtype=np.float64)
        else:
            ap = int(z * kp * kp)
            vec = conditioned_borel_vector(kp, ap, stream)
            values = np.sort(vec)[::-1].astype(np.float64) * (total / ap)
    return JumpSequence(values, tail_mass_bound=0.0, total_hint=z)


def critical_limit_sample(c: float, N: int, stream: np.random.Generator):
    """Critical limit of (fireproof fraction, ranked burnt masses): x ~ D(c),
    then ranked jumps conditioned on total (1-x)/(c^2 x^2), scaled to sum to
    exactly 1 - x."""
    x = sample_d(c, stream)
    z = (1 - x) / (c * c * x * x)
    jumps = conditioned_jumps(z, N, stream)
    scale = (1 - x) / jumps.values.sum()
    return x, JumpSequence(jumps.values * scale, tail_mass_bound=0.0,
                           total_hint=1 - x)


# -- regime limit samplers ----------------------------------------------------

def subcritical_limit_components(stream: np.random.Generator, J: int, size: int = 1):
    """One subcritical-limit draw per row: (e, atoms e^2 J_k, summands
    X_k <= e^2 J_k, tail bias e^2/(J-1))."""
    if J < 2:
        raise ValueError("J must be >= 2")
    e = stream.exponential(size=(size, 1))
    gammas = np.cumsum(stream.exponential(size=(size, J)), axis=1)
    z = stream.standard_normal((size, J))
    atoms = (e * e) * z * z / (gammas * gammas)
    w = stream.standard_normal((size, J))
    w2 = w * w
    summands = atoms * w2 / (atoms + w2)
    return e[:, 0], atoms, summands, (e[:, 0] ** 2) / (J - 1)


def subcritical_limit_sample(stream: np.random.Generator, J: int,
                             size: int | None = None):
    """Sum of X_k over the first J atoms of the subcritical limit; equals Z^2
    in distribution as J -> infinity, with expected truncated mass
    E[e^2]/(J-1) = 2/(J-1)."""
    scalar = size is None
    count = 1 if scalar else int(size)
    out = np.empty(count)
    chunk = 4096
    for lo in range(0, count, chunk):
        hi = min(lo + chunk, count)
        _, _, summands, _ = subcritical_limit_components(stream, J, hi - lo)
        out[lo:hi] = summands.sum(axis=1)
    return float(out[0]) if scalar else out


def supercritical_limit_sequence(stream: np.random.Generator, J: int):
    """First J burnt masses in appearance order, (gamma_i^-2 Z_i^2)_{i<=J},
    with the expected l1 tail mass 1/(J-1) reported alongside."""
    if J < 2:
        raise ValueError("J must be >= 2")
    _, atoms = stable_jump_atoms(J, stream)
    return atoms, stable_tail_mass_bound(J)


def ranked_jumps(values) -> np.ndarray:
    """Non-increasing copy of a sequence of nonnegative jump increments."""
    v = np.asarray(values, dtype=np.float64)
    if v.size and v.min() < 0:
        raise ValueError("increments must be nonnegative")
    return np.sort(v)[::-1].copy()


# -- rooted marked trees -------------------------------------------------------

@njit(cache=True, nogil=True)
def _rooted_core(n, code, root, umarks, p, sizes_out):
    edges = _decode_kernel(code)
    deg = np.zeros(n, dtype=np.int64)
    for i in range(n - 1):
        deg[edges[i, 0]] += 1
        deg[edges[i, 1]] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + deg[v]
    cursor = indptr[:-1].copy()
    nbr = np.empty(2 * (n - 1), dtype=np.int64)
    for i in range(n - 1):
        u, v = edges[i, 0], edges[i, 1]
        nbr[cursor[u]] = v
        cursor[u] += 1
        nbr[cursor[v]] = u
        cursor[v] += 1
    parent = np.full(n, -1, dtype=np.int64)
    bfs = np.empty(n, dtype=np.int64)
    seen = np.zeros(n, dtype=np.bool_)
    bfs[0] = root
    seen[root] = True
    head, tail = 0, 1
    while head < tail:
        v = bfs[head]
        head += 1
        for idx in range(indptr[v], indptr[v + 1]):
            w = nbr[idx]
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                bfs[tail] = w
                tail += 1
    marked = np.zeros(n, dtype=np.bool_)
    for v in range(n):
        if v != root and umarks[v] < p:
            marked[v] = True
    # kept = marked with no marked strict ancestor (scan top-down)
    anc_marked = np.zeros(n, dtype=np.bool_)
    kept = np.zeros(n, dtype=np.bool_)
    for i in range(1, n):
        v = bfs[i]
        par = parent[v]
        anc_marked[v] = anc_marked[par] or marked[par]
        kept[v] = marked[v] and not anc_marked[v]
    subtree = np.ones(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        v = bfs[i]
        subtree[parent[v]] += subtree[v]
    m = 0
    for v in range(n):
        if kept[v]:
            sizes_out[m] = subtree[v]
            m += 1
    c0 = n
    for i in range(m):
        c0 -= sizes_out[i]
    return c0, m


@njit(cache=True, nogil=True)
def _rooted_batch_kernel(n, codes, roots, umarks, p):
    reps = codes.shape[0]
    c0s = np.empty(reps, dtype=np.int64)
    ms = np.empty(reps, dtype=np.int64)
    largest = np.zeros(reps, dtype=np.int64)
    sizes = np.empty(n, dtype=np.int64)
    for r in range(reps):
        c0, m = _rooted_core(n, codes[r], roots[r], umarks[r], p, sizes)
        c0s[r] = c0
        ms[r] = m
        big = 0
        for i in range(m):
            if sizes[i] > big:
                big = sizes[i]
        largest[r] = big
    return c0s, ms, largest


def rooted_mark_outcome(n: int, p: float, stream: np.random.Generator) -> RootedMarkOutcome:
    """Uniform rooted Cayley tree (uniform tree, uniform root), each non-root
    vertex marked independently with probability p, marks with marked strict
    ancestors erased; returns the root component size, the kept-mark count,
    and the other component sizes ranked."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    code = stream.integers(0, n, size=max(n - 2, 0))
    root = int(stream.integers(0, n))
    umarks = stream.random(n)
    sizes = np.empty(n, dtype=np.int64)
    c0, m = _rooted_core(n, code, root, umarks, p, sizes)
    others = np.sort(sizes[:m])[::-1].copy()
    return RootedMarkOutcome(int(c0), int(m), others)


def rooted_mark_batch(n: int, p: float, stream: np.random.Generator, replicas: int):
    """(C0, M, largest other component) over many independent replicas."""
    if n < 2:
        raise ValueError("n must be >= 2")
    c0s = np.empty(replicas, dtype=np.int64)
    ms = np.empty(replicas, dtype=np.int64)
    largest = np.empty(replicas, dtype=np.int64)
    chunk = 65536
    for lo in range(0, replicas, chunk):
        hi = min(lo + chunk, replicas)
        codes = stream.integers(0, n, size=(hi - lo, max(n - 2, 0)))
        roots = stream.integers(0, n, size=hi - lo)
        umarks = stream.random((hi - lo, n))
        c, m, big = _rooted_batch_kernel(n, codes, roots, umarks, p)
        c0s[lo:hi] = c
        ms[lo:hi] = m
        largest[lo:hi] = big
    return c0s, ms, largest


def joint_root_marks_pmf(n: int, p: float, x: int, y: int) -> float:
    """Closed-form P(C0 = x, M = y) for y >= 1:
    n! (x(1-p))^{x-1} (xp)^y (n-x)^{n-x-y-1} / (n^{n-1} x! (y-1)! (n-x-y)!).

    The y = 0 cell has no displayed closed form; it is the no-marks event,
    P(C0 = n, M = 0) = (1-p)^{n-1}, which completes the table to total mass 1
    (verified numerically in the tests).
    """
    if y == 0:
        return float((1 - p) ** (n - 1)) if x == n else 0.0
    if x < 1 or y < 1 or x + y > n:
        return 0.0
    if p == 0:
        return 0.0
    if p == 1 and x > 1:
        return 0.0
    logp = (special.gammaln(n + 1) + y * math.log(x * p)
            + (n - x - y - 1) * math.log(n - x)
            - (n - 1) * math.log(n) - special.gammaln(x + 1)
            - special.gammaln(y) - special.gammaln(n - x - y + 1))
    if x > 1:
        logp += (x - 1) * math.log(x * (1 - p))
    return float(math.exp(logp))


def joint_root_marks_table(n: int, p: float) -> np.ndarray:
    """(n+1) x (n+1) array T with T[x, y] = P(C0 = x, M = y)."""
    t = np.zeros((n + 1, n + 1))
    t[n, 0] = (1 - p) ** (n - 1)
    for x in range(1, n):
        for y in range(1, n - x + 1):
            t[x, y] = joint_root_marks_pmf(n, p, x, y)
    return t
