#!/usr/bin/env python3
# The three regimes of p_n = c n^-alpha, seen through the scaled statistics:
#   alpha < 1/2   p^2 I_n           -> Z^2
#   alpha = 1/2   I_n / n           -> D(c)
#   alpha > 1/2   (np)^-2 B_n       -> Z^-2
# Prints quantile tables against each limit CDF and saves one overlay plot.

import numpy as np

from treefire.cli import simulate_records
from treefire.limitlaws import chi2_1_cdf, d_cdf, inv_chi2_1_cdf
from treefire.stats import ks_distance

SEED = 7
REPLICAS = 400
QS = [0.1, 0.25, 0.5, 0.75, 0.9]


def quantile_row(label, values):
    cells = "  ".join(f"{v:8.4f}" for v in np.quantile(values, QS))
    print(f"  {label:<14}{cells}")


def limit_quantiles(cdf, grid):
    # invert a CDF numerically on a grid
    values = cdf(grid)
    return [float(np.interp(q, values, grid)) for q in QS]


print(f"quantiles at {QS}\n")

for alpha, label in ((0.25, "subcritical"), (0.5, "critical"), (0.75, "supercritical")):
    print(f"alpha = {alpha} ({label})")
    for n in (4000, 16000, 64000):
        p = n ** -alpha
        recs = simulate_records(n, p, SEED, REPLICAS, threads=4)
        if alpha < 0.5:
            scaled, cdf = p * p * recs["I"], chi2_1_cdf
            grid = np.geomspace(1e-4, 30, 4000)
        elif alpha == 0.5:
            scaled, cdf = recs["I"] / n, lambda x: d_cdf(1.0, x)
            grid = np.linspace(1e-6, 1 - 1e-6, 4000)
        else:
            scaled, cdf = recs["B"] / (n * p) ** 2, inv_chi2_1_cdf
            grid = np.geomspace(1e-2, 300, 4000)
        quantile_row(f"n = {n}", scaled)
        print(f"    KS distance to the limit: {ks_distance(scaled, cdf):.4f}")
    print(f"  {'limit':<14}" + "  ".join(f"{v:8.4f}" for v in limit_quantiles(cdf, grid)))
    print()

# overlay for the critical regime: empirical CDFs of I_n/n sharpen onto D(1)
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

xs = np.linspace(0.001, 0.999, 500)
plt.plot(xs, d_cdf(1.0, xs), "k-", lw=2, label="D(1)")
for n in (1000, 10000, 100000):
    recs = simulate_records(n, n ** -0.5, SEED, REPLICAS, threads=4)
    frac = np.sort(recs["I"] / n)
    plt.step(frac, np.arange(1, REPLICAS + 1) / REPLICAS, where="post",
             label=f"n = {n}", alpha=0.8)
plt.xlabel("fireproof fraction")
plt.ylabel("CDF")
plt.legend()
plt.tight_layout()
plt.savefig("critical_cdf.png", dpi=120)
print("wrote critical_cdf.png")
