"""Grow a few graphs and look at their group-degree distribution.

With every initial popularity equal to one the degree law should be close
to geometric with mean mu.  With heavy-tailed initial popularities the
tail of the degree law gets heavier, but the bulk stays shaped by mu.

Run: python3 demos/01_generate_and_degrees.py
"""
import numpy as np

from popgraph import BigraphParams, generate
from popgraph.analytics import (default_fit_window, degree_moment_stats, empirical_degree_pmf,
                                fingerprint_sparsity, fit_powerlaw_exponent,
                                geometric_degree_pmf, total_variation)

rng = np.random.default_rng(1)

# %% Uniform popularities: geometric limit
params = BigraphParams(n=10_000, m=100_000, mu=5, alpha=float("inf"))
graphs = [generate(params, rng) for _ in range(5)]
pmf = empirical_degree_pmf(graphs)
tv = total_variation(pmf, lambda k: geometric_degree_pmf(params.mu, k))
print(f"alpha=inf: pooled {pmf.sample_count} groups, TV to geometric = {tv:.4f}")
print("   k   empirical   geometric")
for k, p in list(pmf.as_dict().items())[:8]:
    print(f"{k:4d}   {p:9.4f}   {geometric_degree_pmf(params.mu, k):9.4f}")

# %% Heavy-tailed popularities
for alpha in (3.0, 5.0):
    params = BigraphParams(n=10_000, m=1_000, mu=10, alpha=alpha)
    graphs = [generate(params, rng) for _ in range(5)]
    pmf = empirical_degree_pmf(graphs)
    lo, hi = default_fit_window(params.n)
    print(f"\nalpha={alpha:g}: max degree {pmf.support.max()}, "
          f"slope on [{lo},{hi}] = {fit_powerlaw_exponent(pmf, lo, hi):.2f}, "
          f"slope on [50,400] = {fit_powerlaw_exponent(pmf, 50, 400):.2f}")

# %% Moments and fingerprint sparsity on one graph
params = BigraphParams(n=1_000, m=1_000, mu=5, alpha=3.0, seed=4)
graph = generate(params)
print()
print(degree_moment_stats([graph]).to_text(), end="")
print(fingerprint_sparsity(graph, psi=1.0).to_text(), end="")
