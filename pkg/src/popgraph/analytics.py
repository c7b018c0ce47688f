"""Empirical checks of the degree, popularity and fingerprint statistics of generated graphs."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from .bigraph import BigraphParams, BipartiteGraph, initial_popularity_pmf
from .errors import EmptySupport, InsufficientSupport, ParamMismatch
from .numerics import binary_kl, partial_zeta
from .report import to_text


# -- degree distribution -----------------------------------------------------

@dataclass
class DegreePmf:
    support: np.ndarray
    mass: np.ndarray
    sample_count: int

    def stderr(self) -> np.ndarray:
        return np.sqrt(self.mass * (1.0 - self.mass) / self.sample_count)

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.support.tolist(), self.mass.tolist()))

    def to_csv(self, sink) -> None:
        if isinstance(sink, (str, os.PathLike)):
            with open(sink, "w", newline="") as fh:
                return self.to_csv(fh)
        w = csv.writer(sink, lineterminator="\n")
        w.writerow(["k", "mass", "stderr"])
        for k, p, se in zip(self.support, self.mass, self.stderr()):
            w.writerow([int(k), repr(float(p)), repr(float(se))])


def _common_params(graphs: Sequence[BipartiteGraph]) -> BigraphParams:
    if not graphs:
        raise ValueError("need at least one graph")
    p0 = graphs[0].params
    key = (p0.n, p0.m, p0.mu, p0.alpha)
    for g in graphs[1:]:
        p = g.params
        if (p.n, p.m, p.mu, p.alpha) != key:
            raise ParamMismatch(f"{p} differs from {p0}")
    return p0


def empirical_degree_pmf(graphs: Sequence[BipartiteGraph]) -> DegreePmf:
    """Histogram of group degrees pooled over all groups of all graphs."""
    _common_params(graphs)
    counts = np.bincount(np.concatenate([g.degrees for g in graphs]))
    support = np.nonzero(counts)[0]
    total = int(counts.sum())
    return DegreePmf(support, counts[support] / total, total)


def geometric_degree_pmf(mu: float, k) -> np.ndarray:
    """Limiting degree law when every initial popularity is one."""
    k = np.asarray(k, dtype=np.float64)
    return (mu / (1.0 + mu)) ** k / (1.0 + mu)


def total_variation(pmf: DegreePmf, reference) -> float:
    """TV distance to `reference`, a callable k -> mass over k = 0, 1, 2, ...

    Reference mass outside the empirical support counts as mismatch in full.
    """
    ref = np.asarray(reference(pmf.support), dtype=np.float64)
    outside = max(0.0, 1.0 - float(ref.sum()))
    return 0.5 * (float(np.abs(pmf.mass - ref).sum()) + outside)


def fit_powerlaw_exponent(pmf: DegreePmf, k_min: int, k_max: int) -> float:
    """Least-squares slope of log mass against log k on [k_min, k_max], negated."""
    sel = (pmf.support >= max(k_min, 1)) & (pmf.support <= k_max) & (pmf.mass > 0)
    if sel.sum() < 3:
        raise InsufficientSupport(f"fewer than 3 points with positive mass in [{k_min}, {k_max}]")
    slope, _ = np.polyfit(np.log(pmf.support[sel]), np.log(pmf.mass[sel]), 1)
    return -float(slope)


def default_fit_window(n: int) -> tuple[int, int]:
    # k_max stays well inside k = o(n^(1/alpha)) for alpha >= 3
    return 2, max(3, int(math.floor(n ** (1.0 / 3.0) + 1e-9)))


# -- initial popularities ----------------------------------------------------

def expected_popularity_sum(params: BigraphParams) -> float:
    if math.isinf(params.alpha):
        return float(params.n)
    return params.n * partial_zeta(params.m, params.alpha - 1) / partial_zeta(params.m, params.alpha)


def popularity_sum_variance_bound(params: BigraphParams) -> float:
    if math.isinf(params.alpha):
        return 0.0
    return params.n * partial_zeta(params.m, params.alpha - 2) / partial_zeta(params.m, params.alpha)


def popularity_sum_stats(params: BigraphParams, draw_count: int, rng: np.random.Generator,
                         chunk: int = 200) -> dict:
    """Sample mean and variance of the total initial popularity over `draw_count` replications."""
    if draw_count < 2:
        raise ValueError("draw_count must be >= 2")
    if math.isinf(params.alpha):
        sums = np.full(draw_count, params.n, dtype=np.int64)
    else:
        pmf = initial_popularity_pmf(params.m, params.alpha)
        pmf = pmf / pmf.sum()
        parts = []
        for start in range(0, draw_count, chunk):
            rows = min(chunk, draw_count - start)
            tau = rng.choice(params.m, size=(rows, params.n), p=pmf) + 1
            parts.append(tau.sum(axis=1))
        sums = np.concatenate(parts)
    return {"mean": float(sums.mean()), "variance": float(sums.var(ddof=1)),
            "stderr": float(sums.std(ddof=1) / math.sqrt(draw_count)), "count": draw_count}


# -- degree moments ----------------------------------------------------------

def _symmetric_product_means(degrees: np.ndarray, max_order: int) -> list[float]:
    """Average of D_{j1}...D_{jk} over all k-subsets of distinct groups, k = 1..max_order.

    Uses Newton's identities on exact integer power sums.
    """
    d = [int(x) for x in degrees]
    n = len(d)
    power = [None] + [sum(x ** k for x in d) for k in range(1, max_order + 1)]
    e = [1]
    for k in range(1, max_order + 1):
        acc = 0
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * power[i]
        e.append(acc // k)
    return [e[k] / comb(n, k) if comb(n, k) else math.nan for k in range(1, max_order + 1)]


@dataclass
class MomentReport:
    graphs: int
    mean_degree: float
    mean_square_degree: float
    pair_product_mean: float
    product_means: dict
    mean_degree_se: float
    mean_square_degree_se: float
    pair_product_mean_se: float
    product_means_se: dict
    per_graph_mean_degree: np.ndarray = field(repr=False)
    per_graph_pair_product: np.ndarray = field(repr=False)

    def to_text(self) -> str:
        return to_text(self, skip=("per_graph_mean_degree", "per_graph_pair_product"))


def degree_moment_stats(graphs: Sequence[BipartiteGraph], max_order: int = 3) -> MomentReport:
    """Estimate E(D), E(D^2) and E(D_1...D_xi) for distinct groups.

    Product moments use every subset of distinct groups in a graph, so each
    graph contributes one low-variance estimate; standard errors come from
    the spread across graphs (NaN with a single graph).  The first two
    moments use the pooled groups.
    """
    _common_params(graphs)
    max_order = max(2, max_order)
    all_deg = np.concatenate([g.degrees for g in graphs]).astype(np.float64)
    per_graph = np.array([_symmetric_product_means(g.degrees, max_order) for g in graphs])
    G = len(graphs)
    n_total = all_deg.size

    def se_across(col):
        return float(col.std(ddof=1) / math.sqrt(G)) if G > 1 else math.nan

    products = {k + 1: float(per_graph[:, k].mean()) for k in range(max_order)}
    products_se = {k + 1: se_across(per_graph[:, k]) for k in range(max_order)}
    return MomentReport(
        graphs=G,
        mean_degree=float(all_deg.mean()),
        mean_square_degree=float((all_deg ** 2).mean()),
        pair_product_mean=products[2],
        product_means=products,
        mean_degree_se=float(all_deg.std(ddof=1) / math.sqrt(n_total)) if n_total > 1 else math.nan,
        mean_square_degree_se=float((all_deg ** 2).std(ddof=1) / math.sqrt(n_total)) if n_total > 1 else math.nan,
        pair_product_mean_se=products_se[2],
        product_means_se=products_se,
        per_graph_mean_degree=per_graph[:, 0].copy(),
        per_graph_pair_product=per_graph[:, 1].copy(),
    )


# -- fingerprints ------------------------------------------------------------

def popularity_load(params: BigraphParams) -> float:
    """lambda(m, alpha) = mu + zeta(m, alpha - 1)."""
    return params.mu + partial_zeta(params.m, params.alpha - 1)


@dataclass
class SparsityReport:
    psi: float
    threshold: float
    empirical_tail: float
    chernoff_bound: float
    chernoff_exponent: float
    lam: float
    mean_weight: float
    constant: float = 1.0

    def to_text(self) -> str:
        return to_text(self)


def fingerprint_sparsity(graph: BipartiteGraph, psi: float) -> SparsityReport:
    """Tail of fingerprint weights above (n/m) * lambda * (1 + psi).

    The bound ``c * 2**(-n * D(lambda(1+psi)/m || lambda/m))`` is reported with
    c = 1 and the divergence in nats; it is a diagnostic, the constant is unknown.
    """
    p = graph.params
    lam = popularity_load(p)
    upper = p.m / lam - 1.0
    if not 0.0 < psi < upper:
        raise ValueError(f"psi must lie in (0, {upper:.6g})")
    threshold = lam * (1.0 + psi) / p.beta
    weights = graph.user_weights
    exponent = p.n * binary_kl(lam * (1.0 + psi) / p.m, lam / p.m)
    return SparsityReport(
        psi=float(psi),
        threshold=threshold,
        empirical_tail=float(np.mean(weights >= threshold)),
        chernoff_bound=2.0 ** -exponent,
        chernoff_exponent=exponent,
        lam=lam,
        mean_weight=float(weights.mean()),
    )


def _parse_pattern(pattern) -> list[int]:
    bits = [int(c) for c in pattern] if isinstance(pattern, str) else [int(b) for b in pattern]
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"pattern must be binary, got {pattern!r}")
    return bits


def memorylessness_ratio(graphs: Sequence[BipartiteGraph], group_subset, pattern) -> float:
    """Joint frequency of a fingerprint pattern over the product of its marginals.

    Frequencies are taken over all users of all graphs.  A ratio near one
    means the membership bits on `group_subset` behave independently.
    """
    _common_params(graphs)
    groups = list(group_subset)
    bits = _parse_pattern(pattern)
    if not 1 <= len(groups) <= 3 or len(bits) != len(groups):
        raise ValueError("need 1 to 3 groups and a pattern of the same length")
    joint = 0
    marginal = np.zeros(len(groups), dtype=np.int64)
    total = 0
    for g in graphs:
        match = np.ones(g.m, dtype=bool)
        for k, (j, b) in enumerate(zip(groups, bits)):
            col = g.membership_bits(j) == bool(b)
            marginal[k] += int(col.sum())
            match &= col
        joint += int(match.sum())
        total += g.m
    if (marginal == 0).any():
        raise EmptySupport("a marginal frequency is zero")
    ratio = joint / total
    for c in marginal:
        ratio /= c / total
    return float(ratio)


def memorylessness_bounds(params: BigraphParams, n_prime: int) -> tuple[float, float]:
    """Lower and upper multipliers (1 - n' lambda/m, exp(lambda/beta)) on the product law."""
    lam = popularity_load(params)
    return 1.0 - n_prime * lam / params.m, math.exp(lam / params.beta)
