"""Upper bounds on the expected number of A-ITS queries and on its error probability.

The number of groups of size d is modelled by its idealized mean
``n / (zeta(m, alpha) d**alpha)``.  Unknown proportionality constants enter as
`c_prime` and `c_thm1` (default 1), so every bound here holds only up to them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bigraph import BigraphParams, BipartiteGraph
from .numerics import ChannelSpec, bernoulli_channel_mi, binary_convolution, binary_entropy, partial_zeta
from .report import to_text

CONSTANTS_NOTE = "bounds hold up to the unspecified constants c (degree law) and c' (fingerprint memory)"


def _spec(channel) -> ChannelSpec:
    return getattr(channel, "spec", channel)


def psi(H_M: float, epsilon: float, i_max: float) -> float:
    """Information budget H(M) + log(1/epsilon) + i_max."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    return H_M + math.log(1.0 / epsilon) + i_max


def i_max(channels, graph: Optional[BipartiteGraph] = None,
          params: Optional[BigraphParams] = None) -> float:
    """Largest single-query information increment log P(y|r)/P(y).

    The response marginal is taken for each group size present in `graph`,
    or for every size 1..m when only `params` is given.  Sizes whose marginal
    is 0 or 1 carry no information and are skipped.
    """
    if graph is not None:
        m = graph.m
        sizes = np.unique(graph.degrees)
    elif params is not None:
        m = params.m
        sizes = np.arange(1, m + 1)
    else:
        raise ValueError("need a graph or params")
    chans = [_spec(c) for c in (channels.values() if isinstance(channels, dict) else channels)]
    best = -math.inf
    for ch in chans:
        q = ch.p_y1_given_r1 * (sizes / m) + ch.p_y1_given_r0 * (1.0 - sizes / m)
        q = q[(q > 0.0) & (q < 1.0)]
        if q.size == 0:
            continue
        for y in (0, 1):
            p_y = q if y else 1.0 - q
            for r in (0, 1):
                num = ch.prob(y, r)
                if num > 0.0:
                    best = max(best, float(np.max(np.log(num / p_y))))
    return max(best, 0.0) if best > -math.inf else 0.0


@dataclass
class BoundInputs:
    params: BigraphParams
    channels: dict
    p_theta: dict
    epsilon: float
    entropy: float
    c_prime: float = 1.0
    c_thm1: float = 1.0
    graph: Optional[BipartiteGraph] = None
    group_counts: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.c_prime <= 0 or self.c_thm1 <= 0:
            raise ValueError("constants must be positive")
        if self.entropy < 0:
            raise ValueError("entropy must be nonnegative")
        if set(self.p_theta) - set(self.channels):
            raise ValueError("p_theta refers to unknown noise classes")


@dataclass
class BoundResult:
    psi: float
    i_max: float
    entropy: float
    feasible: bool
    d_star: dict = field(default_factory=dict)
    i_star: dict = field(default_factory=dict)
    i_star_range: float = math.nan
    i_star_exceeds_range: bool = False
    q_bar_bound: float = math.inf
    p_e_bound: float = math.nan
    note: str = CONSTANTS_NOTE

    def to_text(self) -> str:
        return to_text(self)


def expected_group_counts(params: BigraphParams) -> np.ndarray:
    """Index d holds n / (zeta(m, alpha) d**alpha); index 0 is unused (0)."""
    d = np.arange(1, params.m + 1, dtype=np.float64)
    out = np.zeros(params.m + 1)
    out[1:] = params.n / (partial_zeta(params.m, params.alpha) * d ** params.alpha)
    return out


def _mi_table(channel: ChannelSpec, m: int) -> np.ndarray:
    return np.array([bernoulli_channel_mi(d, m, channel) for d in range(m + 1)])


def theorem2_bounds(inputs: BoundInputs) -> BoundResult:
    p = inputs.params
    if not (p.alpha > 2) or math.isinf(p.alpha):
        raise ValueError("finite alpha > 2 required")
    m = p.m
    if inputs.group_counts is not None:
        counts = np.zeros(m + 1)
        gc = np.asarray(inputs.group_counts, dtype=np.float64)
        counts[:min(gc.size, m + 1)] = gc[:m + 1]
        counts[0] = 0.0
    else:
        counts = expected_group_counts(p)
    imax = i_max(inputs.channels, graph=inputs.graph, params=p)
    budget = psi(inputs.entropy, inputs.epsilon, imax)
    result = BoundResult(psi=budget, i_max=imax, entropy=inputs.entropy, feasible=False,
                         p_e_bound=inputs.epsilon / inputs.c_prime)

    info = {th: _mi_table(_spec(inputs.channels[th]), m) for th in inputs.p_theta}
    # weighted[d] = sum_theta P(theta) E(N_d) I_{d,theta}
    weighted = sum(pt * counts * info[th] for th, pt in inputs.p_theta.items())
    # tail[d] = sum_{d' >= d} weighted[d'], tail[m + 1] = 0
    tail = np.concatenate((np.cumsum(weighted[::-1])[::-1], [0.0]))

    d_star = None
    for d in range(m, 0, -1):
        if budget <= inputs.c_prime * tail[max(d - 1, 1)]:
            d_star = d
            break
    if d_star is None:
        return result

    base = tail[d_star]
    step = sum(pt * info[th][d_star - 1] for th, pt in inputs.p_theta.items())
    limit = math.ceil(counts[d_star - 1]) if d_star > 1 else 0
    i_star = None
    i = 0
    while i <= limit + 1:
        if budget <= inputs.c_prime * (base + i * step):
            i_star = i
            break
        i += 1
    if i_star is None:
        return result

    result.feasible = True
    result.d_star = {th: d_star for th in inputs.p_theta}
    result.i_star = {th: i_star for th in inputs.p_theta}
    result.i_star_range = float(counts[d_star - 1]) if d_star > 1 else 0.0
    result.i_star_exceeds_range = i_star > result.i_star_range
    groups_above = float(counts[d_star:].sum())
    result.q_bar_bound = sum(pt * (groups_above + i_star) for pt in inputs.p_theta.values())
    return result


@dataclass
class CorollaryResult:
    psi: float
    i_max: float
    feasible: bool
    d_star: Optional[int] = None
    q_bar_bound: float = math.inf
    p_e_bound: float = math.nan
    note: str = CONSTANTS_NOTE

    def to_text(self) -> str:
        return to_text(self)


def corollary1_bound(params: BigraphParams, n_q: float, epsilon: float, c_thm1: float = 1.0,
                     c_prime: float = 1.0, H_M: Optional[float] = None) -> CorollaryResult:
    """Closed-form bound for a single binary symmetric channel with crossover `n_q`.

    `H_M` defaults to the uniform-victim entropy log(m).
    """
    if not (params.alpha > 2) or math.isinf(params.alpha):
        raise ValueError("finite alpha > 2 required")
    if not 0.0 <= n_q <= 0.5:
        raise ValueError("n_q must lie in [0, 1/2]")
    m, n, a = params.m, params.n, params.alpha
    if H_M is None:
        H_M = math.log(m)
    channel = ChannelSpec.bsc(n_q)
    imax = i_max([channel], params=params)
    budget = psi(H_M, epsilon, imax)
    out = CorollaryResult(psi=budget, i_max=imax, feasible=False, p_e_bound=epsilon / c_prime)
    scale = c_thm1 * n / ((a - 1.0) * partial_zeta(m, a))
    h_nq = binary_entropy(n_q)
    for d in range(m, 2, -1):
        gain = binary_entropy(binary_convolution(d / m, n_q)) - h_nq
        if budget <= c_prime * scale / d ** (a - 1.0) * gain:
            out.feasible = True
            out.d_star = d
            out.q_bar_bound = scale / (d - 2) ** (a - 1.0)
            break
    return out
