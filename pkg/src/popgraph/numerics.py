"""Scalar helpers shared across the package.

All logarithms are natural logarithms, so entropies, divergences and
information values are in nats.  ``0 * log(0)`` is taken to be 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def _check_prob(name: str, p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"{name}={p!r} is not a probability")
    return p


def _xlogy(x: float, y: float) -> float:
    # x * log(y) with the 0 * log(0) = 0 convention
    if x == 0.0:
        return 0.0
    return x * math.log(y)


@dataclass(frozen=True)
class ChannelSpec:
    """Binary query channel given as P(Y=1 | R=1) and P(Y=1 | R=0)."""

    p_y1_given_r1: float
    p_y1_given_r0: float

    def __post_init__(self):
        _check_prob("p_y1_given_r1", self.p_y1_given_r1)
        _check_prob("p_y1_given_r0", self.p_y1_given_r0)

    @classmethod
    def bsc(cls, crossover: float) -> "ChannelSpec":
        """Binary symmetric channel flipping the membership bit w.p. `crossover`."""
        crossover = _check_prob("crossover", crossover)
        return cls(1.0 - crossover, crossover)

    @classmethod
    def noiseless(cls) -> "ChannelSpec":
        return cls(1.0, 0.0)

    def prob(self, y: int, r: int) -> float:
        """P(Y=y | R=r)."""
        p1 = self.p_y1_given_r1 if r else self.p_y1_given_r0
        return p1 if y else 1.0 - p1

    def output_prob(self, p_member: float) -> float:
        """P(Y=1) when the input bit is 1 with probability `p_member`."""
        return self.p_y1_given_r1 * p_member + self.p_y1_given_r0 * (1.0 - p_member)


@lru_cache(maxsize=4096)
def partial_zeta(m: int, s: float) -> float:
    """Return sum_{i=1}^{m} i**(-s).

    Any real `s` is accepted, including s <= 0 (used by moment formulas such
    as ``partial_zeta(m, alpha - 2)``).  The sum is correctly rounded.
    """
    m = int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    i = np.arange(1, m + 1, dtype=np.float64)
    return math.fsum(np.power(i, -float(s)).tolist())


def binary_entropy(p: float) -> float:
    """h_b(p) in nats."""
    p = _check_prob("p", p)
    return -_xlogy(p, p) - _xlogy(1.0 - p, 1.0 - p)


def binary_kl(p: float, q: float) -> float:
    """Binary Kullback-Leibler divergence D(p || q) in nats."""
    p = _check_prob("p", p)
    q = _check_prob("q", q)
    if (q == 0.0 and p > 0.0) or (q == 1.0 and p < 1.0):
        raise ValueError(f"D({p} || {q}) is infinite")
    d = 0.0
    if p > 0.0:
        d += p * math.log(p / q)
    if p < 1.0:
        d += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return max(d, 0.0)


def binary_convolution(a: float, b: float) -> float:
    """a * b = a(1-b) + b(1-a): crossover of two cascaded binary flips."""
    a = _check_prob("a", a)
    b = _check_prob("b", b)
    return a * (1.0 - b) + b * (1.0 - a)


def channel_mutual_information(p_member: float, channel: ChannelSpec) -> float:
    """I(Y; E) in nats for E ~ Bernoulli(p_member) sent through `channel`.

    Evaluated directly from the joint law, sum p(e,y) log p(e,y)/(p(e)p(y)).
    """
    p_member = _check_prob("p_member", p_member)
    p_e = (1.0 - p_member, p_member)
    q1 = channel.output_prob(p_member)
    p_y = (1.0 - q1, q1)
    mi = 0.0
    for e in (0, 1):
        for y in (0, 1):
            joint = p_e[e] * channel.prob(y, e)
            if joint > 0.0:
                mi += joint * math.log(joint / (p_e[e] * p_y[y]))
    return max(mi, 0.0)


def bernoulli_channel_mi(d: int, m: int, channel: ChannelSpec) -> float:
    """Mutual information of a group of size `d` out of `m` users queried through `channel`."""
    if m < 1 or not 0 <= d <= m:
        raise ValueError(f"need 0 <= d <= m, got d={d}, m={m}")
    return channel_mutual_information(d / m, channel)


def bsc_mutual_information(p_member: float, crossover: float) -> float:
    """Closed form h_b(p_member * crossover) - h_b(crossover) for a BSC."""
    return binary_entropy(binary_convolution(p_member, crossover)) - binary_entropy(crossover)
