"""Popularity-based bipartite graphs.

Groups (right vertices) carry integer popularities.  Starting from an empty
graph, each of the ``mu * n`` steps picks a group with probability
proportional to its popularity, attaches a user drawn uniformly among the
users not yet in that group, and bumps the group's popularity by one.
Initial popularities are i.i.d. with P(tau = k) proportional to k**-alpha on
``1..m``; ``alpha = INFINITE_ALPHA`` sets them all to one.

Indices are 0-based in the Python API.  The edge-list file format is 1-based.
"""
from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, NamedTuple

import numpy as np

from . import _kernels
from .errors import ConsistencyError, GenerationStalled, ParseError
from .numerics import partial_zeta

INFINITE_ALPHA = math.inf


@dataclass(frozen=True)
class BigraphParams:
    """Model parameters: n groups, m users, mu edges per group, power-law alpha."""

    n: int
    m: int
    mu: int
    alpha: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")
        if self.mu < 0 or int(self.mu) != self.mu:
            raise ValueError("mu must be a nonnegative integer")
        if not (self.alpha > 2):
            raise ValueError(f"alpha must be > 2 or INFINITE_ALPHA, got {self.alpha}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def n_edges(self) -> int:
        return self.mu * self.n

    @property
    def beta(self) -> float:
        return self.m / self.n


def initial_popularity_pmf(m: int, alpha: float) -> np.ndarray:
    """P(tau = k) for k = 1..m (index k-1)."""
    if math.isinf(alpha):
        pmf = np.zeros(m)
        pmf[0] = 1.0
        return pmf
    k = np.arange(1, m + 1, dtype=np.float64)
    return k ** -float(alpha) / partial_zeta(m, alpha)


def sample_initial_popularities(params: BigraphParams, rng: np.random.Generator) -> np.ndarray:
    if math.isinf(params.alpha):
        return np.ones(params.n, dtype=np.int64)
    pmf = initial_popularity_pmf(params.m, params.alpha)
    draws = rng.choice(params.m, size=params.n, p=pmf / pmf.sum())
    return draws.astype(np.int64) + 1


class PopularityState:
    """Integer group weights with a Fenwick tree for O(log n) weighted draws."""

    def __init__(self, weights):
        self.popularity = np.array(weights, dtype=np.int64)
        if self.popularity.ndim != 1 or (self.popularity < 0).any():
            raise ValueError("weights must be a 1-d array of nonnegative integers")
        self.tree = _kernels.fenwick_build(self.popularity)

    @property
    def total(self) -> int:
        return int(_kernels.fenwick_prefix(self.tree, self.popularity.size))

    def prefix_sums(self) -> np.ndarray:
        """Tree prefix sums; entry i is the sum of weights[:i+1]."""
        return np.array([_kernels.fenwick_prefix(self.tree, i + 1)
                         for i in range(self.popularity.size)], dtype=np.int64)

    def add(self, j: int, delta: int = 1) -> None:
        if self.popularity[j] + delta < 0:
            raise ValueError("weight would become negative")
        self.popularity[j] += delta
        _kernels.fenwick_add(self.tree, j, delta)

    def draw(self, rng: np.random.Generator, size=None):
        total = self.total
        if total <= 0:
            raise ValueError("all weights are zero")
        if size is None:
            return int(_kernels.fenwick_find(self.tree, int(rng.integers(total))))
        us = rng.integers(total, size=size).astype(np.int64)
        return _kernels.fenwick_find_many(self.tree, us)


class Fingerprint(NamedTuple):
    owner: int
    member_groups: np.ndarray
    weight: int


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Immutable user/group graph in compressed (per-group) form.

    ``indices[indptr[j]:indptr[j+1]]`` are the sorted members of group j.
    """

    params: BigraphParams
    indptr: np.ndarray
    indices: np.ndarray
    initial_popularity: np.ndarray

    def __post_init__(self):
        for arr in (self.indptr, self.indices, self.initial_popularity):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, params, groups, users, initial_popularity) -> "BipartiteGraph":
        groups = np.asarray(groups, dtype=np.int64)
        users = np.asarray(users, dtype=np.int64)
        order = np.lexsort((users, groups))
        counts = np.bincount(groups, minlength=params.n)
        indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        return cls(params, indptr, users[order].copy(),
                   np.array(initial_popularity, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def n_edges(self) -> int:
        return int(self.indices.size)

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.diff(self.indptr)
        d.setflags(write=False)
        return d

    @property
    def popularity(self) -> np.ndarray:
        """Final popularities tau_j(Delta) = tau_j(0) + D_j."""
        return self.initial_popularity + self.degrees

    def members(self, j: int) -> np.ndarray:
        return self.indices[self.indptr[j]:self.indptr[j + 1]]

    def has_edge(self, user: int, group: int) -> bool:
        mem = self.members(group)
        k = np.searchsorted(mem, user)
        return bool(k < mem.size and mem[k] == user)

    def membership_bits(self, group: int) -> np.ndarray:
        bits = np.zeros(self.m, dtype=bool)
        bits[self.members(group)] = True
        return bits

    @cached_property
    def _by_user(self):
        groups = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        order = np.lexsort((groups, self.indices))
        counts = np.bincount(self.indices, minlength=self.m)
        uptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        return uptr, groups[order]

    @property
    def user_weights(self) -> np.ndarray:
        """Number of groups each user belongs to."""
        return np.diff(self._by_user[0])

    def edges(self) -> Iterator[tuple[int, int]]:
        """(user, group) pairs in group-major order."""
        for j in range(self.n):
            for i in self.members(j):
                yield int(i), j

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (self.params == other.params
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.initial_popularity, other.initial_popularity))

    __hash__ = None


def generate(params: BigraphParams, rng: np.random.Generator | None = None) -> BipartiteGraph:
    """Grow a graph with ``params.mu * params.n`` edges.

    When `rng` is omitted the generator is seeded from ``params.seed``.
    Raises GenerationStalled if all groups fill up before the budget is placed.
    """
    if rng is None:
        rng = np.random.default_rng(params.seed)
    tau0 = sample_initial_popularities(params, rng)
    kernel_seed = int(rng.integers(0, 2**32))
    status, groups, users, _ = _kernels.attach_edges(tau0, params.m, params.n_edges, kernel_seed)
    if status == _kernels.STATUS_STALLED:
        raise GenerationStalled(
            f"all {params.n} groups saturated after {groups.size} of {params.n_edges} edges")
    return BipartiteGraph.from_edges(params, groups, users, tau0)


def fingerprint(graph: BipartiteGraph, user: int) -> Fingerprint:
    if not 0 <= user < graph.m:
        raise IndexError(f"user {user} out of range [0, {graph.m})")
    uptr, groups = graph._by_user
    member_groups = groups[uptr[user]:uptr[user + 1]]
    return Fingerprint(user, member_groups, int(member_groups.size))


# -- edge-list files ---------------------------------------------------------

def _format_alpha(alpha: float) -> str:
    return "inf" if math.isinf(alpha) else repr(float(alpha))


def save_edge_list(graph: BipartiteGraph, sink) -> None:
    """Write `graph` as text to a path or a writable text stream."""
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w") as fh:
            save_edge_list(graph, fh)
        return
    p = graph.params
    sink.write(f"bigraph v1 n={p.n} m={p.m} mu={p.mu} alpha={_format_alpha(p.alpha)} "
               f"seed={p.seed} edges={graph.n_edges}\n")
    for j, tau in enumerate(graph.initial_popularity):
        sink.write(f"g {j + 1} tau0={tau}\n")
    buf = io.StringIO()
    for j in range(graph.n):
        for i in graph.members(j):
            buf.write(f"e {i + 1} {j + 1}\n")
    sink.write(buf.getvalue())


def _parse_int(text, lineno, what):
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"bad {what} {text!r}", lineno) from None


def load_edge_list(source) -> BipartiteGraph:
    """Read a graph written by :func:`save_edge_list` (path or text stream)."""
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            return load_edge_list(fh)

    header = None
    tau0 = {}
    groups, users = [], []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if parts[:2] != ["bigraph", "v1"]:
                raise ParseError("expected 'bigraph v1' header", lineno)
            header = {}
            for tok in parts[2:]:
                key, sep, val = tok.partition("=")
                if not sep:
                    raise ParseError(f"bad header field {tok!r}", lineno)
                header[key] = val
            missing = {"n", "m", "mu", "alpha", "seed"} - header.keys()
            if missing:
                raise ParseError(f"header missing {sorted(missing)}", lineno)
            try:
                params = BigraphParams(
                    n=int(header["n"]), m=int(header["m"]), mu=int(header["mu"]),
                    alpha=float(header["alpha"]), seed=int(header["seed"]))
            except ValueError as exc:
                raise ParseError(f"bad header: {exc}", lineno) from None
            continue
        kind = parts[0]
        if kind == "g":
            if len(parts) != 3 or not parts[2].startswith("tau0="):
                raise ParseError("expected 'g <group> tau0=<value>'", lineno)
            j = _parse_int(parts[1], lineno, "group index")
            if not 1 <= j <= params.n:
                raise ParseError(f"group {j} out of range", lineno)
            if j in tau0:
                raise ConsistencyError(f"line {lineno}: group {j} declared twice")
            tau0[j] = _parse_int(parts[2][5:], lineno, "tau0")
        elif kind == "e":
            if len(parts) != 3:
                raise ParseError("expected 'e <user> <group>'", lineno)
            i = _parse_int(parts[1], lineno, "user index")
            j = _parse_int(parts[2], lineno, "group index")
            if not 1 <= i <= params.m:
                raise ParseError(f"user {i} out of range", lineno)
            if not 1 <= j <= params.n:
                raise ParseError(f"group {j} out of range", lineno)
            users.append(i - 1)
            groups.append(j - 1)
        else:
            raise ParseError(f"unknown record type {kind!r}", lineno)

    if header is None:
        raise ParseError("empty file", 1)
    if len(tau0) != params.n:
        raise ConsistencyError(f"header says n={params.n} but {len(tau0)} groups listed")
    expected = int(header["edges"]) if "edges" in header else params.n_edges
    if len(users) != expected:
        raise ConsistencyError(f"header implies {expected} edges but {len(users)} listed")
    if len(set(zip(users, groups))) != len(users):
        raise ConsistencyError("duplicate edge")
    init = [tau0[j] for j in range(1, params.n + 1)]
    return BipartiteGraph.from_edges(params, groups, users, init)
