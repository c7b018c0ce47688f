"""Active fingerprinting attack: noisy membership queries and information thresholds.

The attacker knows the graph, queries the victim's membership in one group
at a time, and keeps an information value per user: the log prior plus the
accumulated log-likelihood ratio of the responses under that user's
fingerprint against the response marginal.  A user is named once it is the
only one whose value exceeds log(1/epsilon).

ITS queries groups in index order; A-ITS queries the largest groups first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .bigraph import BipartiteGraph
from .errors import DegenerateMarginal
from .numerics import ChannelSpec

ELIMINATED = -math.inf


class Strategy(str, Enum):
    ITS = "its"
    AITS = "aits"


@dataclass(frozen=True)
class QueryChannel:
    spec: ChannelSpec
    theta_label: str = "default"


@dataclass
class ChannelAssignment:
    """Maps each user to a noise class; each class has its own query channel."""

    user_to_theta: np.ndarray
    channels: dict

    def __post_init__(self):
        self.user_to_theta = np.asarray(self.user_to_theta)
        missing = set(np.unique(self.user_to_theta).tolist()) - set(self.channels)
        if missing:
            raise ValueError(f"no channel for noise classes {sorted(missing)}")

    @classmethod
    def single(cls, m: int, channel: QueryChannel) -> "ChannelAssignment":
        return cls(np.full(m, channel.theta_label, dtype=object), {channel.theta_label: channel})

    @property
    def m(self) -> int:
        return self.user_to_theta.size

    def channel_of(self, user: int) -> QueryChannel:
        return self.channels[self.user_to_theta[user]]

    def theta_distribution(self) -> dict:
        """Fraction of users in each noise class."""
        labels, counts = np.unique(self.user_to_theta, return_counts=True)
        return {lab: c / self.m for lab, c in zip(labels.tolist(), counts.tolist())}


@dataclass
class VictimModel:
    pmf: np.ndarray

    def __post_init__(self):
        self.pmf = np.asarray(self.pmf, dtype=np.float64)
        if (self.pmf < 0).any() or not math.isclose(self.pmf.sum(), 1.0, abs_tol=1e-9):
            raise ValueError("victim pmf must be nonnegative and sum to 1")

    @classmethod
    def uniform(cls, m: int) -> "VictimModel":
        return cls(np.full(m, 1.0 / m))

    @property
    def m(self) -> int:
        return self.pmf.size

    def entropy(self) -> float:
        p = self.pmf[self.pmf > 0]
        return float(-(p * np.log(p)).sum())

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.choice(self.m, p=self.pmf))


@dataclass
class InformationState:
    info: np.ndarray
    threshold: float
    t: int = 0
    queried: set = field(default_factory=set)

    @property
    def survivors(self) -> int:
        return int(np.isfinite(self.info).sum())


@dataclass
class AttackOutcome:
    victim: int
    identified: Optional[int]
    queries_used: int
    trace: Optional[list] = None

    @property
    def resolved(self) -> bool:
        return self.identified is not None

    @property
    def correct(self) -> Optional[bool]:
        return None if self.identified is None else self.identified == self.victim


def query_order_aits(graph: BipartiteGraph) -> np.ndarray:
    """Groups by decreasing degree, ties by increasing index."""
    return np.lexsort((np.arange(graph.n), -graph.degrees))


def query_order_its(graph: BipartiteGraph) -> np.ndarray:
    return np.arange(graph.n)


def query_order(graph: BipartiteGraph, strategy) -> np.ndarray:
    return query_order_aits(graph) if Strategy(strategy) is Strategy.AITS else query_order_its(graph)


def marginal_response_prob(graph: BipartiteGraph, group: int, channel: QueryChannel,
                           literal: bool = False) -> float:
    """P(Y=1) for a query on `group` when membership is 1 w.p. D_j/m.

    With ``literal=True`` the alternative 1/D_j form is returned instead
    (1.0 for an empty group).
    """
    d = int(graph.degrees[group])
    if literal:
        return 1.0 / d if d else 1.0
    return channel.spec.output_prob(d / graph.m)


def init_information(victim_model: VictimModel, epsilon: float = 0.5) -> InformationState:
    """I_0(k) = log P_M(k); users with zero prior start eliminated."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    with np.errstate(divide="ignore"):
        info = np.log(victim_model.pmf)
    return InformationState(info=info, threshold=math.log(1.0 / epsilon))


def _log_ratio(num: float, den: float) -> float:
    return ELIMINATED if num == 0.0 else math.log(num / den)


def update_information(state: InformationState, graph: BipartiteGraph, group: int, response: int,
                       channel: QueryChannel, q: float) -> InformationState:
    """Add the log-likelihood ratio of `response` to every user's value, in place.

    A user whose fingerprint bit makes the response impossible is eliminated
    for good.
    """
    if not 0.0 < q < 1.0:
        raise DegenerateMarginal(f"response marginal {q} for group {group}")
    if state.t >= graph.n:
        raise ValueError("all groups already queried")
    if group in state.queried:
        raise ValueError(f"group {group} already queried")
    p_y = q if response else 1.0 - q
    inc_member = _log_ratio(channel.spec.prob(response, 1), p_y)
    inc_other = _log_ratio(channel.spec.prob(response, 0), p_y)
    inc = np.full(graph.m, inc_other)
    inc[graph.members(group)] = inc_member
    state.info += inc
    state.t += 1
    state.queried.add(group)
    return state


def identify(state: InformationState, epsilon: Optional[float] = None) -> Optional[int]:
    """The unique user strictly above the threshold, else None."""
    threshold = state.threshold if epsilon is None else math.log(1.0 / epsilon)
    above = np.flatnonzero(state.info > threshold)
    return int(above[0]) if above.size == 1 else None


def _trace_line(t, group, degree, y, state):
    top = int(np.argmax(state.info))
    val = state.info[top]
    val_s = "-inf" if val == ELIMINATED else f"{val:.6f}"
    return f"q {t} group={group + 1} degree={degree} y={y} survivors={state.survivors} top={top + 1}:{val_s}"


def _query_path(graph, assignment, victim_model, strategy, epsilon, rng, victim, literal_marginal):
    """Yield (group, response, state) after each query on the victim."""
    channel = assignment.channel_of(victim)
    state = init_information(victim_model, epsilon)
    for group in query_order(graph, strategy):
        group = int(group)
        r = graph.has_edge(victim, group)
        y = int(rng.random() < channel.spec.output_prob(1.0 if r else 0.0))
        q = marginal_response_prob(graph, group, channel, literal=literal_marginal)
        if 0.0 < q < 1.0:
            update_information(state, graph, group, y, channel, q)
        else:
            state.t += 1
            state.queried.add(group)
        yield group, y, state


def run_attack(graph: BipartiteGraph, assignment: ChannelAssignment, victim_model: VictimModel,
               strategy, epsilon: float, rng: np.random.Generator, victim: Optional[int] = None,
               trace: bool = False, literal_marginal: bool = False) -> AttackOutcome:
    """Simulate one attack and return its outcome.

    The victim is drawn from `victim_model` unless given.  Its noise class is
    known to the attacker.  Queries follow the strategy's order until one
    user is identified or every group has been queried.  A query whose
    response marginal is 0 or 1 is uninformative and leaves the values as
    they are (it still counts as a query).
    """
    if victim is None:
        victim = victim_model.sample(rng)
    lines = [] if trace else None
    identified = None
    t = 0
    for group, y, state in _query_path(graph, assignment, victim_model, strategy, epsilon,
                                       rng, victim, literal_marginal):
        t = state.t
        if trace:
            lines.append(_trace_line(t, group, int(graph.degrees[group]), y, state))
        identified = identify(state)
        if identified is not None:
            break
    return AttackOutcome(victim=victim, identified=identified, queries_used=t, trace=lines)


def run_attack_thresholds(graph: BipartiteGraph, assignment: ChannelAssignment,
                          victim_model: VictimModel, strategy, epsilons, rng: np.random.Generator,
                          victim: Optional[int] = None,
                          literal_marginal: bool = False) -> list[AttackOutcome]:
    """Outcomes for several epsilons from one shared response sequence.

    Each outcome equals what :func:`run_attack` returns for that epsilon with
    an identically seeded `rng`, since the responses do not depend on epsilon.
    """
    if victim is None:
        victim = victim_model.sample(rng)
    found: list = [None] * len(epsilons)
    used = [0] * len(epsilons)
    pending = set(range(len(epsilons)))
    t = 0
    for _, _, state in _query_path(graph, assignment, victim_model, strategy, min(epsilons),
                                   rng, victim, literal_marginal):
        t = state.t
        for k in list(pending):
            who = identify(state, epsilons[k])
            if who is not None:
                found[k], used[k] = who, t
                pending.discard(k)
        if not pending:
            break
    for k in pending:
        used[k] = t
    return [AttackOutcome(victim=victim, identified=found[k], queries_used=used[k])
            for k in range(len(epsilons))]


def write_trace(outcome: AttackOutcome, sink) -> None:
    for line in outcome.trace or ():
        sink.write(line + "\n")
