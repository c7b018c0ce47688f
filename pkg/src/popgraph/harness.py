"""Seeded Monte Carlo sweeps of the attack over (m, alpha, strategy) grids.

Every trial draws its randomness from a stream derived from
(base_seed, m, alpha, strategy, graph index, victim index), so results do
not depend on the number of worker processes or on scheduling order.
An unresolved trial counts as an error and as n queries.
"""
from __future__ import annotations

import configparser
import csv
import io
import math
import os
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .attack import (ChannelAssignment, QueryChannel, Strategy, VictimModel,
                     run_attack_thresholds)
from .bigraph import BigraphParams, generate
from .numerics import ChannelSpec

WORKERS_ENV = "POPGRAPH_WORKERS"

CSV_COLUMNS = ["m", "alpha", "strategy", "n", "mu", "beta", "nq", "epsilon", "trials",
               "mean_Q", "ci95_Q", "pe", "errors", "unresolved", "seconds"]

STRATEGY_IDS = {Strategy.ITS: 0, Strategy.AITS: 1}


@dataclass
class ExperimentConfig:
    m_values: tuple = (1000, 2000)
    alpha_values: tuple = (3.0, 10.0)
    strategies: tuple = ("aits", "its")
    mu: int = 100
    beta: float = 0.1
    nq: float = 0.05
    epsilon: float = 0.01
    graph_replications: int = 5
    victims_per_graph: int = 20
    base_seed: int = 2022
    workers: int = 1
    # per-point (m, alpha, strategy) -> epsilon
    epsilon_overrides: dict = field(default_factory=dict)
    # when set, each point is run at every candidate and the largest
    # epsilon whose empirical error rate is <= target_pe is kept
    epsilon_candidates: tuple = ()
    target_pe: float = 0.05
    record_timing: bool = True

    def __post_init__(self):
        self.m_values = tuple(int(m) for m in self.m_values)
        self.alpha_values = tuple(float(a) for a in self.alpha_values)
        self.strategies = tuple(Strategy(s).value for s in self.strategies)
        self.epsilon_candidates = tuple(sorted((float(e) for e in self.epsilon_candidates),
                                               reverse=True))
        if self.graph_replications < 1 or self.victims_per_graph < 1:
            raise ValueError("graph_replications and victims_per_graph must be >= 1")
        if not 0.0 <= self.nq <= 1.0:
            raise ValueError("nq must be a probability")
        for e in (self.epsilon, *self.epsilon_candidates, *self.epsilon_overrides.values()):
            if not 0.0 < e < 1.0:
                raise ValueError(f"epsilon {e} outside (0, 1)")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    def n_for(self, m: int) -> int:
        return max(1, round(m / self.beta))

    def epsilons_for(self, m, alpha, strategy) -> tuple:
        key = (int(m), float(alpha), Strategy(strategy).value)
        if key in self.epsilon_overrides:
            return (self.epsilon_overrides[key],)
        return self.epsilon_candidates or (self.epsilon,)

    def resolved_workers(self) -> int:
        env = os.environ.get(WORKERS_ENV)
        return max(1, int(env)) if env else max(1, self.workers)

    def to_text(self) -> str:
        cp = configparser.ConfigParser(delimiters=("=",))
        cp.optionxform = str
        cp["experiment"] = {
            "mu": str(self.mu), "beta": repr(self.beta), "nq": repr(self.nq),
            "epsilon": repr(self.epsilon), "graph_replications": str(self.graph_replications),
            "victims_per_graph": str(self.victims_per_graph), "base_seed": str(self.base_seed),
            "workers": str(self.workers), "target_pe": repr(self.target_pe),
            "record_timing": str(self.record_timing).lower(),
        }
        grid = {
            "m": ", ".join(map(str, self.m_values)),
            "alpha": ", ".join(_fmt_alpha(a) for a in self.alpha_values),
            "strategy": ", ".join(self.strategies),
        }
        if self.epsilon_candidates:
            grid["epsilon_candidates"] = ", ".join(map(repr, self.epsilon_candidates))
        cp["grid"] = grid
        if self.epsilon_overrides:
            cp["epsilon"] = {f"{m}:{_fmt_alpha(a)}:{s}": repr(e)
                             for (m, a, s), e in sorted(self.epsilon_overrides.items())}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


PRESETS = {
    "desk": dict(m_values=(1000, 2000), alpha_values=(3.0, 10.0), strategies=("aits", "its"),
                 mu=100, beta=0.1, nq=0.05, epsilon=0.01, graph_replications=5,
                 victims_per_graph=20),
    "full": dict(m_values=(1000, 2000, 4000, 6000, 8000, 10000), alpha_values=(3.0, 5.0, 10.0),
                  strategies=("aits", "its"), mu=100, beta=0.1, nq=0.05, epsilon=0.01,
                  graph_replications=5, victims_per_graph=100),
}


def preset(name: str, **overrides) -> ExperimentConfig:
    return ExperimentConfig(**{**PRESETS[name], **overrides})


def _split_list(text):
    return [t.strip() for t in text.replace("\n", ",").split(",") if t.strip()]


def load_config(source) -> ExperimentConfig:
    """Read a config file (path or text stream).

    Sections: ``[experiment]`` scalar keys, ``[grid]`` comma-separated lists
    (m, alpha, strategy, epsilon_candidates) and an optional ``[epsilon]``
    table of ``m:alpha:strategy = value`` overrides.  A ``preset`` key in
    ``[experiment]`` supplies defaults for everything else.
    """
    cp = configparser.ConfigParser(delimiters=("=",), inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            cp.read_file(fh)
    else:
        cp.read_file(source)
    exp = cp["experiment"] if cp.has_section("experiment") else {}
    kwargs = dict(PRESETS[exp["preset"]]) if "preset" in exp else {}
    casts = {"mu": int, "beta": float, "nq": float, "epsilon": float, "graph_replications": int,
             "victims_per_graph": int, "base_seed": int, "workers": int, "target_pe": float,
             "record_timing": lambda v: v.strip().lower() in ("1", "true", "yes", "on")}
    for key, val in exp.items():
        if key == "preset":
            continue
        if key not in casts:
            raise ValueError(f"unknown key [experiment] {key}")
        kwargs[key] = casts[key](val)
    if cp.has_section("grid"):
        grid = cp["grid"]
        names = {"m": "m_values", "alpha": "alpha_values", "strategy": "strategies",
                 "epsilon_candidates": "epsilon_candidates"}
        for key, val in grid.items():
            if key not in names:
                raise ValueError(f"unknown key [grid] {key}")
            items = _split_list(val)
            if key == "m":
                items = [int(x) for x in items]
            elif key in ("alpha", "epsilon_candidates"):
                items = [float(x) for x in items]
            kwargs[names[key]] = tuple(items)
    if cp.has_section("epsilon"):
        overrides = {}
        for key, val in cp["epsilon"].items():
            m, a, s = key.split(":")
            overrides[(int(m), float(a), Strategy(s).value)] = float(val)
        kwargs["epsilon_overrides"] = overrides
    return ExperimentConfig(**kwargs)


def _fmt_alpha(alpha: float) -> str:
    return "inf" if math.isinf(alpha) else repr(float(alpha))


def _alpha_bits(alpha: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(alpha)))[0]


def derive_seed(*parts: int) -> int:
    """Stateless 64-bit seed from a tuple of nonnegative integers."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)[0])


def graph_seed(config: ExperimentConfig, m: int, alpha: float, g: int) -> int:
    return derive_seed(config.base_seed, m, _alpha_bits(alpha), g)


def trial_seed(config: ExperimentConfig, m: int, alpha: float, strategy, g: int, v: int) -> int:
    sid = STRATEGY_IDS[Strategy(strategy)]
    return derive_seed(config.base_seed, m, _alpha_bits(alpha), 2 + sid, g, v)


@dataclass(frozen=True)
class Trial:
    m: int
    alpha: float
    strategy: str
    epsilon: float
    g: int
    v: int
    victim: int
    identified: Optional[int]
    queries: int

    @property
    def outcome(self) -> str:
        if self.identified is None:
            return "unresolved"
        return "correct" if self.identified == self.victim else "error"


@dataclass
class PointResult:
    m: int
    alpha: float
    strategy: str
    n: int
    mu: int
    beta: float
    nq: float
    epsilon: float
    trials: int
    mean_Q: float
    ci95_Q: float
    pe: float
    errors: int
    unresolved: int
    seconds: float
    correct: int = 0


@dataclass
class SweepResult:
    """Per-point summaries plus every trial (all candidate epsilons included)."""

    config: ExperimentConfig
    points: list
    trials: list = field(repr=False, default_factory=list)
    metadata: dict = field(default_factory=lambda: {
        "unresolved_policy": "unresolved trials count as errors and as n queries"})


def _run_block(config: ExperimentConfig, m: int, alpha: float, g: int):
    """Generate graph g of point (m, alpha) and run every strategy and victim on it."""
    t0 = time.perf_counter()
    n = config.n_for(m)
    params = BigraphParams(n=n, m=m, mu=config.mu, alpha=alpha, seed=graph_seed(config, m, alpha, g))
    graph = generate(params)
    gen_time = time.perf_counter() - t0
    assignment = ChannelAssignment.single(m, QueryChannel(ChannelSpec.bsc(config.nq)))
    victims = VictimModel.uniform(m)
    trials, times = [], {}
    for strategy in config.strategies:
        t1 = time.perf_counter()
        eps = config.epsilons_for(m, alpha, strategy)
        for v in range(config.victims_per_graph):
            rng = np.random.default_rng(trial_seed(config, m, alpha, strategy, g, v))
            outs = run_attack_thresholds(graph, assignment, victims, strategy, eps, rng)
            for e, out in zip(eps, outs):
                trials.append(Trial(m, alpha, strategy, e, g, v, out.victim, out.identified,
                                    out.queries_used))
        times[strategy] = time.perf_counter() - t1 + gen_time
    return (m, alpha, g), trials, times


def _aggregate(config, m, alpha, strategy, epsilon, trials, seconds) -> PointResult:
    n = config.n_for(m)
    q = np.array([t.queries if t.identified is not None else n for t in trials], dtype=np.float64)
    errors = sum(t.outcome == "error" for t in trials)
    unresolved = sum(t.outcome == "unresolved" for t in trials)
    k = len(trials)
    ci = 1.96 * q.std(ddof=1) / math.sqrt(k) if k > 1 else 0.0
    return PointResult(m=m, alpha=alpha, strategy=strategy, n=n, mu=config.mu, beta=config.beta,
                       nq=config.nq, epsilon=epsilon, trials=k, mean_Q=float(q.mean()),
                       ci95_Q=float(ci), pe=(errors + unresolved) / k, errors=errors,
                       unresolved=unresolved,
                       seconds=round(seconds, 3) if config.record_timing else 0.0,
                       correct=k - errors - unresolved)


def _collect(config, blocks) -> SweepResult:
    points, kept = [], []
    for m in config.m_values:
        for alpha in config.alpha_values:
            keys = [(m, alpha, g) for g in range(config.graph_replications)]
            if any(k not in blocks for k in keys):
                continue
            for strategy in config.strategies:
                seconds = sum(blocks[k][1][strategy] for k in keys)
                trials = [t for k in keys for t in blocks[k][0] if t.strategy == strategy]
                chosen = None
                for eps in config.epsilons_for(m, alpha, strategy):
                    sub = [t for t in trials if t.epsilon == eps]
                    res = _aggregate(config, m, alpha, strategy, eps, sub, seconds)
                    chosen = (res, sub)
                    if len(config.epsilons_for(m, alpha, strategy)) == 1 or res.pe <= config.target_pe:
                        break
                points.append(chosen[0])
                kept.extend(trials)
    return SweepResult(config=config, points=points, trials=kept)


def run_sweep(config: ExperimentConfig, out_dir=None) -> SweepResult:
    """Run every grid point: graph_replications graphs times victims_per_graph victims.

    With `out_dir`, the resolved config, results CSV and plot data are
    written there; on KeyboardInterrupt the completed points are flushed to
    ``partial.csv`` before re-raising.
    """
    items = [(m, a, g) for m in config.m_values for a in config.alpha_values
             for g in range(config.graph_replications)]
    blocks = {}
    workers = min(config.resolved_workers(), len(items))
    try:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_block, config, *it) for it in items]
                for fut in futures:
                    key, trials, times = fut.result()
                    blocks[key] = (trials, times)
        else:
            for it in items:
                key, trials, times = _run_block(config, *it)
                blocks[key] = (trials, times)
    except KeyboardInterrupt:
        if out_dir is not None:
            partial = _collect(config, blocks)
            if partial.points:
                Path(out_dir).mkdir(parents=True, exist_ok=True)
                export_csv(partial, Path(out_dir) / "partial.csv")
        raise
    result = _collect(config, blocks)
    if out_dir is not None:
        write_outputs(result, out_dir)
    return result


def write_outputs(result: SweepResult, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.resolved.ini").write_text(result.config.to_text())
    export_csv(result, out / "results.csv")
    export_plot_data(result, out / "plot_data.txt")


def _cell(value) -> str:
    if isinstance(value, float):
        return _fmt_alpha(value) if math.isinf(value) else repr(value)
    return str(value)


def _open_sink(sink, fn):
    if isinstance(sink, (str, os.PathLike)):
        try:
            with open(sink, "w", newline="") as fh:
                return fn(fh)
        except OSError as exc:
            raise OSError(f"cannot write {sink}: {exc}") from exc
    return fn(sink)


def export_csv(result: SweepResult, sink) -> None:
    if not result.points:
        raise ValueError("empty sweep result")

    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for p in result.points:
            row = asdict(p)
            w.writerow([_cell(row[c]) for c in CSV_COLUMNS])
    _open_sink(sink, write)


def read_csv(source) -> list[dict]:
    """Parse a results CSV back into typed rows."""
    ints = {"m", "n", "mu", "trials", "errors", "unresolved"}
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            return read_csv(fh)
    rows = []
    for rec in csv.DictReader(source):
        rows.append({k: (v if k == "strategy" else int(v) if k in ints else float(v))
                     for k, v in rec.items()})
    return rows


def export_plot_data(result: SweepResult, sink) -> None:
    """One block of ``m mean_Q`` lines per (alpha, strategy) series."""
    if not result.points:
        raise ValueError("empty sweep result")

    def write(fh):
        series = {}
        for p in result.points:
            series.setdefault((p.alpha, p.strategy), []).append(p)
        blocks = []
        for (alpha, strategy), pts in series.items():
            ms = ",".join(str(p.m) for p in pts)
            lines = [f"# series m={ms} alpha={_fmt_alpha(alpha)} strategy={strategy}"]
            lines += [f"{p.m} {p.mean_Q!r}" for p in pts]
            blocks.append("\n".join(lines) + "\n")
        fh.write("\n".join(blocks))
    _open_sink(sink, write)
