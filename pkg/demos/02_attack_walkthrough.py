"""Follow one attack query by query.

A noiseless two-user example first, where every step can be checked by
hand, then a noisy attack on a generated graph with both query orders.

Run: python3 demos/02_attack_walkthrough.py
"""
import sys

import numpy as np

from popgraph import (BigraphParams, BipartiteGraph, ChannelAssignment, ChannelSpec, QueryChannel,
                      VictimModel, generate, run_attack)
from popgraph.attack import write_trace

# %% Two users, two groups, user 1 only in group 1 and user 2 only in group 2
tiny = BipartiteGraph.from_edges(BigraphParams(n=2, m=2, mu=1, alpha=3), [0, 1], [0, 1], [1, 1])
assign = ChannelAssignment.single(2, QueryChannel(ChannelSpec.noiseless()))
for eps in (0.9, 0.1):
    out = run_attack(tiny, assign, VictimModel.uniform(2), "its", eps, np.random.default_rng(0),
                     victim=0, trace=True)
    print(f"epsilon={eps}: threshold ln(1/eps)={np.log(1 / eps):.4f}")
    write_trace(out, sys.stdout)
    print("  ->", "identified user %d" % (out.identified + 1) if out.resolved else "unresolved",
          f"after {out.queries_used} queries\n")

# %% A noisy attack on a generated graph
graph = generate(BigraphParams(n=2_000, m=200, mu=5, alpha=3.0, seed=2))
assign = ChannelAssignment.single(200, QueryChannel(ChannelSpec.bsc(0.05)))
for strategy in ("aits", "its"):
    out = run_attack(graph, assign, VictimModel.uniform(200), strategy, 0.01,
                     np.random.default_rng(5), victim=17, trace=True)
    print(f"{strategy}: {out.queries_used} queries, correct={out.correct}")
    for line in out.trace[:3] + ["..."] + out.trace[-2:]:
        print("   ", line)
