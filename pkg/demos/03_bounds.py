"""Evaluate the query-count bound and its closed-form specialisation.

The bound needs enough information mass in the large groups to cover
H(M) + log(1/epsilon) + i_max.  On a small network it sits well above
what simulations show; it becomes informative as n grows.

Run: python3 demos/03_bounds.py
"""
import math

from popgraph import BigraphParams, BoundInputs, ChannelSpec, QueryChannel, corollary1_bound, theorem2_bounds

for n in (1_000, 10_000, 100_000):
    params = BigraphParams(n=n, m=100, mu=5, alpha=3.0)
    print(f"n={n}")
    for nq in (0.0, 0.05, 0.2, 0.5):
        ch = QueryChannel(ChannelSpec.bsc(nq))
        res = theorem2_bounds(BoundInputs(params, {"default": ch}, {"default": 1.0},
                                          epsilon=0.01, entropy=math.log(100)))
        cor = corollary1_bound(params, nq, 0.01)
        if res.feasible:
            line = f"d*={res.d_star['default']:3d} i*={res.i_star['default']:4d} Q<={res.q_bar_bound:9.2f}"
        else:
            line = "infeasible" + " " * 27
        tail = f"closed form Q<={cor.q_bar_bound:8.2f} (d*={cor.d_star})" if cor.feasible else "closed form infeasible"
        print(f"  nq={nq:<5} psi={res.psi:6.3f}  {line}  {tail}")
print("\n" + res.note)
