"""Compare A-ITS with ITS over a small (m, alpha) grid.

Uses the desk preset (m in {1000, 2000}, alpha in {3, 10}, 100 trials per
point) and tunes epsilon per point so the error rate stays at or below 0.1.
Writes results.csv and plot_data.txt to the given directory.  Takes about
a minute on one core; set POPGRAPH_WORKERS to use more.

Run: python3 demos/04_strategy_sweep.py [out_dir]
"""
import sys

from popgraph.harness import preset, run_sweep

out_dir = sys.argv[1] if len(sys.argv) > 1 else "sweep_out"
config = preset("desk", epsilon_candidates=(0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001),
                target_pe=0.1)
result = run_sweep(config, out_dir=out_dir)

print(f"{'m':>5} {'alpha':>5} {'strategy':>8} {'mean Q':>8} {'ci95':>6} {'eps':>6} {'pe':>5}")
for p in result.points:
    print(f"{p.m:5d} {p.alpha:5g} {p.strategy:>8} {p.mean_Q:8.1f} {p.ci95_Q:6.1f} "
          f"{p.epsilon:6g} {p.pe:5.2f}")
print(f"\nwrote {out_dir}/results.csv and {out_dir}/plot_data.txt")
