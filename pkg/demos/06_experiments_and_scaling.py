"""Seeded experiment sweeps, CSV/summary persistence, and scaling reports.

Equivalent to the CLI flow
    incentive-bandits sweep --config cfg.json --T ... --seeds 0..9 --out out/
    incentive-bandits report --summaries out/ --exponent 0.5
"""

import tempfile
from pathlib import Path

from incentive_bandits import (ExperimentConfig, load_summaries, run_sweep,
                               scaling_report)

config = ExperimentConfig(
    algorithm="iid-online",
    T=10_000,
    model={"kind": "iid", "family": "bernoulli",
           "theta": [0.8, 0.78, 0.72, 0.66], "mu": [0.8, 0.75, 0.73, 0.71]},
    agent={"kind": "greedy-learner"},
    seeds=list(range(10)),
)

out = Path(tempfile.mkdtemp(prefix="incentive_bandits_demo_"))
grid = [10_000, 20_000, 40_000]
rows = run_sweep(config, grid, out_dir=str(out))
print(f"wrote {len(rows)} summary rows under {out}")

records = load_summaries(str(out))
report = scaling_report(records, exponent=0.5)
print("\nT        mean regret   regret/sqrt(T)")
for T, mean, norm in zip(report.grid, report.mean_regret, report.normalized):
    print(f"{T:<8d} {mean:12.1f} {norm:14.3f}")
print("max adjacent ratio:", round(report.max_ratio, 3),
      "| per-T decreasing:", report.per_T_decreasing())
if report.flagged:
    print("flagged grid indices (normalized regret increased):", report.flagged)
