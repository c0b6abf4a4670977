"""Robust principals for agents that sometimes ignore the incentive.

Single searches can be poisoned by exploration, so searches repeat, sorted
candidates are tested with failure counters, and eliminations go through
median votes.  The oracle-agent refinement drops the drift paddings and the
bad-arm stabilization, which shows up directly in the regret ledgers.
"""

import numpy as np

from incentive_bandits import (AgentBehavior, RewardModel,
                               pick_gamma_for_phases,
                               run_exploratory_principal,
                               run_oracle_explore_principal)

T = 50_000
model = RewardModel.bernoulli(theta=[0.85, 0.7, 0.55, 0.35, 0.2],
                              mu=[0.75, 0.55, 0.45, 0.3, 0.15])
gamma = pick_gamma_for_phases(5, T, 1.0 / T, c0=1.0, phases=2)
print(f"schedule multiplier gamma = {gamma:.2e} "
      "(full-constant budgets are infeasible at desk scale)")

agent = AgentBehavior(kind="exploratory-learner", c0=1.0)
tr = run_exploratory_principal(model, agent, T=T, c0=1.0, gamma=gamma, seed=0)
print("\nrobust principal vs exploratory learner:")
print("  exploration rounds observed:", int(tr.explored.sum()))
for p in tr.phases:
    print(f"  phase {p.m}: active {p.active} eliminated {p.eliminated} "
          f"plays {p.plays}")
print(f"  regret (per-round ledger): {tr.total('perround'):.1f}")

oracle = AgentBehavior(kind="exploratory-oracle", c0=1.0)
tr4 = run_exploratory_principal(model, oracle, T=T, c0=1.0, gamma=gamma, seed=0)
tr5 = run_oracle_explore_principal(model, oracle, T=T, c0=1.0, gamma=gamma, seed=0)
print("\nsame exploratory-oracle agent, two principals (bar ledger):")
print(f"  robust baseline : {tr4.total('bar'):.1f}")
print(f"  oracle refinement: {tr5.total('bar'):.1f}")
