"""Noisy binary search for the minimum sufficient incentive.

The threshold being searched drifts while the search runs, because every
probe feeds the agent another sample.  The asymmetric re-check of the last
successful offer detects when the optimum escapes the bracket, keeping the
output strictly above the target's optimal incentive with a tight margin.
"""

import math

import numpy as np

from incentive_bandits import (AgentBehavior, RewardModel, build_channel,
                               noisy_binary_search, one_hot_incentive)

T = 2 ** 14
model = RewardModel.bernoulli(theta=[0.6, 0.6, 0.6], mu=[0.25, 0.85, 0.5])
channel = build_channel(model, AgentBehavior(), 30_000, seed=7,
                        keep_pre_snapshots=True)

# Warm the agent up so every arm has history (the bound scales with 1/N).
for arm in range(3):
    incentive = one_hot_incentive(arm, 1.5, 3)
    for _ in range(2000):
        channel.propose(incentive)

print("target  output    pi*      gap       bound     rounds")
for target in range(3):
    start = channel.rounds_used
    b = noisy_binary_search(target, T, channel)
    rounds = channel.rounds_used - start
    pi_star = float(channel.pre_means.max() - channel.pre_means[target])
    counts = channel.pre_counts
    bound = 4 / T + math.ceil(math.log2(T)) / counts[target] + 2 / counts.min()
    print(f"{target:6d}  {b:.5f}  {pi_star:.5f}  {b - pi_star:.2e}  "
          f"{bound:.2e}  {rounds:4d} (cap {2 * math.ceil(math.log2(T))})")
