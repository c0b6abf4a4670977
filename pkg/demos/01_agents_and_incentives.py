"""A first look at the building blocks: agents, incentives, reward models.

The agent privately tracks empirical means and, each round, plays whatever
maximizes empirical mean plus the offered incentive.  The principal only sees
the chosen arm, so steering the agent means out-bidding the agent's current
favorite.
"""

import numpy as np

from incentive_bandits import (AgentBehavior, AgentState, ArmSet, RewardModel,
                               agent_select, agent_update, one_hot_incentive,
                               optimal_incentive, sample_rewards)

rng = np.random.default_rng(0)

model = RewardModel.bernoulli(theta=[0.8, 0.3, 0.5], mu=[0.2, 0.7, 0.4])
state = AgentState(ArmSet.iid(3))
behavior = AgentBehavior(kind="greedy-learner")

print("round  incentive            chosen  agent means")
for t in range(1, 16):
    # Pay arm 0 a little more each round until the agent switches to it.
    incentive = one_hot_incentive(0, 0.05 * t, 3)
    arm, _ = agent_select(state, behavior, incentive, t, rng)
    _, r = sample_rewards(model, arm, rng)
    agent_update(state, arm, r)
    means = np.round(state.empirical_means(), 3)
    print(f"{t:5d}  {np.round(incentive, 2)}  {arm:6d}  {means}")

print()
print("minimum incentive that would flip the agent to arm 0 right now:",
      round(optimal_incentive(state, 0), 4))

# An exploratory agent deviates from the score maximizer with a decaying
# probability; the empirical frequency respects the configured envelope.
explorer = AgentBehavior(kind="exploratory-learner", c0=1.0)
t_fixed = 200
draws = 20_000
explored = sum(agent_select(state, explorer, np.zeros(3), t_fixed, rng)[1]
               for _ in range(draws))
print(f"\nexploration frequency at t={t_fixed}: {explored / draws:.4f}"
      f"  (envelope {np.sqrt(np.log(2 * t_fixed) / t_fixed):.4f})")
