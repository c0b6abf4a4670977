import math

import numpy as np
import pytest

from incentive_bandits import (AgentBehavior, AgentState, ArmSet, ConfigError,
                               Distribution, RewardModel, agent_select,
                               agent_update, one_hot_incentive,
                               optimal_incentive, sample_rewards)
from incentive_bandits.env import argmax_with_ties, resolve_behavior


class TestOneHotIncentive:
    def test_basic(self):
        assert one_hot_incentive(1, 0.5, 4).tolist() == [0.0, 0.5, 0.0, 0.0]

    def test_horizon_scaled_value(self):
        v = one_hot_incentive(0, 1 + 1 / 100, 2)
        assert v.tolist() == [1.01, 0.0]

    def test_linear_bad_arm_value(self):
        v = one_hot_incentive(3, 2 * 2 + 1 / 1000, 4)
        assert v.tolist() == [0.0, 0.0, 0.0, 4.001]

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            one_hot_incentive(4, 0.5, 4)
        with pytest.raises(ValueError):
            one_hot_incentive(0, 0.0, 4)


class TestAgentSelect:
    def test_greedy_picks_highest_score(self):
        state = AgentState(ArmSet.iid(2))
        state._mu_hat = np.array([0.3, 0.7])
        arm, explored = agent_select(state, AgentBehavior(), np.array([0.5, 0.0]),
                                     5, np.random.default_rng(0))
        assert (arm, explored) == (0, False)

    def test_tie_goes_to_lowest_index(self):
        state = AgentState(ArmSet.iid(2))
        state._mu_hat = np.array([0.2, 0.9])
        arm, _ = agent_select(state, AgentBehavior(), np.array([0.7, 0.0]),
                              5, np.random.default_rng(0))
        assert arm == 0

    def test_tie_highest_index_rule(self):
        state = AgentState(ArmSet.iid(2))
        state._mu_hat = np.array([0.2, 0.9])
        beh = AgentBehavior(tie_rule="highest-index")
        arm, _ = agent_select(state, beh, np.array([0.7, 0.0]),
                              5, np.random.default_rng(0))
        assert arm == 1

    def test_exploration_frequency_bounded(self):
        # Monte Carlo frequency at fixed t stays under c0*sqrt(log(2t)/t)
        # within three standard errors.
        beh = AgentBehavior(kind="exploratory-learner", c0=1.0)
        assert beh.tau == 2
        state = AgentState(ArmSet.iid(2))
        rng = np.random.default_rng(123)
        t = 100
        n = 100_000
        hits = sum(agent_select(state, beh, np.zeros(2), t, rng)[1] for _ in range(n))
        p_bound = math.sqrt(math.log(2 * t) / t)
        p_hat = hits / n
        se = math.sqrt(p_bound * (1 - p_bound) / n)
        assert p_hat <= p_bound + 3 * se

    def test_no_exploration_before_tau(self):
        beh = AgentBehavior(kind="exploratory-learner", c0=10.0)
        assert beh.tau > 2
        state = AgentState(ArmSet.iid(2))
        rng = np.random.default_rng(0)
        for t in range(1, beh.tau):
            _, explored = agent_select(state, beh, np.zeros(2), t, rng)
            assert not explored

    def test_oracle_requires_true_means(self):
        state = AgentState(ArmSet.iid(2))
        with pytest.raises(ConfigError):
            agent_select(state, AgentBehavior(kind="oracle"), np.zeros(2),
                         1, np.random.default_rng(0))

    def test_linear_agent_uses_estimate_projections(self):
        arms = ArmSet.linear(np.array([[1.0, 0.0], [0.0, 1.0]]))
        state = AgentState(arms)
        agent_update(state, 0, 1.0)  # s_hat = (1, 0)
        arm, _ = agent_select(state, AgentBehavior(), np.zeros(2),
                              3, np.random.default_rng(0))
        assert arm == 0


class TestOracleReduction:
    def test_matches_true_mean_selection_on_incentive_grid(self):
        # An oracle agent and a greedy learner fed point-mass rewards with
        # initial means equal to the truth pick identical arms for every
        # incentive vector on a grid.
        mu = np.array([0.15, 0.6, 0.4])
        model = RewardModel.point([0.5, 0.5, 0.5], mu)
        oracle_state = AgentState(ArmSet.iid(3))
        rng = np.random.default_rng(0)
        grid = np.linspace(0.0, 1.2, 7)
        beh_oracle = AgentBehavior(kind="oracle")
        for a in grid:
            for b in grid:
                for c in grid:
                    inc = np.array([a, b, c])
                    manual = argmax_with_ties(mu + inc)
                    got, _ = agent_select(oracle_state, beh_oracle, inc, 4, rng,
                                          true_means=mu)
                    assert got == manual

    def test_point_mass_learner_means_stay_constant_after_play(self):
        mu = np.array([0.15, 0.6, 0.4])
        model = RewardModel.point([0.5, 0.5, 0.5], mu)
        state = AgentState(ArmSet.iid(3))
        rng = np.random.default_rng(1)
        for arm in (0, 1, 2, 1, 0, 2):
            _, r = sample_rewards(model, arm, rng)
            agent_update(state, arm, r)
        assert np.allclose(state.empirical_means(), mu)


class TestSampleRewards:
    def test_point_mass_is_exact(self):
        model = RewardModel.point([0.8, 0.1], [0.2, 0.3])
        x, r = sample_rewards(model, 0, np.random.default_rng(0))
        assert (x, r) == (0.8, 0.2)

    def test_single_arm_rejected(self):
        with pytest.raises(ConfigError):
            ArmSet.iid(1)

    def test_bernoulli_law_of_large_numbers(self):
        model = RewardModel.bernoulli([0.3, 0.7], [0.6, 0.2])
        rng = np.random.default_rng(7)
        n = 100_000
        xs = np.array([sample_rewards(model, 0, rng) for _ in range(n)])
        assert abs(xs[:, 0].mean() - 0.3) < 0.01
        assert abs(xs[:, 1].mean() - 0.6) < 0.01

    def test_linear_zero_noise_exact(self):
        arms = ArmSet.linear(np.array([[1.0, 0.0], [0.0, 1.0]]))
        model = RewardModel.linear(arms, s_star=[0.5, 0.0], nu_star=[0.1, 0.9])
        x, r = sample_rewards(model, 0, np.random.default_rng(0))
        assert r == 0.5
        assert x == pytest.approx(0.1)

    def test_uniform_support_validated(self):
        with pytest.raises(ConfigError):
            Distribution.uniform(0.5, 1.5)


class TestAgentUpdate:
    def test_iid_mean_update(self):
        state = AgentState(ArmSet.iid(2))
        agent_update(state, 0, 0.5)
        agent_update(state, 0, 0.5)
        agent_update(state, 0, 1.0)
        assert state.empirical_means()[0] == pytest.approx(2 / 3)

    def test_initial_mean_before_any_play(self):
        state = AgentState(ArmSet.iid(2), initial_means=[0.3, 0.0])
        assert state.empirical_means()[0] == 0.3

    def test_initial_mean_is_additive_in_numerator(self):
        state = AgentState(ArmSet.iid(2), initial_means=[0.3, 0.0])
        agent_update(state, 0, 0.5)
        assert state.empirical_means()[0] == pytest.approx(0.8)

    def test_linear_rank_deficient_minimum_norm(self):
        arms = ArmSet.linear(np.array([[1.0, 0.0], [0.0, 1.0]]))
        state = AgentState(arms)
        agent_update(state, 0, 0.4)
        agent_update(state, 0, 0.6)
        assert np.allclose(state.s_hat, [0.5, 0.0], atol=1e-12)

    def test_linear_full_rank_matches_direct_solve(self):
        rng = np.random.default_rng(3)
        feats = rng.standard_normal((4, 3))
        feats /= np.linalg.norm(feats, axis=1)[:, None]
        arms = ArmSet.linear(feats)
        state = AgentState(arms)
        plays, rewards = [], []
        for _ in range(200):
            a = int(rng.integers(4))
            r = float(rng.standard_normal())
            agent_update(state, a, r)
            plays.append(a)
            rewards.append(r)
        A = feats[plays]
        direct = np.linalg.pinv(A.T @ A, rcond=1e-10) @ (A.T @ np.array(rewards))
        assert np.allclose(state.s_hat, direct, atol=1e-8)

    def test_drift_bound_over_random_trajectories(self):
        # One-step empirical-mean drift stays in [-1/N', 1/N] once N >= 1,
        # for zero initial means and [0,1] rewards.
        rng = np.random.default_rng(11)
        state = AgentState(ArmSet.iid(3))
        for _ in range(5000):
            arm = int(rng.integers(3))
            n = int(state.counts[arm])
            before = state.empirical_means()[arm]
            agent_update(state, arm, float(rng.random()))
            diff = state.empirical_means()[arm] - before
            if n >= 1:
                assert -1.0 / (n + 1) - 1e-12 <= diff <= 1.0 / n + 1e-12


class TestOptimalIncentive:
    def test_gap_to_best(self):
        state = AgentState(ArmSet.iid(3))
        state._mu_hat = np.array([0.3, 0.7, 0.5])
        assert optimal_incentive(state, 0) == pytest.approx(0.4)

    def test_zero_when_already_best(self):
        state = AgentState(ArmSet.iid(3))
        state._mu_hat = np.array([0.3, 0.7, 0.5])
        assert optimal_incentive(state, 1) == 0.0

    def test_linear_case(self):
        arms = ArmSet.linear(np.array([[1.0, 0.0], [0.0, 1.0]]))
        state = AgentState(arms)
        agent_update(state, 0, 1.0)  # s_hat = e1
        assert optimal_incentive(state, 1) == pytest.approx(1.0)


class TestBehaviorConfig:
    def test_adversarial_policy_resolves_to_lowest_joint_mean(self):
        model = RewardModel.point([0.9, 0.1, 0.5], [0.1, 0.2, 0.4])
        beh = resolve_behavior(
            AgentBehavior(kind="exploratory-learner", c0=1.0,
                          explore_policy="adversarial-lowest-joint-mean"), model)
        assert beh.explore_policy == "fixed-arm"
        assert beh.explore_arm == 1  # joint means 1.0, 0.3, 0.9

    def test_greedy_with_c0_rejected(self):
        with pytest.raises(ConfigError):
            AgentBehavior(kind="greedy-learner", c0=0.5)

    def test_arm_set_validation(self):
        with pytest.raises(ConfigError):
            ArmSet.linear(np.array([[2.0, 0.0], [0.0, 1.0]]))
        with pytest.raises(ConfigError):
            ArmSet.linear(np.array([[1.0, 0.0], [0.5, 0.0]]))


def test_determinism_identical_seeds():
    model = RewardModel.bernoulli([0.4, 0.8], [0.7, 0.2])
    beh = AgentBehavior(kind="exploratory-learner", c0=1.0)

    def trajectory(seed):
        rng = np.random.default_rng(seed)
        state = AgentState(ArmSet.iid(2))
        out = []
        for t in range(1, 300):
            inc = np.array([0.2, 0.1]) if t % 2 else np.array([0.0, 0.3])
            arm, explored = agent_select(state, beh, inc, t, rng)
            _, r = sample_rewards(model, arm, rng)
            agent_update(state, arm, r)
            out.append((arm, explored, r))
        return out

    assert trajectory(42) == trajectory(42)
    assert trajectory(42) != trajectory(43)
