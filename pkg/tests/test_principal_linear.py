import math

import numpy as np
import pytest

from incentive_bandits import (AgentBehavior, ArmSet, ConfigError, RewardModel,
                               bad_arm_schedule, linear_enlarged_incentive,
                               linear_offline_eliminate, linear_phase_params,
                               ols_principal_estimate, run_linear_principal)
from incentive_bandits.geometry import MSPTrace


def orthant_arms():
    return np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])


class TestPhaseParams:
    def test_frozen_values(self):
        T_1, eps_1 = linear_phase_params(1, 2, 8, 2 ** 20, 2.0 ** -10)
        assert T_1 == 1553
        L = 35 * math.log(2)
        expect = 4 * math.sqrt(2 * L / min(1553, (2 * L) ** (1 / 3) * 1553 ** (2 / 3)))
        assert eps_1 == pytest.approx(expect)

    def test_eps_monotone_decreasing(self):
        prev = None
        for m in range(1, 12):
            _, eps = linear_phase_params(m, 3, 6, 2 ** 18, 1e-4)
            if prev is not None:
                assert eps < prev
            prev = eps

    def test_min_branch_crossover(self):
        # The T_m branch binds exactly while T_m < d * log(4KT/delta).
        d, K, T, delta = 2, 8, 2 ** 20, 2.0 ** -10
        L = math.log(4 * K * T / delta)
        for m in range(1, 8):
            T_m, eps = linear_phase_params(m, d, K, T, delta)
            branch = min(T_m, (d * L) ** (1 / 3) * T_m ** (2 / 3))
            if T_m < d * L:
                assert branch == T_m
            else:
                assert branch == (d * L) ** (1 / 3) * T_m ** (2 / 3)


class TestBadArmSchedule:
    def test_frozen_value(self):
        budgets = bad_arm_schedule([5], np.array([0.5]), 2, 8, 2 ** 20,
                                   2.0 ** -10, T_m=1553)
        assert budgets[5] == 245

    def test_singleton_full_weight(self):
        d, K, T, delta, T_m = 2, 8, 2 ** 20, 2.0 ** -10, 1553
        budgets = bad_arm_schedule([3], np.array([1.0]), d, K, T, delta, T_m)
        L = math.log(4 * T * K / delta)
        assert budgets[3] == math.ceil((d * L) ** (1 / 3) * T_m ** (2 / 3))

    def test_zero_weight_is_skipped(self):
        budgets = bad_arm_schedule([1, 2], np.array([1.0, 0.0]), 2, 8,
                                   2 ** 20, 2.0 ** -10, T_m=1553)
        assert budgets[2] == 0


class TestEnlargedIncentive:
    def test_maximizer_gets_only_padding(self):
        feats = orthant_arms()
        center = np.array([0.4, 0.0])
        val = linear_enlarged_incentive(center, feats[0], feats, 0.01, 2, 10 ** 6)
        assert val == pytest.approx((1 + 64) * 0.01 + 1e-6)

    def test_cap_binds_for_huge_slack(self):
        feats = orthant_arms()
        val = linear_enlarged_incentive(np.array([0.4, 0.0]), feats[2], feats,
                                        10.0, 2, 10 ** 6)
        assert val == pytest.approx(4 + 1e-6)

    def test_frozen_example(self):
        feats = np.array([[1.0, 0.0], [-1.0, 0.0]])
        val = linear_enlarged_incentive(np.array([0.4, 0.0]), feats[1], feats,
                                        0.01, 2, 10 ** 6)
        assert val == pytest.approx(1.450001)


class TestOLS:
    def test_exact_recovery_zero_noise(self):
        feats = orthant_arms()
        nu = np.array([0.3, -0.2])
        plays = np.array([0, 1, 2, 3] * 25)
        rewards = feats[plays] @ nu
        V = sum(25 * np.outer(feats[a], feats[a]) for a in range(4))
        est = ols_principal_estimate(plays, rewards, feats, V)
        assert np.allclose(est, nu, atol=1e-10)

    def test_singular_design_raises(self):
        feats = orthant_arms()
        V = np.outer(feats[0], feats[0])
        with pytest.raises(np.linalg.LinAlgError):
            ols_principal_estimate(np.array([0]), np.array([0.3]), feats, V)

    def test_noise_within_confidence_envelope(self):
        # |<nu_hat - nu, a>| <= sqrt(2 |a|^2_{V^-1} log(4KT/delta)) holds on
        # all but a delta-scale fraction of seeds.
        feats = orthant_arms()
        nu = np.array([0.3, -0.2])
        delta = 0.01
        L = math.log(4 * 4 * 10 ** 4 / delta)
        n_per = 200
        plays = np.array(list(range(4)) * n_per)
        V = sum(n_per * np.outer(feats[a], feats[a]) for a in range(4))
        Vinv = np.linalg.inv(V)
        misses = 0
        for seed in range(200):
            rng = np.random.default_rng(seed)
            rewards = feats[plays] @ nu + rng.standard_normal(len(plays))
            est = ols_principal_estimate(plays, rewards, feats, V)
            for a in range(4):
                bound = math.sqrt(2 * feats[a] @ Vinv @ feats[a] * L)
                if abs((est - nu) @ feats[a]) > bound:
                    misses += 1
                    break
        assert misses <= max(2, 2 * delta * 200)


class TestOfflineEliminate:
    def test_identical_arms_retained(self):
        feats = np.array([[0.5, 0.5], [0.5, 0.5], [0.1, 0.1]])
        keep, out = linear_offline_eliminate([0, 1], feats, np.array([0.3, 0.3]),
                                             np.array([0.1, 0.1]), 0.001, 2)
        assert keep == [0, 1] and out == []

    def test_large_gap_eliminated(self):
        feats = orthant_arms()
        nu_plus_c = np.array([1.0, 0.0])
        keep, out = linear_offline_eliminate([0, 2], feats, nu_plus_c,
                                             np.zeros(2), 0.002, 2)
        assert keep == [0] and out == [2]

    def test_boundary_retained(self):
        feats = np.array([[1.0, 0.0], [0.0, 0.0]])
        eps = 0.01
        d = 2
        margin = (7 + 32 * d) * eps
        combo = np.array([margin, 0.0])  # gap exactly equals the threshold
        keep, out = linear_offline_eliminate([0, 1], feats, combo, np.zeros(2),
                                             eps, d)
        assert keep == [0, 1]


class TestFullRuns:
    def test_best_arm_survives_and_targets_played(self):
        arms = ArmSet.linear(orthant_arms())
        model = RewardModel.linear(arms, s_star=[0.5, 0.2], nu_star=[0.3, 0.4])
        tr = run_linear_principal(model, AgentBehavior(), T=20_000, seed=0)
        best = int(np.argmax(orthant_arms() @ np.array([0.8, 0.6])))
        assert all(best not in p.eliminated for p in tr.phases)
        names = tr.block_names()
        sched = (names == "explore") | (names == "stabilize")
        assert np.all(tr.arm[sched] == tr.target[sched])

    def test_incentive_strictly_exceeds_optimal_on_schedule(self):
        arms = ArmSet.linear(orthant_arms())
        model = RewardModel.linear(arms, s_star=[0.5, 0.2], nu_star=[0.3, 0.4])
        probes = []

        from incentive_bandits.game import build_channel
        ch = build_channel(model, AgentBehavior(), 5000, seed=0,
                           keep_pre_snapshots=True)

        def probe(channel, t, arm):
            tr = channel.transcript
            i = tr.n - 1
            if tr.target[i] >= 0 and tr.block[i] in (0, 2):  # stabilize/explore
                tgt = tr.target[i]
                pi_star = float(channel.pre_means.max() - channel.pre_means[tgt])
                probes.append(tr.incentives[i, tgt] > pi_star)

        ch.probe = probe
        run_linear_principal(model, AgentBehavior(), T=5000, channel=ch)
        assert probes and all(probes)

    def test_estimate_accuracy_invariant_zero_noise(self):
        # Past phase 1 the agent's projections match the truth to within the
        # previous phase's allowance (trivially, exactly, in zero noise).
        arms = ArmSet.linear(orthant_arms())
        s_star = np.array([0.5, 0.2])
        model = RewardModel.linear(arms, s_star=s_star, nu_star=[0.3, 0.4])
        errs = []

        from incentive_bandits.game import build_channel
        ch = build_channel(model, AgentBehavior(), 8000, seed=0)

        def probe(channel, t, arm):
            if channel.phase >= 2:
                errs.append(float(np.abs(
                    orthant_arms() @ (channel.state.s_hat - s_star)).max()))

        ch.probe = probe
        run_linear_principal(model, AgentBehavior(), T=8000, channel=ch)
        assert errs and max(errs) < 1e-9

    def test_msp_traces_and_design_matrix_positive_definite(self):
        arms = ArmSet.linear(orthant_arms())
        model = RewardModel.linear(arms, s_star=[0.5, 0.2], nu_star=[0.3, 0.4])
        traces: list[MSPTrace] = []
        tr = run_linear_principal(model, AgentBehavior(), T=10_000, seed=2,
                                  msp_traces=traces)
        assert 2 * (len(tr.phases) - 1) <= len(traces) <= 2 * len(tr.phases)
        for t in traces:
            assert all(it.witness_inside for it in t.iterations)

    def test_noise_run_converges_to_best_arm(self):
        arms = ArmSet.linear(orthant_arms())
        model = RewardModel.linear(arms, s_star=[0.5, 0.2], nu_star=[0.3, 0.4],
                                   agent_noise=0.1, principal_noise=0.1)
        tr = run_linear_principal(model, AgentBehavior(), T=30_000, seed=3,
                                  gamma=1e-3)
        best = 0
        assert all(best not in p.eliminated for p in tr.phases)

    def test_config_rejections(self):
        iid = RewardModel.point([0.9, 0.1], [0.1, 0.9])
        with pytest.raises(ConfigError):
            run_linear_principal(iid, AgentBehavior(), T=100)
        arms = ArmSet.linear(orthant_arms())
        lin = RewardModel.linear(arms, s_star=[0.5, 0.2], nu_star=[0.3, 0.4])
        with pytest.raises(ConfigError):
            run_linear_principal(lin, AgentBehavior(kind="exploratory-learner",
                                                    c0=1.0), T=100)

    def test_determinism(self):
        arms = ArmSet.linear(orthant_arms())
        model = RewardModel.linear(arms, s_star=[0.5, 0.2], nu_star=[0.3, 0.4],
                                   agent_noise=0.2, principal_noise=0.2)
        a = run_linear_principal(model, AgentBehavior(), T=4000, seed=11)
        b = run_linear_principal(model, AgentBehavior(), T=4000, seed=11)
        assert np.array_equal(a.arm, b.arm)
        assert np.array_equal(a.regret_perround, b.regret_perround)
