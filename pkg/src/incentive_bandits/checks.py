"""Fast invariant suites for the ``check`` CLI subcommand.

Each check returns (name, passed, detail).  These are smoke-level versions of
the full test suite: determinism, estimator drift bounds, search duration,
design certificates, and ledger consistency.
"""

from __future__ import annotations

import numpy as np

from .channel import ScriptedChannel
from .env import AgentBehavior, ArmSet, AgentState, RewardModel, agent_update
from .game import build_channel
from .geometry import approx_g_optimal_design
from .harness import ExperimentConfig, run_single
from .search import noisy_binary_search


def check_determinism() -> tuple[str, bool, str]:
    cfg = ExperimentConfig(algorithm="iid-online", T=2000,
                           model={"kind": "iid", "family": "bernoulli",
                                  "theta": [0.8, 0.4, 0.3], "mu": [0.6, 0.5, 0.2]},
                           agent={"kind": "greedy-learner"}, seeds=[7])
    a = run_single(cfg, 7)
    b = run_single(cfg, 7)
    same = (np.array_equal(a.arm, b.arm)
            and np.array_equal(a.regret_perround, b.regret_perround)
            and np.array_equal(a.incentives, b.incentives))
    return "determinism", same, "identical transcripts" if same else "transcripts differ"


def check_drift_bound() -> tuple[str, bool, str]:
    rng = np.random.default_rng(3)
    state = AgentState(ArmSet.iid(4))
    ok = True
    for _ in range(4000):
        arm = int(rng.integers(4))
        n_before = int(state.counts[arm])
        before = state.empirical_means()[arm]
        agent_update(state, arm, float(rng.random()))
        after = state.empirical_means()[arm]
        if n_before >= 1:
            lo = -1.0 / (n_before + 1) - 1e-12
            hi = 1.0 / n_before + 1e-12
            ok &= lo <= after - before <= hi
    return "estimator-drift-bound", ok, "one-step drift within [-1/N', 1/N]"


def check_search_duration() -> tuple[str, bool, str]:
    rng = np.random.default_rng(11)
    ok = True
    worst = 0
    for _ in range(50):
        K = int(rng.integers(2, 6))
        T = 1024
        script = list(rng.integers(0, K, size=64))
        ch = ScriptedChannel(K, T, script, counts=np.full(K, 100))
        noisy_binary_search(0, T, ch)
        worst = max(worst, ch.rounds_used)
        ok &= ch.rounds_used <= 2 * 10
    return "search-duration", ok, f"max rounds {worst} (cap 20)"


def check_design_certificate() -> tuple[str, bool, str]:
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(2, 5))
        k = int(rng.integers(d, 12))
        Z = rng.standard_normal((k, d))
        Z /= np.maximum(1.0, np.linalg.norm(Z, axis=1))[:, None]
        design = approx_g_optimal_design(Z)
        worst = max(worst, float(design.leverages().max()) / (2 * d))
    return "design-certificate", worst <= 1.0 + 1e-9, f"worst leverage/bound {worst:.3f}"


def check_ledger_consistency() -> tuple[str, bool, str]:
    model = RewardModel.point([0.9, 0.2], [0.3, 0.8])
    ch = build_channel(model, AgentBehavior(kind="oracle"), 500, seed=1)
    inc = np.array([0.9, 0.0])
    for _ in range(500):
        ch.propose(inc)
    tr = ch.finish()
    cum = tr.cumulative("perround")
    ok = abs(cum[-1] - tr.total("perround")) < 1e-9
    ok &= np.all(tr.regret_bar >= tr.regret_oracle - 1e-12)
    return "ledger-consistency", bool(ok), "prefix sums and bar >= oracle"


ALL_CHECKS = (check_determinism, check_drift_bound, check_search_duration,
              check_design_certificate, check_ledger_consistency)


def run_checks() -> list[tuple[str, bool, str]]:
    return [fn() for fn in ALL_CHECKS]
