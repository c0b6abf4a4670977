"""Game-loop wiring: live channel, per-round transcript and regret ledger.

Every round records the proposed incentive, the observed arm, both rewards,
and the instantaneous regret under three notions:

* per-round: benchmark is the best arm under the agent's current selection
  means, charged its minimum sufficient incentive;
* oracle: same benchmark evaluated at the true agent means;
* bar: joint-means benchmark, charging the principal the full incentive sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channel import HorizonExhausted
from .env import (AgentBehavior, AgentState, ConfigError, RewardModel,
                  agent_update, argmax_with_ties, resolve_behavior)
from .rng import RngStreams, make_streams

BLOCKS = ("stabilize", "search", "explore", "eliminate")
_BLOCK_CODE = {name: i for i, name in enumerate(BLOCKS)}

CSV_HEADER = ("round,phase,block,arm,explored,incentive_total,principal_reward,"
              "agent_reward,regret_perround,regret_oracle,regret_bar,"
              "cum_perround,cum_oracle,cum_bar")


@dataclass
class PhaseRecord:
    """Per-phase summary appended by principals as they run."""

    m: int
    active: list[int]
    bad: list[int]
    budget: int                      # realized per-arm exploration budget
    eliminated: list[int] = field(default_factory=list)
    searches: dict = field(default_factory=dict)
    plays: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


class Transcript:
    """Immutable-after-run, append-only record of one game."""

    def __init__(self, K: int, T: int):
        self.K = K
        self.T = T
        self.n = 0
        self.phase = np.zeros(T, dtype=np.int16)
        self.block = np.zeros(T, dtype=np.int8)
        self.arm = np.zeros(T, dtype=np.int16)
        self.target = np.full(T, -1, dtype=np.int16)
        self.explored = np.zeros(T, dtype=bool)
        self.incentives = np.zeros((T, K))
        self.principal_reward = np.zeros(T)
        self.agent_reward = np.zeros(T)
        self.regret_perround = np.zeros(T)
        self.regret_oracle = np.zeros(T)
        self.regret_bar = np.zeros(T)
        self.bench_arm = np.zeros(T, dtype=np.int16)   # per-round benchmark arm
        self.bench_incentive = np.zeros(T)             # its minimum incentive
        self.phases: list[PhaseRecord] = []
        self.flags: list[str] = []

    def truncate(self) -> "Transcript":
        """Drop unused capacity after the run ends."""
        n = self.n
        for name in ("phase", "block", "arm", "target", "explored", "incentives",
                     "principal_reward", "agent_reward",
                     "regret_perround", "regret_oracle", "regret_bar",
                     "bench_arm", "bench_incentive"):
            setattr(self, name, getattr(self, name)[:n])
        return self

    def block_names(self) -> np.ndarray:
        return np.array(BLOCKS)[self.block]

    def cumulative(self, mode: str = "perround") -> np.ndarray:
        return np.cumsum(getattr(self, f"regret_{mode}"))

    def total(self, mode: str = "perround") -> float:
        return float(getattr(self, f"regret_{mode}").sum())

    def to_csv(self, path) -> None:
        cum_p = self.cumulative("perround")
        cum_o = self.cumulative("oracle")
        cum_b = self.cumulative("bar")
        inc_total = self.incentives.sum(axis=1)
        names = self.block_names()
        with open(path, "w", newline="") as fh:
            fh.write(CSV_HEADER + "\n")
            for i in range(self.n):
                fh.write(f"{i + 1},{self.phase[i]},{names[i]},{self.arm[i]},"
                         f"{int(self.explored[i])},{inc_total[i]!r},"
                         f"{self.principal_reward[i]!r},{self.agent_reward[i]!r},"
                         f"{self.regret_perround[i]!r},{self.regret_oracle[i]!r},"
                         f"{self.regret_bar[i]!r},{cum_p[i]!r},{cum_o[i]!r},{cum_b[i]!r}\n")


def compute_instant_regret(agent_state, model: RewardModel, incentive: np.ndarray,
                           arm: int, mode: str = "per-round") -> float:
    """Instantaneous regret of playing ``arm`` under ``incentive`` at this state.

    ``agent_state`` may be an :class:`AgentState` or a raw array of the means
    that drive the agent's selection (true means for oracle agents).
    """
    means = agent_state.empirical_means() if isinstance(agent_state, AgentState) else np.asarray(agent_state)
    theta = model.theta()
    mu = model.mu()
    if mode == "per-round":
        bench = float(np.max(theta + means) - np.max(means))
        return bench - (theta[arm] - incentive[arm])
    if mode == "oracle":
        bench = float(np.max(theta + mu) - np.max(mu))
        return bench - (theta[arm] - incentive[arm])
    if mode == "bar":
        bench = float(np.max(theta + mu) - np.max(mu))
        return bench - (theta[arm] - float(np.sum(incentive)))
    raise ValueError(f"unknown regret mode {mode!r}")


class GameChannel:
    """Live channel wiring one principal to one agent over one horizon.

    The principal sets ``block``/``phase`` tags before streams of proposals;
    every ``propose`` runs a full round (selection, rewards, updates, ledger).
    Public side information (counts, reward estimates) accumulates exactly as
    a principal tracking every observed play would hold it.
    """

    def __init__(self, model: RewardModel, behavior: AgentBehavior, T: int,
                 streams: RngStreams | int | None = None,
                 initial_means=None, s_init=None,
                 keep_pre_snapshots: bool = False):
        if isinstance(streams, (int, np.integer)) or streams is None:
            streams = make_streams(0 if streams is None else int(streams))
        self.model = model
        self.behavior = resolve_behavior(behavior, model)
        self.K = model.arms.K
        self.T = int(T)
        self.streams = streams
        self.state = AgentState(model.arms, initial_means=initial_means, s_init=s_init)
        self.transcript = Transcript(self.K, self.T)
        self.block = "explore"
        self.phase = 1
        self.counts = np.zeros(self.K, dtype=np.int64)
        self._reward_sums = np.zeros(self.K)
        self.theta_hat = np.zeros(self.K)
        self._theta_true = model.theta()
        mu = model.mu()
        self._mu_true = mu
        self._bench_const = float(np.max(self._theta_true + mu) - np.max(mu))
        self._oracle_means = mu if self.behavior.is_oracle else None
        self._is_linear = model.arms.kind == "linear"
        self._explores = self.behavior.explores
        self._tau = self.behavior.tau
        self._c0 = self.behavior.c0
        self.keep_pre_snapshots = keep_pre_snapshots
        self.pre_means: np.ndarray | None = None
        self.pre_counts: np.ndarray | None = None
        self.probe: Callable | None = None

    @property
    def rounds_used(self) -> int:
        return self.transcript.n

    @property
    def remaining(self) -> int:
        return self.T - self.transcript.n

    def flag(self, message: str) -> None:
        self.transcript.flags.append(message)

    def propose(self, incentive: np.ndarray, target: int = -1) -> int:
        tr = self.transcript
        i = tr.n
        if i >= self.T:
            raise HorizonExhausted()
        t = i + 1
        behavior = self.behavior
        state = self.state
        # Selection means before this round's update drive both the agent's
        # choice and the per-round benchmark.
        if self._oracle_means is not None:
            sel_means = self._oracle_means
        elif self._is_linear:
            sel_means = state.arms.features @ state._s_hat
        else:
            sel_means = state._mu_hat
        if self.keep_pre_snapshots:
            self.pre_means = sel_means.copy()
            self.pre_counts = self.counts.copy()
        explored = False
        if self._explores and t >= self._tau:
            p = self._c0 * math.sqrt(math.log(2.0 * t) / t)
            if self.streams.agent_explore.random() < p:
                explored = True
                if behavior.explore_policy == "uniform":
                    arm = int(self.streams.agent_explore.integers(self.K))
                else:
                    arm = behavior.explore_arm
        if not explored:
            arm = argmax_with_ties(sel_means + incentive, behavior.tie_rule)
        # Rewards.
        model = self.model
        if self._is_linear:
            feats = model.arms.features[arm]
            x = float(feats @ model.nu_star)
            r = float(feats @ model.s_star)
            if model.principal_noise > 0.0:
                x += model.principal_noise * self.streams.principal_noise.standard_normal()
            if model.agent_noise > 0.0:
                r += model.agent_noise * self.streams.agent_noise.standard_normal()
        else:
            x = model.principal_dists[arm].sample(self.streams.principal_noise)
            r = model.agent_dists[arm].sample(self.streams.agent_noise)
        # Ledger (uses pre-update means).
        theta = self._theta_true
        inc_arm = float(incentive[arm])
        joint = theta + sel_means
        best = int(np.argmax(joint))
        top_mean = float(np.max(sel_means))
        bench_per = float(joint[best]) - top_mean
        realized = theta[arm] - inc_arm
        tr.regret_perround[i] = bench_per - realized
        tr.regret_oracle[i] = self._bench_const - realized
        tr.regret_bar[i] = self._bench_const - theta[arm] + float(np.sum(incentive))
        tr.bench_arm[i] = best
        tr.bench_incentive[i] = top_mean - float(sel_means[best])
        # Updates.
        agent_update(state, arm, r)
        self.counts[arm] += 1
        self._reward_sums[arm] += x
        self.theta_hat[arm] = self._reward_sums[arm] / self.counts[arm]
        # Record.
        tr.phase[i] = self.phase
        tr.block[i] = _BLOCK_CODE[self.block]
        tr.arm[i] = arm
        tr.target[i] = target
        tr.explored[i] = explored
        tr.incentives[i] = incentive
        tr.principal_reward[i] = x
        tr.agent_reward[i] = r
        tr.n = t
        if self.probe is not None:
            self.probe(self, t, arm)
        return arm

    def finish(self) -> Transcript:
        return self.transcript.truncate()


def build_channel(model: RewardModel, behavior: AgentBehavior, T: int,
                  seed: int | RngStreams = 0, **kwargs) -> GameChannel:
    streams = seed if isinstance(seed, RngStreams) else make_streams(int(seed))
    return GameChannel(model, behavior, T, streams=streams, **kwargs)


def check_compatibility(algorithm: str, model: RewardModel, behavior: AgentBehavior) -> None:
    """Reject invalid algorithm/model/behavior combinations at construction."""
    linear = model.arms.kind == "linear"
    if algorithm in ("iid-online", "iid-offline"):
        if linear:
            raise ConfigError(f"{algorithm} requires an iid reward model")
        if behavior.explores:
            raise ConfigError(f"{algorithm} requires a non-exploring agent")
    elif algorithm in ("explore", "oracle-explore"):
        if linear:
            raise ConfigError(f"{algorithm} requires an iid reward model")
        if algorithm == "oracle-explore" and not behavior.is_oracle:
            raise ConfigError("oracle-explore requires an oracle-kind agent")
    elif algorithm == "linear":
        if not linear:
            raise ConfigError("the linear principal requires a linear reward model")
        if behavior.explores:
            raise ConfigError("the linear principal requires a non-exploring agent")
    else:
        raise ConfigError(f"unknown algorithm {algorithm!r}")
