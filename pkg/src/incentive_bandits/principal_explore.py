"""Exploration-robust principals.

The agent may ignore any incentive with a (bounded, decreasing) probability,
so no single incentive search can be trusted.  Each phase therefore repeats
the search logarithmically many times, tests the sorted candidates one by one
with failure counters sized to the exploration budget, and decides
eliminations by the median of repeated probe votes.

Two variants: the learning-agent one stabilizes bad arms and pads incentives
for estimate drift; the oracle-agent refinement skips both (the agent's
preferences never drift) and reaches root-T regret.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import HorizonExhausted, InteractionChannel
from .env import AgentBehavior, ConfigError, RewardModel, one_hot_incentive
from .game import GameChannel, PhaseRecord, Transcript, build_channel
from .rng import RngStreams
from .search import noisy_binary_search


def explore_phase_length(m: int, K: int, T: int, delta: float, c0: float) -> int:
    return math.ceil(explore_phase_length_raw(m, K, T, delta, c0))


def explore_phase_length_raw(m: int, K: int, T: int, delta: float, c0: float) -> float:
    """Per-arm play target of phase m; c0 is clamped below by 1 to stay positive."""
    if m < 1 or c0 < 0:
        raise ValueError("need m >= 1 and c0 >= 0")
    li = log_iota(K, T, delta)
    return (32.0 * max(c0, 1.0) ** 3 * 2.0 ** (2 * m) * K
            * math.log(16.0 * T * K / delta) * li ** 2)


def log_iota(K: int, T: int, delta: float) -> float:
    iota = 16.0 * K * T * T * math.log2(T) * math.log(4.0 * math.log2(T) / delta) / delta
    return math.log(iota)


def search_repeats(T: int, delta: float) -> int:
    return math.ceil(2.0 * math.log(4.0 * math.log2(T) / delta))


def vote_rounds(K: int, T: int, delta: float) -> int:
    return math.ceil(8.0 * math.log(8.0 * K * math.log2(T) / delta))


def explore_bad_budget_raw(active_count: int, bad_count: int, T_prev: float,
                           K: int, T: int, delta: float) -> float:
    return (2.0 * math.log(16.0 * K * T / delta) ** (1.0 / 3.0)
            * (active_count * T_prev / max(1, bad_count)) ** (2.0 / 3.0))


def explore_epsilon(active_count: int, bad_count: int, T_prev: float,
                    K: int, T: int, delta: float) -> float:
    """Estimate-drift allowance entering the incentive enlargement."""
    L = math.log(16.0 * K * T / delta)
    return ((L * max(1, bad_count) / (T_prev * active_count)) ** (1.0 / 3.0)
            + math.sqrt(L / T_prev))


def incentive_test(arm: int, sorted_incentives: list[float],
                   channel: InteractionChannel, c0: float, T_m: int,
                   T: int, log_iota_value: float) -> int:
    """Try candidates in ascending order until enough target plays accumulate.

    Each candidate is offered repeatedly; a failure counter crossing the
    exploration-consistent threshold moves on to the next candidate, while a
    reliable candidate runs to the 2*T_m round cap.  Returns the total number
    of target plays collected.
    """
    K = channel.K
    log2T = math.log(2.0 * T)
    acquired = 0
    for bb in sorted_incentives:
        inc = one_hot_incentive(arm, bb, K)
        c = 0
        y = 0
        while True:
            observed = channel.propose(inc, target=arm)
            y += 1
            if observed != arm:
                c += 1
            if c > 2.0 * c0 * math.sqrt(y * log2T) + math.sqrt(8.0 * log_iota_value / y):
                break
            if y == 2 * T_m:
                break
        acquired += y - c
        if acquired >= T_m:
            break
    return acquired


def median_vote(ones: int, length: int) -> int:
    """Median of a sorted 0/1 list of ``length`` votes with ``ones`` ones."""
    return 1 if ones >= length - length // 2 else 0


def trustworthy_eliminate(active: list[int], bad: list[int],
                          channel: InteractionChannel, rounds: int,
                          bonus: float,
                          theta_hat: np.ndarray | None = None) -> tuple[list[int], list[int]]:
    """Repeat the elimination probe ``rounds`` times per arm; decide by median vote.

    The probe incentive is frozen at the estimates seen when the arm's block
    starts, so all votes test the same comparison.
    """
    K = channel.K
    keep, out = [], []
    for a in active:
        th0 = (channel.theta_hat if theta_hat is None else theta_hat).copy()
        inc = np.zeros(K)
        for b in active:
            inc[b] = 1.0 + th0[b]
        inc[a] += bonus
        ones = 0
        for _ in range(rounds):
            if channel.propose(inc, target=a) == a:
                ones += 1
        if median_vote(ones, rounds) == 1:
            keep.append(a)
        else:
            out.append(a)
    return keep, bad + out


@dataclass
class ExploreSchedule:
    T_m: int            # realized per-arm play target
    Z_m: int            # realized per-bad-arm stabilization budget
    T_m_ref: float
    enlargement: float  # additive padding applied to every sorted search output
    bonus: float        # elimination probe bonus


def _schedule(m: int, active_count: int, bad_count: int, T_prev_ref: float,
              K: int, T: int, delta: float, c0: float, gamma: float,
              oracle: bool) -> ExploreSchedule:
    raw = explore_phase_length_raw(m, K, T, delta, c0)
    T_m_ref = math.ceil(raw)
    if oracle:
        z = 0
        enlargement = 1.0 / T
        bonus = 3.0 * math.sqrt(math.log(8.0 * K * T / delta) / (2.0 * T_m_ref))
    else:
        z = math.ceil(gamma * explore_bad_budget_raw(active_count, bad_count,
                                                     T_prev_ref, K, T, delta))
        eps = explore_epsilon(active_count, bad_count, T_prev_ref, K, T, delta)
        enlargement = ((max(1, bad_count) / (T_prev_ref * active_count)) ** (2.0 / 3.0)
                       + 1.0 / T_prev_ref + 4.0 * eps)
        bonus = 5.0 * math.sqrt(math.log(16.0 * K * T / delta) / (2.0 * T_m_ref))
    return ExploreSchedule(T_m=math.ceil(gamma * raw), Z_m=z, T_m_ref=T_m_ref,
                           enlargement=enlargement, bonus=bonus)


def _run(model: RewardModel, behavior: AgentBehavior, T: int, delta: float,
         c0: float, gamma: float, seed, channel, oracle: bool) -> Transcript:
    if model.arms.kind != "iid":
        raise ConfigError("this principal assumes iid rewards")
    if oracle and not behavior.is_oracle:
        raise ConfigError("the oracle refinement assumes an oracle-kind agent")
    if not 0.0 < gamma <= 1.0:
        raise ConfigError("gamma must lie in (0, 1]")
    K = model.arms.K
    ch = channel if channel is not None else build_channel(model, behavior, T, seed)
    n_search = search_repeats(T, delta)
    n_votes = vote_rounds(K, T, delta)
    li = log_iota(K, T, delta)
    active = list(range(K))
    bad: list[int] = []
    T_prev_ref = 1.0
    m = 0
    try:
        while True:
            m += 1
            ch.phase = m
            sched = _schedule(m, len(active), len(bad), T_prev_ref,
                              K, T, delta, c0, gamma, oracle)
            rec = PhaseRecord(m=m, active=list(active), bad=list(bad), budget=sched.T_m)
            ch.transcript.phases.append(rec)
            if not oracle:
                ch.block = "stabilize"
                inc_value = 1.0 + 1.0 / T
                for a in bad:
                    inc = one_hot_incentive(a, inc_value, K)
                    for _ in range(sched.Z_m):
                        ch.propose(inc, target=a)
            ch.block = "search"
            candidates: dict[int, list[float]] = {}
            for a in active:
                outs = sorted(noisy_binary_search(a, T, ch) for _ in range(n_search))
                if oracle:
                    candidates[a] = [b + sched.enlargement for b in outs]
                else:
                    candidates[a] = [min(1.0 + 1.0 / T, b + sched.enlargement) for b in outs]
                rec.searches[a] = (outs[0], candidates[a][0])
            ch.block = "explore"
            for a in active:
                rec.plays[a] = incentive_test(a, candidates[a], ch, c0,
                                              sched.T_m, T, li)
            ch.block = "eliminate"
            new_active, new_bad = trustworthy_eliminate(active, bad, ch,
                                                        n_votes, sched.bonus)
            rec.eliminated = sorted(set(active) - set(new_active))
            rec.extra["bonus"] = sched.bonus
            active, bad = new_active, new_bad
            T_prev_ref = sched.T_m_ref
    except HorizonExhausted:
        pass
    return ch.finish()


def run_exploratory_principal(model: RewardModel, behavior: AgentBehavior, T: int,
                              delta: float | None = None, c0: float = 1.0,
                              gamma: float = 1.0, seed: int | RngStreams = 0,
                              channel: GameChannel | None = None) -> Transcript:
    """Full robust principal for a (possibly exploratory) learning agent.

    ``c0`` is the principal's assumed exploration bound, an independent config
    field from the agent's true rate.
    """
    delta = 1.0 / T if delta is None else delta
    return _run(model, behavior, T, delta, c0, gamma, seed, channel, oracle=False)


def run_oracle_explore_principal(model: RewardModel, behavior: AgentBehavior, T: int,
                                 delta: float | None = None, c0: float = 1.0,
                                 gamma: float = 1.0, seed: int | RngStreams = 0,
                                 channel: GameChannel | None = None) -> Transcript:
    """Refined robust principal for an exploratory oracle agent: no bad-arm
    stabilization, minimal enlargement, tighter elimination bonus."""
    delta = 1.0 / T if delta is None else delta
    return _run(model, behavior, T, delta, c0, gamma, seed, channel, oracle=True)
