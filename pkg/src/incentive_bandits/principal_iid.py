"""Phased-elimination principal for i.i.d. rewards and a non-exploring learner.

Phases grow exponentially.  Each phase stabilizes the estimators of bad arms
by playing them a moderate number of times, searches a near-optimal incentive
per active arm, enlarges it to cover future drift of the agent's estimates,
plays each active arm for the phase budget, then eliminates badly-behaved
arms either online (one probe per arm) or offline (fresh searches compared
against a threshold).
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


def phase_length(m: int, active_count: int, T: int, K: int, delta: float) -> int:
    """Per-arm exploration budget of phase m."""
    return math.ceil(phase_length_raw(m, active_count, T, K, delta))


def phase_length_raw(m: int, active_count: int, T: int, K: int, delta: float) -> float:
    if m < 1 or not 0 < delta < 1:
        raise ValueError("need m >= 1 and 0 < delta < 1")
    return max(2.0 ** (2 * m + 5) * math.log(4.0 * T * K / delta),
               active_count * math.log(T))


def bad_arm_budget(active_count: int, bad_count: int, T_prev: int) -> int:
    """Stabilization plays per bad arm."""
    if T_prev < 1 or active_count < 0 or bad_count < 0:
        raise ValueError("counts must be nonnegative and T_prev >= 1")
    return math.ceil(math.sqrt(active_count * T_prev / max(1, bad_count)))


def confidence_radius(T_prev: float, T: int, K: int, delta: float) -> float:
    return math.sqrt(math.log(4.0 * K * T / delta) / (2.0 * T_prev))


def enlarge_incentive(b: float, C_m: float, Z_m: int, T: int) -> float:
    """Pad a searched incentive to keep enticing the target as estimates drift."""
    if Z_m < 1:
        raise ValueError("Z_m must be >= 1")
    return min(1.0 + 1.0 / T, b + 4.0 * C_m + 1.0 / Z_m)


def online_eliminate(m: int, active: list[int], bad: list[int],
                     channel: InteractionChannel,
                     theta_hat: np.ndarray | None = None) -> tuple[list[int], list[int]]:
    """Probe each active arm once with a boosted incentive; losers move to bad.

    Every active arm's estimate is added to its incentive (plus one, keeping
    the contest within active arms); the target additionally gets the phase
    margin.  Observing any other arm reveals a joint-estimate gap at least
    twice the margin, so the target is eliminated.
    """
    K = channel.K
    bonus = 1.5 * 2.0 ** (-m)
    keep, out = [], []
    for a in active:
        th = channel.theta_hat if theta_hat is None else theta_hat
        inc = np.zeros(K)
        for b in active:
            inc[b] = 1.0 + th[b]
        inc[a] += bonus
        observed = channel.propose(inc, target=a)
        if observed == a:
            keep.append(a)
        else:
            out.append(a)
    return keep, bad + out


def offline_threshold(m: int, active_count: int, bad_count: int,
                      T_m: float, T_prev: float, T: int) -> float:
    """Elimination slack: search error plus the drift of stabilized estimators."""
    eps = 4.0 / T + (2.0 + math.ceil(math.log2(T))) / T_m
    eps += 2.0 * math.sqrt(bad_count / (active_count * T_prev))
    return eps


def offline_eliminate(m: int, active: list[int], bad: list[int],
                      searches: dict[int, tuple[float, np.ndarray]],
                      eps_m: float) -> tuple[list[int], list[int]]:
    """Compare fresh searched incentives offline; strict threshold, ties retained.

    ``searches[a]`` is (b'_a, snapshot of the principal estimates at the round
    a's search ended).
    """
    margin = 1.5 * 2.0 ** (-m) + eps_m
    keep, out = [], []
    for a in active:
        b_a, th = searches[a]
        best = max(th[z] - searches[z][0] for z in active)
        if best - (th[a] - b_a) > margin:
            out.append(a)
        else:
            keep.append(a)
    return keep, bad + out


@dataclass
class IIDSchedule:
    """Reference (unscaled) schedule quantities plus realized gamma-scaled budgets."""

    T_m: int            # realized exploration budget
    Z_m: int            # realized stabilization budget
    T_m_ref: float      # unscaled phase length, drives confidence quantities
    C_m: float
    Z_m_ref: int

    @staticmethod
    def for_phase(m: int, active_count: int, bad_count: int, T_prev_ref: float,
                  T: int, K: int, delta: float, gamma: float) -> "IIDSchedule":
        raw = phase_length_raw(m, active_count, T, K, delta)
        z_raw = math.sqrt(active_count * T_prev_ref / max(1, bad_count))
        return IIDSchedule(
            T_m=math.ceil(gamma * raw),
            Z_m=math.ceil(gamma * z_raw),
            T_m_ref=math.ceil(raw),
            C_m=confidence_radius(T_prev_ref, T, K, delta),
            Z_m_ref=math.ceil(z_raw),
        )


def run_iid_principal(model: RewardModel, behavior: AgentBehavior, T: int,
                      delta: float | None = None, variant: str = "online",
                      gamma: float = 1.0, seed: int | RngStreams = 0,
                      channel: GameChannel | None = None) -> Transcript:
    """Run the full phased principal to the horizon and return the transcript."""
    if behavior.explores:
        raise ConfigError("this principal assumes a non-exploring agent")
    if model.arms.kind != "iid":
        raise ConfigError("this principal assumes iid rewards")
    if variant not in ("online", "offline"):
        raise ConfigError(f"unknown variant {variant!r}")
    if not 0.0 < gamma <= 1.0:
        raise ConfigError("gamma must lie in (0, 1]")
    delta = 1.0 / T if delta is None else delta
    K = model.arms.K
    ch = channel if channel is not None else build_channel(model, behavior, T, seed)
    active = list(range(K))
    bad: list[int] = []
    T_prev_ref = 1.0
    m = 0
    try:
        while True:
            m += 1
            ch.phase = m
            sched = IIDSchedule.for_phase(m, len(active), len(bad), T_prev_ref,
                                          T, K, delta, gamma)
            rec = PhaseRecord(m=m, active=list(active), bad=list(bad), budget=sched.T_m)
            ch.transcript.phases.append(rec)
            ch.block = "stabilize"
            stab = 1.0 + 1.0 / T
            for a in bad:
                inc = one_hot_incentive(a, stab, K)
                for _ in range(sched.Z_m):
                    ch.propose(inc, target=a)
            for a in active:
                ch.block = "search"
                b = noisy_binary_search(a, T, ch)
                bb = enlarge_incentive(b, sched.C_m, sched.Z_m_ref, T)
                rec.searches[a] = (b, bb)
                ch.block = "explore"
                inc = one_hot_incentive(a, bb, K)
                for _ in range(sched.T_m):
                    ch.propose(inc, target=a)
                rec.plays[a] = sched.T_m
            ch.block = "eliminate"
            if variant == "online":
                new_active, new_bad = online_eliminate(m, active, bad, ch)
            else:
                fresh: dict[int, tuple[float, np.ndarray]] = {}
                for a in active:
                    b2 = noisy_binary_search(a, T, ch)
                    fresh[a] = (b2, ch.theta_hat.copy())
                eps_m = offline_threshold(m, len(active), len(bad),
                                          sched.T_m_ref, T_prev_ref, T)
                rec.extra["eps_m"] = eps_m
                new_active, new_bad = offline_eliminate(m, active, bad, fresh, eps_m)
            rec.eliminated = sorted(set(active) - set(new_active))
            active, bad = new_active, new_bad
            T_prev_ref = sched.T_m_ref
    except HorizonExhausted:
        pass
    return ch.finish()
