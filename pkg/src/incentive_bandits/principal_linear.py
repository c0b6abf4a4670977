"""Phased principal for linear rewards.

Instead of searching an incentive per arm (linear in K), each phase locates
the agent's parameter inside a conservatively cut convex body, prices every
active arm from any point of that body, schedules plays by approximate
G-optimal designs (bad arms included, to keep their estimates stable), fits
the principal's own parameter by least squares over the phase, and eliminates
arms offline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import HorizonExhausted
from .env import AgentBehavior, ConfigError, RewardModel, one_hot_incentive
from .game import BLOCKS, GameChannel, PhaseRecord, Transcript, build_channel
from .geometry import MSPTrace, approx_g_optimal_design, msp_search
from .rng import RngStreams

_SCHEDULED_BLOCKS = np.array([BLOCKS.index("stabilize"), BLOCKS.index("explore")],
                             dtype=np.int8)


def linear_phase_params(m: int, d: int, K: int, T: int, delta: float) -> tuple[int, float]:
    """(T_m, eps_m) for phase m."""
    if m < 1:
        raise ValueError("need m >= 1")
    L = math.log(4.0 * K * T / delta)
    T_m = math.ceil(2.0 ** (m + 4) * d * L)
    eps_m = 4.0 * math.sqrt(d * L / min(T_m, (d * L) ** (1.0 / 3.0) * T_m ** (2.0 / 3.0)))
    return T_m, eps_m


def bad_arm_schedule(bad: list[int], design_weights: np.ndarray, d: int, K: int,
                     T: int, delta: float, T_m: int, gamma: float = 1.0) -> dict[int, int]:
    """Per-bad-arm play budgets from the design over the bad set."""
    L = math.log(4.0 * T * K / delta)
    factor = (d * L) ** (1.0 / 3.0) * T_m ** (2.0 / 3.0)
    budgets = {}
    for idx, a in enumerate(bad):
        w = design_weights[idx]
        budgets[a] = math.ceil(gamma * w * factor) if w > 0 else 0
    return budgets


def linear_enlarged_incentive(center: np.ndarray, arm_feature: np.ndarray,
                              features: np.ndarray, eps_prev: float,
                              d: int, T: int) -> float:
    gap = float(np.max(features @ center) - arm_feature @ center)
    return min(2.0 * d + 1.0 / T, gap + (1.0 + 32.0 * d) * eps_prev + 1.0 / T)


def ols_principal_estimate(arm_indices: np.ndarray, rewards: np.ndarray,
                           features: np.ndarray, V_m: np.ndarray) -> np.ndarray:
    """Least-squares estimate over one phase's scheduled interaction rounds."""
    sign, logdet = np.linalg.slogdet(V_m)
    if sign <= 0 or not np.isfinite(logdet):
        raise np.linalg.LinAlgError("design matrix is singular; arms do not span")
    rhs = features[arm_indices].T @ rewards
    return np.linalg.solve(V_m, rhs)


def linear_offline_eliminate(active: list[int], features: np.ndarray,
                             nu_hat: np.ndarray, center2: np.ndarray,
                             eps_m: float, d: int) -> tuple[list[int], list[int]]:
    """Keep arm a unless some active b beats it by more than (7 + 32d) * eps_m."""
    combo = features @ (nu_hat + center2)
    margin = (7.0 + 32.0 * d) * eps_m
    best = max(combo[b] for b in active)
    keep = [a for a in active if best - combo[a] <= margin]
    out = [a for a in active if best - combo[a] > margin]
    return keep, out


@dataclass
class LinearPhaseState:
    m: int
    T_m: int              # realized exploration budget
    T_m_ref: int          # unscaled, drives eps_m
    eps_m: float
    eps_prev: float


def run_linear_principal(model: RewardModel, behavior: AgentBehavior, T: int,
                         delta: float | None = None, gamma: float = 1.0,
                         seed: int | RngStreams = 0,
                         n_samples: int = 4000, kappa: float = 0.05,
                         channel: GameChannel | None = None,
                         msp_traces: list[MSPTrace] | None = None) -> Transcript:
    """Run the full linear principal to the horizon."""
    if model.arms.kind != "linear":
        raise ConfigError("this principal requires a linear reward model")
    if behavior.explores:
        raise ConfigError("this principal assumes a non-exploring agent")
    if not 0.0 < gamma <= 1.0:
        raise ConfigError("gamma must lie in (0, 1]")
    delta = 1.0 / T if delta is None else delta
    arms = model.arms
    K, d = arms.K, arms.d
    features = arms.features
    ch = channel if channel is not None else build_channel(model, behavior, T, seed)
    rng = ch.streams.mc_geometry
    active = list(range(K))
    bad: list[int] = []
    eps_prev = 1.0
    m = 0
    try:
        while True:
            m += 1
            ch.phase = m
            T_m_ref, eps_m = linear_phase_params(m, d, K, T, delta)
            T_m = math.ceil(gamma * 2.0 ** (m + 4) * d * math.log(4.0 * K * T / delta))
            rec = PhaseRecord(m=m, active=list(active), bad=list(bad), budget=T_m)
            rec.extra["eps_m"] = eps_m
            ch.transcript.phases.append(rec)
            phase_start = ch.rounds_used
            planned = np.zeros(K, dtype=np.int64)
            if bad:
                ch.block = "stabilize"
                omega = approx_g_optimal_design(features[bad])
                budgets = bad_arm_schedule(bad, omega.weights, d, K, T, delta,
                                           T_m_ref, gamma=gamma)
                rec.extra["bad_budgets"] = budgets
                for a in bad:
                    if budgets[a] == 0:
                        continue
                    inc = one_hot_incentive(a, 2.0 * d + 1.0 / T, K)
                    for _ in range(budgets[a]):
                        ch.propose(inc, target=a)
                    planned[a] = budgets[a]
            rho = approx_g_optimal_design(features[active])
            ch.block = "search"
            trace1 = MSPTrace() if msp_traces is not None else None
            if trace1 is not None:
                msp_traces.append(trace1)
            center = msp_search(features, eps_prev, 1.0 / T, ch, rng,
                                n_samples=n_samples, kappa=kappa,
                                witness=model.s_star, trace=trace1)
            ch.block = "explore"
            for idx, a in enumerate(active):
                w = rho.weights[idx]
                if w <= 0:
                    continue
                n_plays = math.ceil(w * T_m)
                bb = linear_enlarged_incentive(center, features[a], features,
                                               eps_prev, d, T)
                rec.searches[a] = (float(features[a] @ center), bb)
                inc = one_hot_incentive(a, bb, K)
                for _ in range(n_plays):
                    ch.propose(inc, target=a)
                planned[a] += n_plays
                rec.plays[a] = n_plays
            # Least squares over this phase's scheduled rounds only; the
            # parameter-search rounds in between are not part of the design.
            V_m = (features * planned[:, None].astype(float)).T @ features
            tr = ch.transcript
            lo, hi = phase_start, ch.rounds_used
            sched = np.isin(tr.block[lo:hi], _SCHEDULED_BLOCKS)
            nu_hat = ols_principal_estimate(tr.arm[lo:hi][sched],
                                            tr.principal_reward[lo:hi][sched],
                                            features, V_m)
            rec.extra["nu_hat"] = nu_hat
            ch.block = "search"
            trace2 = MSPTrace() if msp_traces is not None else None
            if trace2 is not None:
                msp_traces.append(trace2)
            center2 = msp_search(features, eps_m, 1.0 / T, ch, rng,
                                 n_samples=n_samples, kappa=kappa,
                                 witness=model.s_star, trace=trace2)
            ch.block = "eliminate"
            keep, out = linear_offline_eliminate(active, features, nu_hat,
                                                 center2, eps_m, d)
            rec.eliminated = sorted(out)
            active = keep
            bad = sorted(bad + out)
            eps_prev = eps_m
    except HorizonExhausted:
        pass
    return ch.finish()
