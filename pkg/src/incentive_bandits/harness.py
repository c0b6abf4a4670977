"""Experiment orchestration: configs, seeded runs, CSV/summary output, reports.

A config fully determines a family of runs (one per seed).  Each run wires a
principal to an agent through a live channel, executes to the horizon, and
persists a per-round CSV plus one structured summary record.  Runs are
deterministic per (config, seed).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .env import (AgentBehavior, ArmSet, ConfigError, Distribution, RewardModel)
from .game import (GameChannel, Transcript, build_channel, check_compatibility,
                   compute_instant_regret)
from .principal_explore import (explore_phase_length_raw, run_exploratory_principal,
                                run_oracle_explore_principal, search_repeats,
                                vote_rounds)
from .principal_iid import run_iid_principal
from .principal_linear import run_linear_principal
from .rng import make_streams

ALGORITHMS = ("iid-online", "iid-offline", "explore", "oracle-explore", "linear")


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    algorithm: str
    T: int
    model: dict[str, Any]
    agent: dict[str, Any] = field(default_factory=dict)
    K: int | None = None
    d: int | None = None
    delta: float | None = None            # None means 1/T
    gamma: float = 1.0
    c0: float = 1.0                       # principal's assumed exploration bound
    mc: dict[str, Any] = field(default_factory=lambda: {"n_samples": 4000, "kappa": 0.05})
    seeds: list[int] = field(default_factory=lambda: [0])
    out: str | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.T < 2:
            raise ConfigError("horizon must be at least 2")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError("gamma must lie in (0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        return ExperimentConfig(**data)

    @staticmethod
    def load(path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return ExperimentConfig.from_dict(json.load(fh))

    def dump(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def build_model(data: dict[str, Any]) -> RewardModel:
    """Construct a reward model from its config mapping."""
    kind = data.get("kind", "iid")
    if kind == "iid":
        family = data.get("family", "bernoulli")
        if family in ("bernoulli", "point"):
            maker = Distribution.bernoulli if family == "bernoulli" else Distribution.point
            pd = [maker(v) for v in data["theta"]]
            ad = [maker(v) for v in data["mu"]]
        elif family == "uniform":
            pd = [Distribution.uniform(lo, hi) for lo, hi in data["principal_intervals"]]
            ad = [Distribution.uniform(lo, hi) for lo, hi in data["agent_intervals"]]
        else:
            raise ConfigError(f"unknown iid family {family!r}")
        return RewardModel.iid(pd, ad)
    if kind == "linear":
        arms = ArmSet.linear(np.asarray(data["features"], dtype=float))
        return RewardModel.linear(arms, data["s_star"], data["nu_star"],
                                  agent_noise=data.get("sigma_agent", 0.0),
                                  principal_noise=data.get("sigma_principal", 0.0))
    raise ConfigError(f"unknown model kind {kind!r}")


def build_behavior(data: dict[str, Any]) -> AgentBehavior:
    return AgentBehavior(
        kind=data.get("kind", "greedy-learner"),
        c0=data.get("c0", 0.0),
        explore_policy=data.get("explore_policy", "uniform"),
        explore_arm=data.get("explore_arm", 0),
        tie_rule=data.get("tie_rule", "lowest-index"),
    )


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


def run_single(config: ExperimentConfig, seed: int,
               keep_pre_snapshots: bool = False) -> Transcript:
    """One deterministic run of the configured principal."""
    model = build_model(config.model)
    behavior = build_behavior(config.agent)
    check_compatibility(config.algorithm, model, behavior)
    if config.K is not None and config.K != model.arms.K:
        raise ConfigError(f"config K={config.K} but the model has {model.arms.K} arms")
    if config.d is not None and model.arms.kind == "linear" and config.d != model.arms.d:
        raise ConfigError(f"config d={config.d} but the model has dimension {model.arms.d}")
    delta = config.delta
    channel = build_channel(model, behavior, config.T, seed=make_streams(seed),
                            initial_means=config.agent.get("initial_means"),
                            s_init=config.agent.get("s_init"),
                            keep_pre_snapshots=keep_pre_snapshots)
    algo = config.algorithm
    if algo == "iid-online":
        return run_iid_principal(model, behavior, config.T, delta=delta,
                                 variant="online", gamma=config.gamma, channel=channel)
    if algo == "iid-offline":
        return run_iid_principal(model, behavior, config.T, delta=delta,
                                 variant="offline", gamma=config.gamma, channel=channel)
    if algo == "explore":
        return run_exploratory_principal(model, behavior, config.T, delta=delta,
                                         c0=config.c0, gamma=config.gamma, channel=channel)
    if algo == "oracle-explore":
        return run_oracle_explore_principal(model, behavior, config.T, delta=delta,
                                            c0=config.c0, gamma=config.gamma, channel=channel)
    return run_linear_principal(model, behavior, config.T, delta=delta,
                                gamma=config.gamma, channel=channel,
                                n_samples=config.mc.get("n_samples", 4000),
                                kappa=config.mc.get("kappa", 0.05))


def summarize(transcript: Transcript, config: ExperimentConfig, seed: int) -> dict:
    eliminations = [{"phase": p.m, "eliminated": p.eliminated} for p in transcript.phases]
    return {
        "algorithm": config.algorithm,
        "T": config.T,
        "seed": seed,
        "gamma": config.gamma,
        "rounds": int(transcript.n),
        "regret_perround": transcript.total("perround"),
        "regret_oracle": transcript.total("oracle"),
        "regret_bar": transcript.total("bar"),
        "phases": len(transcript.phases),
        "eliminations": eliminations,
        "flags": list(transcript.flags),
    }


def run_experiment(config: ExperimentConfig, out_dir: str | None = None,
                   write_rounds: bool = True) -> list[dict]:
    """Run every seed; write per-round CSVs and a summary.jsonl; return summaries.

    Invalid configs are rejected up front; a mid-run invariant failure
    (degenerate/empty search body, stalled design) flags that run's summary
    instead of aborting the sweep.
    """
    out = out_dir or config.out
    summaries = []
    if out:
        os.makedirs(out, exist_ok=True)
        config.dump(os.path.join(out, "config.json"))
    for seed in config.seeds:
        try:
            transcript = run_single(config, seed)
        except ConfigError:
            raise
        except RuntimeError as exc:
            summaries.append({"algorithm": config.algorithm, "T": config.T,
                              "seed": seed, "gamma": config.gamma,
                              "failed": True,
                              "flags": [f"{type(exc).__name__}: {exc}"]})
            continue
        record = summarize(transcript, config, seed)
        summaries.append(record)
        if out and write_rounds:
            transcript.to_csv(os.path.join(out, f"rounds_T{config.T}_seed{seed}.csv"))
    if out:
        with open(os.path.join(out, "summary.jsonl"), "a") as fh:
            for record in summaries:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    return summaries


def run_sweep(config: ExperimentConfig, T_grid: list[int],
              out_dir: str | None = None, write_rounds: bool = False) -> list[dict]:
    """One summary row per (T, seed) over a horizon grid."""
    all_summaries = []
    for T in T_grid:
        cfg = ExperimentConfig.from_dict({**config.to_dict(), "T": int(T)})
        all_summaries.extend(run_experiment(cfg, out_dir=out_dir, write_rounds=write_rounds))
    return all_summaries


# ---------------------------------------------------------------------------
# Scaling reports
# ---------------------------------------------------------------------------


@dataclass
class ScalingReport:
    grid: list[int]
    mean_regret: list[float]
    normalized: list[float]          # mean regret / T^exponent
    raw_ratios: list[float]          # adjacent mean-regret ratios
    normalized_ratios: list[float]
    exponent: float
    mode: str

    @property
    def max_ratio(self) -> float:
        return max(self.raw_ratios) if self.raw_ratios else float("nan")

    @property
    def flagged(self) -> list[int]:
        """Grid indices whose normalized mean increased from the previous point."""
        return [i + 1 for i, r in enumerate(self.normalized_ratios) if r > 1.0 + 1e-9]

    def per_T_decreasing(self) -> bool:
        per_t = [r / t for r, t in zip(self.mean_regret, self.grid)]
        return all(b < a for a, b in zip(per_t, per_t[1:]))


def scaling_report(summaries: list[dict], exponent: float,
                   mode: str = "perround") -> ScalingReport:
    """Aggregate sweep summaries into per-grid-point means and adjacent ratios."""
    key = f"regret_{mode}"
    by_T: dict[int, list[float]] = {}
    for record in summaries:
        by_T.setdefault(int(record["T"]), []).append(float(record[key]))
    grid = sorted(by_T)
    if len(grid) < 2:
        raise ConfigError("scaling report needs at least two grid points")
    means = [float(np.mean(by_T[T])) for T in grid]
    normalized = [m / T ** exponent for m, T in zip(means, grid)]
    raw_ratios = [b / a for a, b in zip(means, means[1:])]
    norm_ratios = [b / a for a, b in zip(normalized, normalized[1:])]
    return ScalingReport(grid=grid, mean_regret=means, normalized=normalized,
                         raw_ratios=raw_ratios, normalized_ratios=norm_ratios,
                         exponent=exponent, mode=mode)


def load_summaries(path: str) -> list[dict]:
    """Read every summary.jsonl found at ``path`` (a file or a directory tree)."""
    records = []
    if os.path.isfile(path):
        files = [path]
    else:
        files = [os.path.join(root, name)
                 for root, _, names in os.walk(path)
                 for name in sorted(names) if name == "summary.jsonl"]
    for fname in files:
        with open(fname) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
    return records


# ---------------------------------------------------------------------------
# Schedule sizing helper
# ---------------------------------------------------------------------------


def pick_gamma_for_phases(K: int, T_smallest: int, delta: float, c0: float,
                          phases: int = 2, fill: float = 0.85) -> float:
    """Schedule multiplier under which the first ``phases`` phases of the
    exploration-robust principal fit inside ``T_smallest`` rounds.

    Accounts for search repeats, play targets (2*T_m per arm worst case) and
    vote rounds; the result is clamped to (0, 1].
    """
    n_search = search_repeats(T_smallest, delta)
    n_votes = vote_rounds(K, T_smallest, delta)
    search_rounds = phases * K * n_search * 2 * math.ceil(math.log2(T_smallest))
    vote_total = phases * K * n_votes
    budget = fill * T_smallest - search_rounds - vote_total
    if budget <= 0:
        raise ConfigError("horizon too small for even the search/vote overhead")
    raw = sum(explore_phase_length_raw(m, K, T_smallest, delta, c0)
              for m in range(1, phases + 1))
    gamma = budget / (2.0 * K * raw)
    return float(min(1.0, gamma))
