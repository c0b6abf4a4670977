"""Named, splittable random streams.

Every run derives four independent generators from (master seed, run id,
stream name), so changing e.g. the Monte Carlo sample count never perturbs
the agent's reward draws.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

STREAM_NAMES = ("agent-noise", "principal-noise", "agent-explore", "mc-geometry")


def _stream_tag(name: str) -> int:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream_rng(master_seed: int, run_id: int, name: str) -> np.random.Generator:
    """Generator for one named stream of one run, stable across platforms."""
    seq = np.random.SeedSequence([int(master_seed), int(run_id), _stream_tag(name)])
    return np.random.default_rng(seq)


@dataclass
class RngStreams:
    agent_noise: np.random.Generator
    principal_noise: np.random.Generator
    agent_explore: np.random.Generator
    mc_geometry: np.random.Generator


def make_streams(master_seed: int, run_id: int = 0) -> RngStreams:
    return RngStreams(
        agent_noise=stream_rng(master_seed, run_id, "agent-noise"),
        principal_noise=stream_rng(master_seed, run_id, "principal-noise"),
        agent_explore=stream_rng(master_seed, run_id, "agent-explore"),
        mc_geometry=stream_rng(master_seed, run_id, "mc-geometry"),
    )
