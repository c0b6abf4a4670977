"""Interaction channel: the only surface between a principal and the world.

A channel accepts one incentive vector per call, advances the global round by
exactly one, and reports the observed arm.  It also exposes the principal's
public side information (play counts, reward estimates, horizon).
"""

from __future__ import annotations

from typing import Callable, Protocol, Sequence

import numpy as np


class HorizonExhausted(Exception):
    """The global horizon was reached mid-interaction; the caller must unwind."""


class InteractionChannel(Protocol):
    K: int
    T: int
    block: str
    phase: int

    def propose(self, incentive: np.ndarray, target: int = -1) -> int: ...

    @property
    def counts(self) -> np.ndarray: ...

    @property
    def rounds_used(self) -> int: ...

    @property
    def remaining(self) -> int: ...


class ScriptedChannel:
    """A channel whose answers come from a script instead of an agent.

    ``script`` is either a sequence of arms (consumed in order, repeating the
    last entry when exhausted) or a callable ``(incentive, round) -> arm``.
    Play counts can be pinned for exercising count-dependent exit formulas.
    """

    def __init__(self, K: int, T: int,
                 script: Sequence[int] | Callable[[np.ndarray, int], int],
                 counts: np.ndarray | None = None,
                 track_counts: bool = False):
        self.K = K
        self.T = T
        self.block = "scripted"
        self.phase = 0
        self._script = script
        self._t = 0
        self._track = track_counts
        self._counts = np.zeros(K, dtype=np.int64) if counts is None else np.asarray(counts, dtype=np.int64).copy()
        self.history: list[tuple[np.ndarray, int]] = []

    def propose(self, incentive: np.ndarray, target: int = -1) -> int:
        if self._t >= self.T:
            raise HorizonExhausted()
        if callable(self._script):
            arm = int(self._script(incentive, self._t + 1))
        else:
            idx = min(self._t, len(self._script) - 1)
            arm = int(self._script[idx])
        self._t += 1
        if self._track:
            self._counts[arm] += 1
        self.history.append((np.asarray(incentive).copy(), arm))
        return arm

    @property
    def counts(self) -> np.ndarray:
        return self._counts

    @property
    def rounds_used(self) -> int:
        return self._t

    @property
    def remaining(self) -> int:
        return self.T - self._t
