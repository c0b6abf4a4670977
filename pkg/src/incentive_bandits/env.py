"""Reward models and agent behaviors.

This is the only module that reads ground-truth means or the agent's private
empirical state.  Principals interact with agents exclusively through an
interaction channel (see :mod:`incentive_bandits.game`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

# Score ties below this absolute gap are broken by the configured tie rule
# rather than by floating-point accidents.
TIE_EPS = 1e-9

BehaviorKind = Literal["greedy-learner", "exploratory-learner", "oracle", "exploratory-oracle"]
ExplorePolicy = Literal["uniform", "fixed-arm", "adversarial-lowest-joint-mean"]
TieRule = Literal["lowest-index", "highest-index"]


class ConfigError(ValueError):
    """Raised when an environment/agent/principal combination is invalid."""


# ---------------------------------------------------------------------------
# Arm sets and reward models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArmSet:
    """A fixed set of K arms, either abstract indices (iid) or unit-ball vectors."""

    kind: Literal["iid", "linear"]
    K: int
    features: np.ndarray | None = None  # (K, d), only for linear

    def __post_init__(self):
        if self.K < 2:
            raise ConfigError("need at least two arms")
        if self.kind == "linear":
            feats = np.asarray(self.features, dtype=float)
            if feats.ndim != 2 or feats.shape[0] != self.K:
                raise ConfigError("features must be a (K, d) array")
            norms = np.linalg.norm(feats, axis=1)
            if np.any(norms > 1.0 + 1e-12):
                raise ConfigError("every arm feature must have norm <= 1")
            if np.linalg.matrix_rank(feats) < feats.shape[1]:
                raise ConfigError("arm features must span R^d")
            object.__setattr__(self, "features", feats)
        elif self.features is not None:
            raise ConfigError("iid arm sets carry no features")

    @property
    def d(self) -> int:
        if self.features is None:
            raise ConfigError("iid arm set has no dimension")
        return self.features.shape[1]

    @staticmethod
    def iid(K: int) -> "ArmSet":
        return ArmSet(kind="iid", K=K)

    @staticmethod
    def linear(features) -> "ArmSet":
        feats = np.asarray(features, dtype=float)
        return ArmSet(kind="linear", K=feats.shape[0], features=feats)


@dataclass(frozen=True)
class Distribution:
    """A [0,1]-supported reward distribution: bernoulli, uniform interval, or point mass."""

    kind: Literal["bernoulli", "uniform", "point"]
    a: float
    b: float = 0.0

    def __post_init__(self):
        if self.kind == "bernoulli":
            if not 0.0 <= self.a <= 1.0:
                raise ConfigError("bernoulli mean must lie in [0,1]")
        elif self.kind == "uniform":
            if not (0.0 <= self.a <= self.b <= 1.0):
                raise ConfigError("uniform support must satisfy 0 <= lo <= hi <= 1")
        elif self.kind == "point":
            if not 0.0 <= self.a <= 1.0:
                raise ConfigError("point mass must lie in [0,1]")
        else:
            raise ConfigError(f"unknown distribution kind {self.kind!r}")

    @property
    def mean(self) -> float:
        if self.kind == "uniform":
            return 0.5 * (self.a + self.b)
        return self.a

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == "bernoulli":
            return 1.0 if rng.random() < self.a else 0.0
        if self.kind == "uniform":
            return self.a + (self.b - self.a) * rng.random()
        return self.a

    @staticmethod
    def bernoulli(mean: float) -> "Distribution":
        return Distribution("bernoulli", float(mean))

    @staticmethod
    def uniform(lo: float, hi: float) -> "Distribution":
        return Distribution("uniform", float(lo), float(hi))

    @staticmethod
    def point(value: float) -> "Distribution":
        return Distribution("point", float(value))


@dataclass
class RewardModel:
    """Ground truth: per-arm reward distributions (iid) or (s*, nu*) with noise (linear)."""

    arms: ArmSet
    principal_dists: list[Distribution] | None = None
    agent_dists: list[Distribution] | None = None
    nu_star: np.ndarray | None = None
    s_star: np.ndarray | None = None
    principal_noise: float = 0.0  # Gaussian sigma, 0 <= sigma <= 1
    agent_noise: float = 0.0
    _theta: np.ndarray = field(init=False, repr=False, default=None)
    _mu: np.ndarray = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if self.arms.kind == "iid":
            if self.principal_dists is None or self.agent_dists is None:
                raise ConfigError("iid model needs principal and agent distributions")
            if len(self.principal_dists) != self.arms.K or len(self.agent_dists) != self.arms.K:
                raise ConfigError("need one distribution per arm on each side")
            self._theta = np.array([d.mean for d in self.principal_dists])
            self._mu = np.array([d.mean for d in self.agent_dists])
        else:
            self.nu_star = np.asarray(self.nu_star, dtype=float)
            self.s_star = np.asarray(self.s_star, dtype=float)
            if np.linalg.norm(self.nu_star) > 1.0 + 1e-12 or np.linalg.norm(self.s_star) > 1.0 + 1e-12:
                raise ConfigError("s* and nu* must lie in the unit ball")
            if not (0.0 <= self.agent_noise <= 1.0 and 0.0 <= self.principal_noise <= 1.0):
                raise ConfigError("noise sigma must lie in [0,1] (conditionally 1-subgaussian)")
            self._theta = self.arms.features @ self.nu_star
            self._mu = self.arms.features @ self.s_star

    def theta(self) -> np.ndarray:
        """True per-arm principal means."""
        return self._theta

    def mu(self) -> np.ndarray:
        """True per-arm agent means."""
        return self._mu

    @property
    def is_deterministic(self) -> bool:
        """True when every reward draw is its mean (point masses / zero noise)."""
        if self.arms.kind == "iid":
            return all(d.kind == "point" for d in self.principal_dists + self.agent_dists)
        return self.agent_noise == 0.0 and self.principal_noise == 0.0

    @staticmethod
    def iid(principal_dists, agent_dists) -> "RewardModel":
        return RewardModel(ArmSet.iid(len(principal_dists)),
                           principal_dists=list(principal_dists), agent_dists=list(agent_dists))

    @staticmethod
    def bernoulli(theta, mu) -> "RewardModel":
        return RewardModel.iid([Distribution.bernoulli(t) for t in theta],
                               [Distribution.bernoulli(m) for m in mu])

    @staticmethod
    def point(theta, mu) -> "RewardModel":
        return RewardModel.iid([Distribution.point(t) for t in theta],
                               [Distribution.point(m) for m in mu])

    @staticmethod
    def linear(arms: ArmSet, s_star, nu_star, agent_noise: float = 0.0,
               principal_noise: float = 0.0) -> "RewardModel":
        return RewardModel(arms, nu_star=nu_star, s_star=s_star,
                           agent_noise=agent_noise, principal_noise=principal_noise)


def sample_rewards(model: RewardModel, arm: int,
                   rng: np.random.Generator,
                   principal_rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Draw (principal reward X, agent reward R) for one play of ``arm``.

    ``rng`` drives the agent-side draw; ``principal_rng`` (defaulting to
    ``rng``) drives the principal-side draw so the two sides can live on
    separate named streams.
    """
    if not 0 <= arm < model.arms.K:
        raise IndexError(f"arm {arm} out of range")
    prng = rng if principal_rng is None else principal_rng
    if model.arms.kind == "iid":
        x = model.principal_dists[arm].sample(prng)
        r = model.agent_dists[arm].sample(rng)
        return x, r
    a = model.arms.features[arm]
    x = float(a @ model.nu_star)
    r = float(a @ model.s_star)
    if model.principal_noise > 0.0:
        x += model.principal_noise * prng.standard_normal()
    if model.agent_noise > 0.0:
        r += model.agent_noise * rng.standard_normal()
    return x, r


# ---------------------------------------------------------------------------
# Agent state
# ---------------------------------------------------------------------------

# Directions with singular value below this relative cutoff are zeroed when
# solving the least-squares system (minimum-norm convention).
PINV_RCOND = 1e-10

# Closed-form rank-one inverse updates drift; refresh from scratch periodically.
_INV_REFRESH = 4096


class AgentState:
    """The agent's private learning state.

    iid: play counts, reward sums and an (additive) initial empirical mean,
    with mean formula ``(mu0 + sum) / max(1, N)``.

    linear: accumulated Gram matrix and response vector; the estimate is the
    minimum-norm least-squares solution, kept incrementally via rank-one
    inverse updates once the Gram matrix is full rank.
    """

    __slots__ = ("arms", "counts", "sums", "mu0", "_mu_hat",
                 "gram", "resp", "s_init", "_s_hat", "_gram_inv", "_updates")

    def __init__(self, arms: ArmSet, initial_means=None, s_init=None):
        self.arms = arms
        K = arms.K
        if arms.kind == "iid":
            self.counts = np.zeros(K, dtype=np.int64)
            self.sums = np.zeros(K)
            if initial_means is None:
                self.mu0 = np.zeros(K)
            else:
                self.mu0 = np.asarray(initial_means, dtype=float).copy()
                if np.any(self.mu0 < 0) or np.any(self.mu0 > 1):
                    raise ConfigError("initial empirical means must lie in [0,1]")
            self._mu_hat = self.mu0.copy()
        else:
            d = arms.d
            self.gram = np.zeros((d, d))
            self.resp = np.zeros(d)
            if s_init is None:
                self.s_init = np.zeros(d)
            else:
                self.s_init = np.asarray(s_init, dtype=float).copy()
                if np.linalg.norm(self.s_init) > 1.0 + 1e-12:
                    raise ConfigError("initial estimate must lie in the unit ball")
            self._s_hat = self.s_init.copy()
            self._gram_inv = None
            self._updates = 0

    @property
    def s_hat(self) -> np.ndarray:
        return self._s_hat

    def empirical_means(self) -> np.ndarray:
        """Current per-arm empirical means (a live buffer; copy before storing)."""
        if self.arms.kind == "iid":
            return self._mu_hat
        return self.arms.features @ self._s_hat


def agent_update(state: AgentState, arm: int, reward: float) -> AgentState:
    """Fold one observed reward for ``arm`` into the agent's state."""
    if state.arms.kind == "iid":
        state.counts[arm] += 1
        state.sums[arm] += reward
        state._mu_hat[arm] = (state.mu0[arm] + state.sums[arm]) / state.counts[arm]
        return state
    a = state.arms.features[arm]
    state.gram += np.outer(a, a)
    state.resp += reward * a
    state._updates += 1
    if state._gram_inv is not None and state._updates % _INV_REFRESH != 0:
        gi = state._gram_inv
        u = gi @ a
        state._gram_inv = gi - np.outer(u, u) / (1.0 + a @ u)
        state._s_hat = state._gram_inv @ state.resp
    else:
        # Not yet full rank (or scheduled refresh): solve from scratch.
        if np.linalg.matrix_rank(state.gram, tol=None) == state.arms.d:
            state._gram_inv = np.linalg.inv(state.gram)
            state._s_hat = state._gram_inv @ state.resp
        else:
            state._gram_inv = None
            state._s_hat = np.linalg.pinv(state.gram, rcond=PINV_RCOND) @ state.resp
    return state


# ---------------------------------------------------------------------------
# Behaviors and arm selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AgentBehavior:
    """How the agent maps (state, incentive) to a chosen arm.

    Exploratory kinds deviate from the score maximizer with probability at
    most ``c0 * sqrt(log(2t)/t)`` once ``t`` reaches the threshold ``tau``;
    before that, exploration is disabled.  Oracle kinds score arms by true
    means instead of empirical ones.
    """

    kind: BehaviorKind = "greedy-learner"
    c0: float = 0.0
    explore_policy: ExplorePolicy = "uniform"
    explore_arm: int = 0
    tie_rule: TieRule = "lowest-index"
    _tau: int = field(init=False, repr=False, compare=False, default=2)

    def __post_init__(self):
        if self.c0 < 0:
            raise ConfigError("c0 must be nonnegative")
        if not self.explores and self.c0 != 0.0:
            raise ConfigError("non-exploratory kinds cannot carry c0 > 0")
        t = 2
        while self.c0 * math.sqrt(math.log(2 * t)) >= math.sqrt(t):
            t += 1
        object.__setattr__(self, "_tau", t)

    @property
    def explores(self) -> bool:
        return self.kind in ("exploratory-learner", "exploratory-oracle")

    @property
    def is_oracle(self) -> bool:
        return self.kind in ("oracle", "exploratory-oracle")

    @property
    def tau(self) -> int:
        """Smallest integer t >= 2 with c0 * sqrt(log(2t)) < sqrt(t), by linear scan."""
        return self._tau

    def explore_probability(self, t: int) -> float:
        if not self.explores or t < self.tau:
            return 0.0
        return min(1.0, self.c0 * math.sqrt(math.log(2.0 * t) / t))


def argmax_with_ties(scores: np.ndarray, tie_rule: TieRule = "lowest-index") -> int:
    """Index of the maximal score; near-ties resolved by the tie rule."""
    top = scores.max()
    tied = scores >= top - TIE_EPS
    if tie_rule == "lowest-index":
        return int(np.argmax(tied))
    return int(len(scores) - 1 - np.argmax(tied[::-1]))


def agent_select(state: AgentState, behavior: AgentBehavior, incentive: np.ndarray,
                 t: int, rng: np.random.Generator,
                 true_means: np.ndarray | None = None) -> tuple[int, bool]:
    """One arm choice at round ``t``; returns (arm, explored flag).

    Oracle kinds require ``true_means``.  Exploration, when drawn, follows the
    behavior's exploration-arm policy (the adversarial policy must have been
    resolved into a fixed arm index beforehand, see :func:`resolve_behavior`).
    """
    if behavior.explores and t >= behavior.tau:
        p = min(1.0, behavior.c0 * math.sqrt(math.log(2.0 * t) / t))
        if rng.random() < p:
            if behavior.explore_policy == "uniform":
                return int(rng.integers(state.arms.K)), True
            return behavior.explore_arm, True
    if behavior.is_oracle:
        if true_means is None:
            raise ConfigError("oracle behaviors need the true means")
        means = true_means
    else:
        means = state.empirical_means()
    return argmax_with_ties(means + incentive, behavior.tie_rule), False


def resolve_behavior(behavior: AgentBehavior, model: RewardModel) -> AgentBehavior:
    """Pin the adversarial exploration policy to argmin of theta+mu for this model."""
    if behavior.explore_policy == "adversarial-lowest-joint-mean":
        worst = int(np.argmin(model.theta() + model.mu()))
        return AgentBehavior(kind=behavior.kind, c0=behavior.c0,
                             explore_policy="fixed-arm", explore_arm=worst,
                             tie_rule=behavior.tie_rule)
    return behavior


# ---------------------------------------------------------------------------
# Incentives
# ---------------------------------------------------------------------------


def one_hot_incentive(arm: int, c: float, K: int) -> np.ndarray:
    """Incentive vector paying ``c`` on ``arm`` and zero elsewhere."""
    if not 0 <= arm < K:
        raise IndexError(f"arm {arm} out of range for K={K}")
    if c <= 0:
        raise ValueError("one-hot incentive must be strictly positive")
    v = np.zeros(K)
    v[arm] = c
    return v


def optimal_incentive(state: AgentState, arm: int) -> float:
    """Minimum payment making ``arm`` the agent's empirical maximizer (harness-only)."""
    means = state.empirical_means()
    if not 0 <= arm < len(means):
        raise IndexError(f"arm {arm} out of range")
    return float(means.max() - means[arm])


def optimal_incentive_from_means(means: np.ndarray, arm: int) -> float:
    return float(np.max(means) - means[arm])
