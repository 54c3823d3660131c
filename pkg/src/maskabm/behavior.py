"""Masking behaviour: observations, intrinsic reward and weekly decisions."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .cogibl import MASK, UNMASK, PolicyParams, PopulationMemory, StateVector, select_action
from .epidemic import Health, State, is_infectious
from .errors import ConfigurationError
from .graph import ContactGraph

__all__ = [
    "RewardWeights",
    "BehaviorSchedule",
    "VISIBILITY",
    "visible_infected",
    "observe",
    "observe_all",
    "reward",
    "MaskingAgents",
    "decision_epoch",
]

VISIBILITY = ("symptomatic", "infectious")


@dataclass(frozen=True)
class RewardWeights:
    """Weights of discomfort (w1), conformity (w2) and risk reduction (w3).

    ``c`` is the weight of local versus global infection in the risk term
    and ``mf`` the residual transmission when masked. ``rr_as_written``
    switches the risk term to ``c * i_local + (1 - c * i_global)``.
    """

    w1: float = 0.5
    w2: float = 0.5
    w3: float = 7.5
    c: float = 0.8
    mf: float = 0.2
    rr_as_written: bool = False

    def __post_init__(self):
        for name in ("w1", "w2", "w3"):
            if not getattr(self, name) >= 0:
                raise ConfigurationError(f"{name} must be nonnegative, got {getattr(self, name)}")
        for name in ("c", "mf"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {getattr(self, name)}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class BehaviorSchedule:
    decision_period: int = 7

    def __post_init__(self):
        if self.decision_period < 1:
            raise ConfigurationError("decision_period must be at least one day")

    def is_decision_day(self, day: int) -> bool:
        return day % self.decision_period == 0


def visible_infected(health: Health, visibility: str = "symptomatic") -> np.ndarray:
    if visibility == "symptomatic":
        return health.state == State.SYMPTOMATIC
    if visibility == "infectious":
        return is_infectious(health.state)
    raise ConfigurationError(f"visibility must be one of {VISIBILITY}, got {visibility!r}")


def observe_all(g: ContactGraph, health: Health, masks, visibility: str = "symptomatic") -> np.ndarray:
    """Observation of every agent as an ``(n, 3)`` array.

    Agents without neighbours see zero local masking and infection.
    """
    n = g.n_nodes
    vis = visible_infected(health, visibility).astype(float)
    a = g.indicator
    deg = np.asarray(g.degree, dtype=float)
    safe = np.where(deg > 0, deg, 1.0)
    out = np.empty((n, 3))
    out[:, 0] = (a @ np.asarray(masks, dtype=float)) / safe
    out[:, 1] = (a @ vis) / safe
    out[:, 2] = vis.sum() / n if n else 0.0
    return out


def observe(agent_id: int, g: ContactGraph, health: Health, masks, visibility: str = "symptomatic") -> StateVector:
    nbrs = g.neighbors(agent_id)
    vis = visible_infected(health, visibility)
    i_global = float(vis.mean()) if len(vis) else 0.0
    if len(nbrs) == 0:
        return StateVector(0.0, 0.0, i_global)
    masks = np.asarray(masks, dtype=bool)
    return StateVector(float(masks[nbrs].mean()), float(vis[nbrs].mean()), i_global)


def reward(s, a, w: RewardWeights):
    """Intrinsic utility of action ``a`` (1 = mask) in state ``s``.

    ``-w1 * a + w2 * (1 - |a - m_local|) + w3 * a * (1 - mf) * risk``, where
    risk blends local and global infection with weight ``c``. Works on a
    single state or on ``(n, 3)`` arrays with matching action arrays.
    """
    s = np.asarray(s, dtype=float)
    m, il, ig = s[..., 0], s[..., 1], s[..., 2]
    a = np.asarray(a, dtype=float)
    discomfort = a
    conformity = 1.0 - np.abs(a - m)
    if w.rr_as_written:
        risk = w.c * il + (1.0 - w.c * ig)
    else:
        risk = w.c * il + (1.0 - w.c) * ig
    risk_reduction = a * (1.0 - w.mf) * risk
    r = -w.w1 * discomfort + w.w2 * conformity + w.w3 * risk_reduction
    return float(r) if np.ndim(r) == 0 else r


class MaskingAgents:
    """The population's cognition: memories plus the weekly decision rule.

    In discounted mode (``gamma > 0``) the instance for an epoch is stored at
    the next epoch, once the next state is known.
    """

    def __init__(
        self,
        n: int,
        weights: RewardWeights = RewardWeights(),
        policy: PolicyParams = PolicyParams(),
        mu: float = 5.0,
        tau: float = 0.25,
        capacity: int | None = None,
        visibility: str = "symptomatic",
    ):
        if visibility not in VISIBILITY:
            raise ConfigurationError(f"visibility must be one of {VISIBILITY}")
        self.weights, self.policy, self.visibility = weights, policy, visibility
        self.memory = PopulationMemory.seeded(
            n, lambda s, a: reward(s, a, weights), mu, tau, capacity
        )
        self.pending = None
        self.epoch = 0
        self.last_state = None
        self.last_reward = None

    def decide(self, g: ContactGraph, health: Health, masks, rng, t: int = 0) -> np.ndarray:
        """Run one decision epoch and return the new mask vector."""
        s = observe_all(g, health, masks, self.visibility)
        q_mask = self.memory.blend(s, MASK)
        q_unmask = self.memory.blend(s, UNMASK)
        actions = select_action(q_mask, q_unmask, self.policy.beta, rng)
        new_masks = actions.astype(bool)

        s_post = observe_all(g, health, new_masks, self.visibility)
        r = reward(s_post, actions, self.weights)
        if self.policy.gamma > 0:
            if self.pending is not None:
                ps, pa, pr = self.pending
                self.memory.learn(ps, pa, pr, s, self.policy, t)
            self.pending = (s, actions, r)
        else:
            self.memory.learn(s, actions, r, None, self.policy, t)
        self.last_state, self.last_reward = s, r
        self.epoch += 1
        return new_masks


def decision_epoch(agents: MaskingAgents, g: ContactGraph, health: Health, masks, rng, t: int = 0):
    return agents.decide(g, health, masks, rng, t)
