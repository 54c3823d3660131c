"""Instance-based learning engine.

Stored instances ``(state, action, value)`` are retrieved by similarity to
the current state and blended into an action-value estimate, which is a
Nadaraya-Watson kernel smoother with kernel ``exp(-mu * L1 / tau)``.
Activation has no base-level or noise term: relevance is purely the
matching score.

Two memory containers share the same arithmetic:

* :class:`DeclarativeMemory` holds one agent's instances and is convenient
  for inspection, dumps and tests;
* :class:`PopulationMemory` holds every agent's instances in dense arrays so
  a whole population can be queried in one vectorized call.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import expit

from .errors import ConfigurationError, EstimationError

__all__ = [
    "StateVector",
    "Instance",
    "DeclarativeMemory",
    "PopulationMemory",
    "PolicyParams",
    "MASK",
    "UNMASK",
    "BOUNDARY_STATES",
    "matching_score",
    "retrieval_probabilities",
    "blend",
    "select_action",
    "mask_probability",
    "learn",
    "seed_boundary_memory",
]

UNMASK = 0
MASK = 1


class StateVector(NamedTuple):
    """Observed proportions of masked neighbours, infected neighbours and
    infected population."""

    m_local: float
    i_local: float
    i_global: float

    def validate(self) -> "StateVector":
        if not all(0.0 <= x <= 1.0 for x in self):
            raise ValueError(f"state components must lie in [0, 1]: {tuple(self)}")
        return self


BOUNDARY_STATES = [StateVector(*map(float, s)) for s in itertools.product((0, 1), repeat=3)]


@dataclass(frozen=True)
class Instance:
    s: StateVector
    a: int
    q: float
    t: int = 0

    def __post_init__(self):
        if self.a not in (UNMASK, MASK):
            raise ValueError(f"action must be 0 or 1, got {self.a}")
        if not np.isfinite(self.q):
            raise ValueError("instance value must be finite")
        object.__setattr__(self, "s", StateVector(*map(float, self.s)))


@dataclass(frozen=True)
class PolicyParams:
    beta: float = 5.0
    gamma: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ConfigurationError(f"beta must be positive, got {self.beta}")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigurationError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must lie in (0, 1], got {self.alpha}")


def matching_score(s_query, s_stored, mu: float) -> float:
    """``-mu`` times the L1 distance between two states."""
    return -mu * float(np.abs(np.subtract(s_query, s_stored, dtype=float)).sum())


def retrieval_probabilities(activations, tau: float) -> np.ndarray:
    """Softmax of ``activations / tau`` (max-shifted)."""
    a = np.asarray(activations, dtype=float)
    if a.size == 0:
        raise ValueError("retrieval needs at least one activation")
    if not tau > 0:
        raise ValueError("tau must be positive")
    z = (a - a.max()) / tau
    e = np.exp(z)
    return e / e.sum()


@dataclass
class DeclarativeMemory:
    """One agent's instances.

    The first ``pinned`` instances (the boundary seeds) are never evicted.
    ``capacity`` bounds the total count; ``None`` means unlimited.
    """

    mu: float = 5.0
    tau: float = 0.25
    capacity: int | None = None
    instances: list[Instance] = field(default_factory=list)
    pinned: int = 0

    def __post_init__(self):
        if not (self.mu > 0 and self.tau > 0):
            raise ConfigurationError("mu and tau must be positive")
        if self.capacity is not None and self.capacity < 1:
            raise ConfigurationError("capacity must be positive")

    def __len__(self):
        return len(self.instances)

    def add(self, inst: Instance, pin: bool = False):
        if pin:
            if self.pinned != len(self.instances):
                raise ValueError("pinned instances must precede learned ones")
            self.instances.append(inst)
            self.pinned += 1
            return
        if self.capacity is not None and len(self.instances) >= self.capacity:
            if len(self.instances) <= self.pinned:
                raise ConfigurationError("capacity leaves no room beyond pinned instances")
            del self.instances[self.pinned]
        self.instances.append(inst)

    def arrays(self, action=None):
        insts = self.instances if action is None else [i for i in self.instances if i.a == action]
        s = np.array([i.s for i in insts], dtype=float).reshape(-1, 3)
        q = np.array([i.q for i in insts], dtype=float)
        return s, q

    def dumps(self) -> str:
        """JSON-lines snapshot: a header line, then one instance per line."""
        head = {"mu": self.mu, "tau": self.tau, "capacity": self.capacity, "pinned": self.pinned}
        lines = [json.dumps(head)]
        lines += [json.dumps({"s": list(i.s), "a": i.a, "q": i.q, "t": i.t}) for i in self.instances]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "DeclarativeMemory":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        head, body = rows[0], rows[1:]
        mem = cls(head["mu"], head["tau"], head["capacity"])
        for k, r in enumerate(body):
            mem.add(Instance(StateVector(*r["s"]), r["a"], r["q"], r["t"]), pin=k < head["pinned"])
        return mem


def blend(memory: DeclarativeMemory, s, a: int) -> float:
    """Retrieval-weighted mean value of the instances stored for action ``a``."""
    states, q = memory.arrays(a)
    if len(q) == 0:
        raise EstimationError(f"no instance stored for action {a}")
    act = -memory.mu * np.abs(states - np.asarray(s, dtype=float)).sum(axis=1)
    p = retrieval_probabilities(act, memory.tau)
    return float(p @ q)


def mask_probability(q_mask, q_unmask, beta: float):
    """Boltzmann probability of masking for two action values."""
    return expit(beta * (np.asarray(q_mask, float) - np.asarray(q_unmask, float)))


def select_action(q_mask, q_unmask, beta: float, rng):
    """Sample mask (1) or unmask (0) from the Boltzmann policy.

    Accepts scalars or equal-length arrays (one decision per element).
    """
    p = mask_probability(q_mask, q_unmask, beta)
    draw = rng.random(np.shape(p))
    out = (draw < p).astype(np.int8)
    return int(out) if out.ndim == 0 else out


def learn(memory: DeclarativeMemory, s, a: int, r: float, s_next, params: PolicyParams, t: int = 0):
    """Store a new instance whose value moves toward the one-step target."""
    if params.gamma > 0:
        if s_next is None:
            raise ValueError("discounted learning needs the next state")
        target = r + params.gamma * max(blend(memory, s_next, UNMASK), blend(memory, s_next, MASK))
    else:
        target = r
    if params.alpha == 1.0:
        q_new = target
    else:
        q_prior = blend(memory, s, a)
        q_new = q_prior + params.alpha * (target - q_prior)
    memory.add(Instance(StateVector(*map(float, s)), int(a), float(q_new), t))
    return memory


def seed_boundary_memory(
    reward_fn: Callable, mu: float = 5.0, tau: float = 0.25, capacity: int | None = None
) -> DeclarativeMemory:
    """Memory pre-loaded with ``reward_fn(s, a)`` at every corner of the
    unit state cube for both actions; these 16 instances are pinned."""
    mem = DeclarativeMemory(mu, tau, capacity)
    if capacity is not None and capacity <= 2 * len(BOUNDARY_STATES):
        raise ConfigurationError("capacity must exceed the 16 pinned boundary instances")
    for s in BOUNDARY_STATES:
        for a in (UNMASK, MASK):
            mem.add(Instance(s, a, float(reward_fn(s, a)), 0), pin=True)
    return mem


class PopulationMemory:
    """Instances of ``n`` agents in dense arrays.

    All agents store one instance per learning step, so every agent holds
    the same number of instances and column ``k`` is each agent's ``k``-th
    instance. Columns ``0..pinned-1`` are shared boundary seeds.
    """

    def __init__(self, n_agents: int, mu=5.0, tau=0.25, capacity=None):
        if not (mu > 0 and tau > 0):
            raise ConfigurationError("mu and tau must be positive")
        self.n = int(n_agents)
        self.mu, self.tau, self.capacity = float(mu), float(tau), capacity
        alloc = 64 if capacity is None else capacity
        self.states = np.zeros((self.n, alloc, 3))
        self.actions = np.zeros((self.n, alloc), dtype=np.int8)
        self.q = np.zeros((self.n, alloc))
        self.t = np.zeros(alloc, dtype=np.int64)
        self.size = 0
        self.pinned = 0

    @classmethod
    def seeded(cls, n_agents, reward_fn, mu=5.0, tau=0.25, capacity=None):
        if capacity is not None and capacity <= 2 * len(BOUNDARY_STATES):
            raise ConfigurationError("capacity must exceed the 16 pinned boundary instances")
        mem = cls(n_agents, mu, tau, capacity)
        for s in BOUNDARY_STATES:
            for a in (UNMASK, MASK):
                q = float(reward_fn(s, a))
                mem._append(np.broadcast_to(s, (mem.n, 3)), np.full(mem.n, a), np.full(mem.n, q), 0)
        mem.pinned = mem.size
        return mem

    def _grow(self):
        extra = self.states.shape[1]
        self.states = np.concatenate([self.states, np.zeros((self.n, extra, 3))], axis=1)
        self.actions = np.concatenate([self.actions, np.zeros((self.n, extra), np.int8)], axis=1)
        self.q = np.concatenate([self.q, np.zeros((self.n, extra))], axis=1)
        self.t = np.concatenate([self.t, np.zeros(extra, np.int64)])

    def _append(self, states, actions, q, t):
        if self.capacity is not None and self.size >= self.capacity:
            k = self.pinned
            for arr in (self.states, self.actions, self.q):
                arr[:, k:-1] = arr[:, k + 1 :]
            self.t[k:-1] = self.t[k + 1 :]
            self.size -= 1
        elif self.size >= self.states.shape[1]:
            self._grow()
        j = self.size
        self.states[:, j] = states
        self.actions[:, j] = actions
        self.q[:, j] = q
        self.t[j] = t
        self.size += 1

    def blend(self, s, action: int) -> np.ndarray:
        """Blended value of ``action`` for every agent; ``s`` has shape (n, 3)."""
        k = self.size
        s = np.asarray(s, dtype=float)
        dist = np.abs(self.states[:, :k] - s[:, None, :]).sum(axis=2)
        z = np.where(self.actions[:, :k] == action, -self.mu * dist / self.tau, -np.inf)
        z -= z.max(axis=1, keepdims=True)
        w = np.exp(z)
        return (w * self.q[:, :k]).sum(axis=1) / w.sum(axis=1)

    def learn(self, s, a, r, s_next, params: PolicyParams, t: int = 0):
        """Vectorized :func:`learn` for all agents at once."""
        s = np.asarray(s, dtype=float)
        a = np.asarray(a, dtype=np.int8)
        r = np.asarray(r, dtype=float)
        if params.gamma > 0:
            if s_next is None:
                raise ValueError("discounted learning needs the next state")
            best = np.maximum(self.blend(s_next, UNMASK), self.blend(s_next, MASK))
            target = r + params.gamma * best
        else:
            target = r
        if params.alpha == 1.0:
            q_new = target
        else:
            prior = np.where(a == MASK, self.blend(s, MASK), self.blend(s, UNMASK))
            q_new = prior + params.alpha * (target - prior)
        self._append(s, a, q_new, t)

    def agent(self, i: int) -> DeclarativeMemory:
        """Copy of one agent's instances as a :class:`DeclarativeMemory`."""
        mem = DeclarativeMemory(self.mu, self.tau, self.capacity)
        for k in range(self.size):
            inst = Instance(StateVector(*self.states[i, k]), int(self.actions[i, k]), float(self.q[i, k]), int(self.t[k]))
            mem.add(inst, pin=k < self.pinned)
        return mem
