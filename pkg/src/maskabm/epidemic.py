"""Daily-timestep SEIR dynamics on a contact network plus random mixing.

Transmission happens along network edges and through a random-mixing
channel that carries a fixed share of R0. Masks attenuate both channels.
All updates within a day are synchronous: transmission and progression are
computed from a snapshot of the day's starting states.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import IntEnum

import numpy as np

from .errors import ConfigurationError
from .graph import ContactGraph
from .rng import as_generator

__all__ = [
    "State",
    "DiseaseParams",
    "Health",
    "INFECTIOUS",
    "seed_outbreak",
    "transmission_multiplier",
    "step_day",
    "compartment_counts",
    "LEGAL_TRANSITIONS",
]


class State(IntEnum):
    SUSCEPTIBLE = 0
    EXPOSED = 1
    PRESYMPTOMATIC = 2
    SYMPTOMATIC = 3
    ASYMPTOMATIC = 4
    RECOVERED = 5


INFECTIOUS = (State.PRESYMPTOMATIC, State.SYMPTOMATIC, State.ASYMPTOMATIC)

LEGAL_TRANSITIONS = {
    State.SUSCEPTIBLE: {State.SUSCEPTIBLE, State.EXPOSED},
    State.EXPOSED: {State.EXPOSED, State.PRESYMPTOMATIC},
    State.PRESYMPTOMATIC: {State.PRESYMPTOMATIC, State.SYMPTOMATIC, State.ASYMPTOMATIC},
    State.SYMPTOMATIC: {State.SYMPTOMATIC, State.RECOVERED},
    State.ASYMPTOMATIC: {State.ASYMPTOMATIC, State.RECOVERED},
    State.RECOVERED: {State.RECOVERED, State.SUSCEPTIBLE},
}


@dataclass(frozen=True)
class DiseaseParams:
    """Disease natural history and spread parameters.

    Durations are means of geometric distributions, except immunity which is
    a fixed countdown unless ``geometric_immunity`` is set.
    """

    mean_exposed_days: float = 2.0
    mean_presymp_days: float = 3.0
    mean_symp_days: float = 8.0
    mean_asymp_days: float = 8.0
    immunity_days: int = 75
    p_asymptomatic: float = 0.2
    r0: float = 5.0
    mix_fraction: float = 0.2
    initial_exposed_fraction: float = 0.01
    masking_effectiveness: float = 0.8
    geometric_immunity: bool = False

    def __post_init__(self):
        for name in ("mean_exposed_days", "mean_presymp_days", "mean_symp_days", "mean_asymp_days"):
            if not getattr(self, name) >= 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not self.immunity_days >= 1:
            raise ConfigurationError(f"immunity_days must be >= 1, got {self.immunity_days}")
        for name in ("p_asymptomatic", "mix_fraction", "initial_exposed_fraction", "masking_effectiveness"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {val}")
        if not self.r0 > 0:
            raise ConfigurationError(f"r0 must be positive, got {self.r0}")

    @property
    def infectious_days(self) -> float:
        """Expected number of infectious days per infection."""
        p = self.p_asymptomatic
        return self.mean_presymp_days + p * self.mean_asymp_days + (1 - p) * self.mean_symp_days

    @property
    def mixing_rate(self) -> float:
        """Random-mixing infections per infectious person-day."""
        return self.mix_fraction * self.r0 / self.infectious_days

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Health:
    """Per-agent compartment and remaining immunity days."""

    state: np.ndarray
    immunity_left: np.ndarray = field(default=None)

    def __post_init__(self):
        self.state = np.asarray(self.state, dtype=np.int8)
        if self.immunity_left is None:
            self.immunity_left = np.zeros(len(self.state), dtype=np.int16)
        else:
            self.immunity_left = np.asarray(self.immunity_left, dtype=np.int16)
        if self.immunity_left.shape != self.state.shape:
            raise ValueError("state and immunity_left must have the same length")

    def __len__(self):
        return len(self.state)

    @classmethod
    def susceptible(cls, n: int) -> "Health":
        return cls(np.zeros(n, dtype=np.int8))

    def copy(self) -> "Health":
        return Health(self.state.copy(), self.immunity_left.copy())

    @property
    def infectious(self) -> np.ndarray:
        return is_infectious(self.state)


def is_infectious(state) -> np.ndarray:
    state = np.asarray(state)
    return (state >= State.PRESYMPTOMATIC) & (state <= State.ASYMPTOMATIC)


def compartment_counts(health: Health) -> np.ndarray:
    """Counts per :class:`State`, in enum order."""
    return np.bincount(health.state, minlength=len(State))


def seed_outbreak(n: int, params: DiseaseParams, seed) -> Health:
    """Expose ``round(fraction * n)`` agents (halves round up)."""
    if n < 1:
        raise ConfigurationError("population must have at least one agent")
    k = int(np.floor(params.initial_exposed_fraction * n + 0.5))
    health = Health.susceptible(n)
    idx = as_generator(seed).choice(n, size=k, replace=False)
    health.state[idx] = State.EXPOSED
    return health


def transmission_multiplier(masked_src, masked_dst, effectiveness: float):
    """``(1 - e) ** k`` where ``k`` counts masked endpoints."""
    k = np.asarray(masked_src, dtype=np.int64) + np.asarray(masked_dst, dtype=np.int64)
    out = (1.0 - effectiveness) ** k
    return float(out) if np.ndim(out) == 0 else out


def _network_infections(health_state, infectious, masks, g, params, draws):
    sus = health_state == State.SUSCEPTIBLE
    u, v = g.u, g.v
    fwd = infectious[u] & sus[v]
    bwd = infectious[v] & sus[u]
    live = fwd | bwd
    p = g.weight * transmission_multiplier(masks[u], masks[v], params.masking_effectiveness)
    fired = live & (draws < p)
    targets = np.where(fwd[fired], v[fired], u[fired])
    return targets


def _mixing_infections(health_state, infectious, masks, params, rng):
    n = len(health_state)
    e = params.masking_effectiveness
    attenuation = 1.0 - e * masks
    sus = health_state == State.SUSCEPTIBLE
    pressure = attenuation[infectious].sum()
    sus_weight = np.where(sus, attenuation, 0.0)
    expected = params.mixing_rate * pressure * sus_weight.sum() / n
    k = rng.poisson(expected) if expected > 0 else 0
    eligible = np.flatnonzero(sus_weight > 0)
    k = min(int(k), len(eligible))
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    w = sus_weight[eligible]
    return rng.choice(eligible, size=k, replace=False, p=w / w.sum())


def step_day(health: Health, masks, g: ContactGraph, params: DiseaseParams, rng):
    """Advance every agent by one day.

    Random numbers are consumed in a fixed order: one uniform per edge in
    canonical edge order, then the mixing draws, then one exit uniform and
    one branch uniform per agent. The result is therefore independent of
    how edges were listed when the graph was built.

    Returns the new :class:`Health` and the sorted ids newly exposed today.
    """
    n = len(health)
    masks = np.asarray(masks, dtype=bool)
    if masks.shape != (n,) or g.n_nodes != n:
        raise ValueError(
            f"size mismatch: health={n}, masks={masks.shape}, graph={g.n_nodes}"
        )
    rng = as_generator(rng)
    state = health.state
    infectious = is_infectious(state)

    edge_draws = rng.random(g.n_edges)
    net = _network_infections(state, infectious, masks, g, params, edge_draws)
    mix = _mixing_infections(state, infectious, masks, params, rng)
    new_ids = np.union1d(net, mix).astype(np.int64)

    exit_u = rng.random(n)
    branch_u = rng.random(n)

    new_state = state.copy()
    immunity = health.immunity_left.copy()

    exit_p = np.zeros(n)
    exit_p[state == State.EXPOSED] = 1.0 / params.mean_exposed_days
    exit_p[state == State.PRESYMPTOMATIC] = 1.0 / params.mean_presymp_days
    exit_p[state == State.SYMPTOMATIC] = 1.0 / params.mean_symp_days
    exit_p[state == State.ASYMPTOMATIC] = 1.0 / params.mean_asymp_days
    leaving = exit_u < exit_p

    new_state[leaving & (state == State.EXPOSED)] = State.PRESYMPTOMATIC
    pre = leaving & (state == State.PRESYMPTOMATIC)
    asym = branch_u < params.p_asymptomatic
    new_state[pre & asym] = State.ASYMPTOMATIC
    new_state[pre & ~asym] = State.SYMPTOMATIC
    recovering = leaving & ((state == State.SYMPTOMATIC) | (state == State.ASYMPTOMATIC))
    new_state[recovering] = State.RECOVERED
    immunity[recovering] = params.immunity_days

    rec = state == State.RECOVERED
    if params.geometric_immunity:
        waning = rec & (exit_u < 1.0 / params.immunity_days)
        immunity[rec] = np.maximum(immunity[rec] - 1, 1)
    else:
        immunity[rec] -= 1
        waning = rec & (immunity <= 0)
    new_state[waning] = State.SUSCEPTIBLE
    immunity[waning] = 0

    new_state[new_ids] = State.EXPOSED
    return Health(new_state, immunity), new_ids
