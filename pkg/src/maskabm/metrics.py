"""Time-series logging and the headline analyses (wave damping, masking
assortativity)."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .epidemic import State
from .errors import UndefinedStatisticError
from .graph import ContactGraph

__all__ = [
    "DailyRecord",
    "MetricsLog",
    "AssortativityReport",
    "Peak",
    "masking_assortativity",
    "wave_peaks",
    "equilibrium_prevalence",
    "is_damped",
]

COMPARTMENTS = [s.name.lower() for s in State]


@dataclass(frozen=True)
class DailyRecord:
    day: int
    counts: tuple[int, ...]
    masked: int
    new_infections: int

    @property
    def infectious(self) -> int:
        c = self.counts
        return c[State.PRESYMPTOMATIC] + c[State.SYMPTOMATIC] + c[State.ASYMPTOMATIC]


@dataclass
class MetricsLog:
    """Daily records for one replicate plus per-agent masking totals."""

    n_nodes: int
    records: list[DailyRecord] = field(default_factory=list)
    masked_days: np.ndarray = None
    masked_epochs: np.ndarray = None
    epoch_days: list[int] = field(default_factory=list)
    epoch_mask_fraction: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.masked_days is None:
            self.masked_days = np.zeros(self.n_nodes, dtype=np.int64)
        if self.masked_epochs is None:
            self.masked_epochs = np.zeros(self.n_nodes, dtype=np.int64)

    def record(self, day, counts, masks, new_infections):
        counts = tuple(int(c) for c in counts)
        if sum(counts) != self.n_nodes:
            raise AssertionError(f"day {day}: compartments sum to {sum(counts)}, not {self.n_nodes}")
        masks = np.asarray(masks, dtype=bool)
        self.masked_days += masks
        self.records.append(DailyRecord(int(day), counts, int(masks.sum()), int(new_infections)))

    def record_epoch(self, day, masks):
        masks = np.asarray(masks, dtype=bool)
        self.masked_epochs += masks
        self.epoch_days.append(int(day))
        self.epoch_mask_fraction.append(float(masks.mean()) if len(masks) else 0.0)

    def infectious_series(self) -> np.ndarray:
        return np.array([r.infectious for r in self.records], dtype=np.int64)

    def masked_series(self) -> np.ndarray:
        return np.array([r.masked for r in self.records], dtype=np.int64)

    def counts_array(self) -> np.ndarray:
        return np.array([r.counts for r in self.records], dtype=np.int64).reshape(-1, len(State))


@dataclass(frozen=True)
class AssortativityReport:
    slope: float
    pearson_r: float
    n_points: int
    intercept: float = 0.0

    def to_dict(self):
        return asdict(self)


def masking_assortativity(per_agent_masked_days, g: ContactGraph) -> AssortativityReport:
    """Regress each agent's neighbours' mean masking on its own masking.

    Agents without neighbours are left out. Raises
    :class:`UndefinedStatisticError` when either variable has zero variance.
    """
    x_all = np.asarray(per_agent_masked_days, dtype=float)
    if len(x_all) != g.n_nodes:
        raise ValueError("need one masking total per node")
    deg = np.asarray(g.degree, dtype=float)
    keep = deg > 0
    y_all = (g.indicator @ x_all) / np.where(keep, deg, 1.0)
    x, y = x_all[keep], y_all[keep]
    if len(x) < 2:
        raise UndefinedStatisticError("fewer than two connected agents")
    xc, yc = x - x.mean(), y - y.mean()
    sxx, syy = xc @ xc, yc @ yc
    if sxx <= 1e-12 * max(1.0, x.mean() ** 2) * len(x):
        raise UndefinedStatisticError("agents' masking totals have zero variance")
    slope = float(xc @ yc / sxx)
    if syy <= 0:
        raise UndefinedStatisticError("neighbour masking means have zero variance")
    r = float(np.clip(xc @ yc / np.sqrt(sxx * syy), -1.0, 1.0))
    return AssortativityReport(slope, r, int(len(x)), float(y.mean() - slope * x.mean()))


@dataclass(frozen=True)
class Peak:
    day: int
    height: float


def wave_peaks(series, n: int, min_separation: int = 30, min_prominence: float = 0.01) -> list[Peak]:
    """Interior local maxima at least ``min_separation`` days apart whose
    prominence is at least ``min_prominence * n`` (``n`` = population)."""
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        raise ValueError("series is empty")
    idx, _ = find_peaks(x, distance=max(1, int(min_separation)), prominence=min_prominence * n)
    return [Peak(int(i), float(x[i])) for i in idx]


def is_damped(peaks: list[Peak], min_peaks: int = 3) -> bool:
    """At least ``min_peaks`` peaks with strictly decreasing heights."""
    h = [p.height for p in peaks]
    return len(h) >= min_peaks and all(b < a for a, b in zip(h, h[1:]))


def equilibrium_prevalence(series, n: int, window: int = 100) -> float:
    """Mean infectious fraction over the last ``window`` days."""
    x = np.asarray(series, dtype=float)
    if len(x) <= window:
        raise ValueError(f"series of length {len(x)} is not longer than the window {window}")
    return float(x[-window:].mean() / n)
