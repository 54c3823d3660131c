"""Scenario configuration: parsing, validation and shipped presets.

A scenario is a YAML document with the sections ``network``, ``disease``,
``reward``, ``cognition``, ``schedule``, ``metrics`` and ``output`` plus a
top-level ``name`` and ``seed``. Unknown keys are errors. Every field has a
default, so an empty section (or file) is a valid scenario.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .behavior import VISIBILITY, BehaviorSchedule, RewardWeights
from .cogibl import PolicyParams
from .epidemic import DiseaseParams
from .errors import ConfigurationError

__all__ = [
    "NetworkSettings",
    "CognitionParams",
    "ScheduleParams",
    "MetricsParams",
    "ScenarioConfig",
    "load_config",
    "parse_config",
    "validate_config",
    "list_presets",
    "preset_path",
    "resolve_config_path",
]

GENERATORS = ("barabasi_albert", "uniform_random", "edge_list")


@dataclass(frozen=True)
class NetworkSettings:
    generator: str = "barabasi_albert"
    n: int = 2000
    m: int = 22000
    path: str | None = None
    sample_target: int | None = None
    calibration_tol: float = 0.01
    calibration_kernel: str = "geometric"


@dataclass(frozen=True)
class CognitionParams:
    mu: float = 5.0
    tau: float = 0.25
    alpha: float = 1.0
    beta: float = 5.0
    gamma: float = 0.0
    capacity: int | None = None
    rr_as_written: bool = False
    visibility: str = "symptomatic"
    deferred_learning: bool = True

    @property
    def policy(self) -> PolicyParams:
        return PolicyParams(self.beta, self.gamma, self.alpha)


@dataclass(frozen=True)
class ScheduleParams:
    decision_period: int = 7
    horizon_days: int = 600
    replicates: int = 1


@dataclass(frozen=True)
class MetricsParams:
    min_separation: int = 30
    min_prominence: float = 0.01
    equilibrium_window: int = 100


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    seed: int = 0
    network: NetworkSettings = field(default_factory=NetworkSettings)
    disease: DiseaseParams = field(default_factory=DiseaseParams)
    reward: RewardWeights = field(default_factory=RewardWeights)
    cognition: CognitionParams = field(default_factory=CognitionParams)
    schedule: ScheduleParams = field(default_factory=ScheduleParams)
    metrics: MetricsParams = field(default_factory=MetricsParams)
    output_dir: str = "runs"

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["output"] = {"dir": d.pop("output_dir")}
        return d

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


_SECTIONS = {
    "network": NetworkSettings,
    "disease": DiseaseParams,
    "reward": RewardWeights,
    "cognition": CognitionParams,
    "schedule": ScheduleParams,
    "metrics": MetricsParams,
}


def _section_fields(cls):
    return {f.name for f in dataclasses.fields(cls)}


def _check_types(section, cls, values, errors) -> dict:
    """Record type errors and return only the well-typed values."""
    defaults = {f.name: f.default for f in dataclasses.fields(cls)}
    ok = {}
    for key, val in values.items():
        default = defaults[key]
        if isinstance(default, bool):
            if not isinstance(val, bool):
                errors.append(f"{section}.{key}: expected true/false, got {val!r}")
                continue
        elif isinstance(default, int):
            if isinstance(val, bool) or not isinstance(val, int):
                errors.append(f"{section}.{key}: expected an integer, got {val!r}")
                continue
        elif isinstance(default, float):
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                errors.append(f"{section}.{key}: expected a number, got {val!r}")
                continue
        elif isinstance(default, str) and not isinstance(val, str):
            errors.append(f"{section}.{key}: expected a string, got {val!r}")
            continue
        ok[key] = val
    return ok


def _collect(raw: dict) -> tuple[dict, list[str]]:
    errors: list[str] = []
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        return {}, ["top level must be a mapping"]
    allowed = set(_SECTIONS) | {"name", "seed", "output"}
    for key in raw:
        if key not in allowed:
            errors.append(f"unknown key {key!r}")
    parts: dict = {}
    for section, cls in _SECTIONS.items():
        values = raw.get(section) or {}
        if not isinstance(values, dict):
            errors.append(f"{section}: must be a mapping")
            continue
        known = _section_fields(cls)
        for key in values:
            if key not in known:
                errors.append(f"unknown key {section}.{key!r}")
        values = {k: v for k, v in values.items() if k in known}
        parts[section] = _check_types(section, cls, values, errors)
    out = raw.get("output") or {}
    if not isinstance(out, dict) or set(out) - {"dir"}:
        errors.append("output: only the key 'dir' is allowed")
        out = {}
    parts["output"] = out
    parts["name"] = raw.get("name", "scenario")
    parts["seed"] = raw.get("seed", 0)
    if isinstance(parts["seed"], bool) or not isinstance(parts["seed"], int) or parts["seed"] < 0:
        errors.append(f"seed: expected a nonnegative integer, got {parts['seed']!r}")
    return parts, errors


def _build_section(section, cls, values, errors):
    try:
        return cls(**values)
    except (ConfigurationError, ValueError, TypeError) as exc:
        errors.append(f"{section}: {exc}")
        return None


def _cross_checks(parts, errors):
    net = parts.get("network")
    if net is not None:
        if net.generator not in GENERATORS:
            errors.append(f"network.generator: must be one of {GENERATORS}, got {net.generator!r}")
        if net.generator == "edge_list" and not net.path:
            errors.append("network.path: required when generator is edge_list")
        if net.generator != "edge_list" and net.n < 3:
            errors.append(f"network.n: must be at least 3, got {net.n}")
        if net.sample_target is not None and not isinstance(net.sample_target, int):
            errors.append("network.sample_target: expected an integer")
        elif net.sample_target is not None and net.generator != "edge_list" and net.sample_target >= net.n:
            errors.append("network.sample_target: must be below network.n")
        if net.calibration_kernel not in ("geometric", "fixed"):
            errors.append("network.calibration_kernel: must be 'geometric' or 'fixed'")
        if not net.calibration_tol > 0:
            errors.append("network.calibration_tol: must be positive")
    cog = parts.get("cognition")
    if cog is not None:
        if not (cog.mu > 0):
            errors.append(f"cognition.mu: must be positive, got {cog.mu}")
        if not (cog.tau > 0):
            errors.append(f"cognition.tau: must be positive, got {cog.tau}")
        if cog.visibility not in VISIBILITY:
            errors.append(f"cognition.visibility: must be one of {VISIBILITY}, got {cog.visibility!r}")
        if cog.capacity is not None and (not isinstance(cog.capacity, int) or cog.capacity <= 16):
            errors.append("cognition.capacity: must be an integer above the 16 pinned boundary instances")
        try:
            cog.policy
        except ConfigurationError as exc:
            errors.append(f"cognition: {exc}")
        if cog.gamma > 0 and not cog.deferred_learning:
            errors.append("cognition.gamma > 0 requires cognition.deferred_learning: true (the next state must be known)")
    sched = parts.get("schedule")
    if sched is not None:
        try:
            BehaviorSchedule(sched.decision_period)
        except ConfigurationError as exc:
            errors.append(f"schedule.decision_period: {exc}")
        if sched.horizon_days < 0:
            errors.append("schedule.horizon_days: must be nonnegative")
        if sched.replicates < 1:
            errors.append("schedule.replicates: must be at least 1")
    met = parts.get("metrics")
    if met is not None:
        if met.min_separation < 1:
            errors.append("metrics.min_separation: must be at least 1")
        if met.min_prominence < 0:
            errors.append("metrics.min_prominence: must be nonnegative")
        if met.equilibrium_window < 1:
            errors.append("metrics.equilibrium_window: must be at least 1")


def parse_config(raw: dict) -> tuple[ScenarioConfig | None, list[str]]:
    """Build a config from a mapping, returning it with every violation found."""
    values, errors = _collect(raw)
    parts = {}
    for section, cls in _SECTIONS.items():
        if section not in values:
            continue
        section_values = dict(values[section])
        if section == "reward" and "mf" not in section_values:
            eff = values["disease"].get("masking_effectiveness", DiseaseParams.masking_effectiveness)
            if isinstance(eff, (int, float)) and not isinstance(eff, bool):
                section_values["mf"] = round(1.0 - eff, 12)
        parts[section] = _build_section(section, cls, section_values, errors)
    _cross_checks(parts, errors)
    if errors or any(parts.get(s) is None for s in _SECTIONS):
        return None, errors
    cfg = ScenarioConfig(
        name=str(values["name"]),
        seed=int(values["seed"]),
        output_dir=str(values["output"].get("dir", "runs")),
        **parts,
    )
    return cfg, []


def list_presets() -> list[str]:
    root = resources.files("maskabm") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def preset_path(name: str) -> Path:
    path = Path(str(resources.files("maskabm") / "presets" / f"{name}.yaml"))
    if not path.exists():
        raise ConfigurationError(f"unknown preset {name!r}; available: {', '.join(list_presets())}")
    return path


def resolve_config_path(ref) -> Path:
    """A path to a YAML file, or the name of a shipped preset."""
    p = Path(ref)
    if p.exists():
        return p
    if p.suffix == "" and str(ref) in list_presets():
        return preset_path(str(ref))
    raise FileNotFoundError(f"no config file or preset named {ref!r}")


def _read_yaml(path):
    with open(path) as fh:
        try:
            return yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"{path}: invalid YAML: {exc}") from None


def validate_config(path) -> list[str]:
    """Every problem found in the config at ``path``; empty means valid.

    Raises ``OSError`` if the file cannot be read.
    """
    try:
        raw = _read_yaml(resolve_config_path(path))
    except ConfigurationError as exc:
        return [str(exc)]
    _, errors = parse_config(raw)
    return errors


def load_config(path) -> ScenarioConfig:
    path = resolve_config_path(path)
    cfg, errors = parse_config(_read_yaml(path))
    if errors:
        raise ConfigurationError(f"{path}: " + "; ".join(errors))
    return cfg
