"""Scenario orchestration: build and calibrate the network, run replicates,
write ``daily.csv``, ``agents.csv``, ``summary.json`` and ``metadata.json``."""

from __future__ import annotations

import csv
import io
import json
import logging
import platform
import shutil
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, rng as rngmod
from .behavior import MaskingAgents
from .calibration import CalibrationResult, calibrate_to_r0
from .config import ScenarioConfig
from .epidemic import State, compartment_counts, seed_outbreak, step_day
from .errors import MaskABMError, UndefinedStatisticError
from .graph import (
    ContactGraph,
    generate_barabasi_albert,
    generate_uniform_random,
    load_edge_list,
    sample_and_rewire,
)
from .metrics import (
    COMPARTMENTS,
    MetricsLog,
    equilibrium_prevalence,
    is_damped,
    masking_assortativity,
    wave_peaks,
)

log = logging.getLogger(__name__)

__all__ = [
    "build_network",
    "prepare_network",
    "simulate",
    "ReplicateResult",
    "summarize_replicate",
    "run_replicates",
    "run_scenario",
    "RunResult",
]

DAILY_HEADER = ["replicate", "day", *COMPARTMENTS, "infectious", "masked", "new_infections"]
AGENTS_HEADER = ["replicate", "agent", "degree", "masked_days", "masked_epochs", "final_state"]


def build_network(cfg: ScenarioConfig) -> ContactGraph:
    net = cfg.network
    seed = rngmod.stream(cfg.seed, rngmod.NETWORK)
    if net.generator == "barabasi_albert":
        g = generate_barabasi_albert(net.n, net.m, seed)
    elif net.generator == "uniform_random":
        g = generate_uniform_random(net.n, net.m, seed)
    else:
        g = load_edge_list(net.path)
    if net.sample_target is not None:
        g = sample_and_rewire(g, net.sample_target, seed)
        g.meta.setdefault("substitutions", []).append(
            "near-node reweighting replaced by uniform stub pairing"
        )
    return g


def prepare_network(cfg: ScenarioConfig) -> tuple[ContactGraph, CalibrationResult]:
    """Build the scenario network and scale it to the network share of R0."""
    g = build_network(cfg)
    d = cfg.disease
    params = d if cfg.network.calibration_kernel == "geometric" else None
    return calibrate_to_r0(
        g, d.r0, d.mix_fraction, d.infectious_days, cfg.network.calibration_tol, params=params
    )


def simulate(g: ContactGraph, cfg: ScenarioConfig, replicate: int = 0, seed=None) -> tuple[MetricsLog, np.ndarray]:
    """Run one replicate on a calibrated graph.

    Day 0 is the outbreak seeding plus the first decision; each later day is
    one epidemic step followed, on decision days, by a decision epoch.
    Returns the metrics log and the final compartment of every agent.
    """
    seed = cfg.seed if seed is None else seed
    n = g.n_nodes
    cog, sched = cfg.cognition, cfg.schedule
    agents = MaskingAgents(
        n, cfg.reward, cog.policy, cog.mu, cog.tau, cog.capacity, cog.visibility
    )
    health = seed_outbreak(n, cfg.disease, rngmod.stream(seed, "replicate", replicate, rngmod.OUTBREAK))
    metrics = MetricsLog(n)

    def decide(day, masks):
        r = rngmod.stream(seed, "replicate", replicate, rngmod.DECISION, day)
        new = agents.decide(g, health, masks, r, day)
        metrics.record_epoch(day, new)
        return new

    masks = decide(0, np.zeros(n, dtype=bool))
    metrics.record(0, compartment_counts(health), masks, 0)
    for day in range(1, sched.horizon_days + 1):
        r = rngmod.stream(seed, "replicate", replicate, rngmod.EPIDEMIC, day)
        health, new_ids = step_day(health, masks, g, cfg.disease, r)
        if day % sched.decision_period == 0:
            masks = decide(day, masks)
        metrics.record(day, compartment_counts(health), masks, len(new_ids))
    return metrics, health.state.copy()


@dataclass
class ReplicateResult:
    replicate: int
    metrics: MetricsLog
    final_state: np.ndarray
    summary: dict


def _assortativity_or_reason(x, g):
    try:
        return masking_assortativity(x, g).to_dict()
    except UndefinedStatisticError as exc:
        return {"error": str(exc)}


def summarize_replicate(metrics: MetricsLog, g: ContactGraph, cfg: ScenarioConfig) -> dict:
    mp = cfg.metrics
    inf = metrics.infectious_series()
    peaks = wave_peaks(inf, g.n_nodes, mp.min_separation, mp.min_prominence)
    try:
        eq = equilibrium_prevalence(inf, g.n_nodes, mp.equilibrium_window)
    except ValueError:
        eq = None
    fractions = metrics.epoch_mask_fraction
    return {
        "peaks": [{"day": p.day, "height": p.height} for p in peaks],
        "damped": is_damped(peaks),
        "last_to_first_peak": (peaks[-1].height / peaks[0].height) if peaks else None,
        "equilibrium_prevalence": eq,
        "mask_fraction_range": (max(fractions) - min(fractions)) if fractions else 0.0,
        "epoch_mask_fraction": fractions,
        "assortativity": _assortativity_or_reason(metrics.masked_days, g),
        "assortativity_epochs": _assortativity_or_reason(metrics.masked_epochs, g),
        "total_infections": int(sum(r.new_infections for r in metrics.records)),
    }


def _run_one(args) -> ReplicateResult:
    g, cfg, k = args
    metrics, final = simulate(g, cfg, k)
    return ReplicateResult(k, metrics, final, summarize_replicate(metrics, g, cfg))


def run_replicates(g: ContactGraph, cfg: ScenarioConfig, replicates=None, workers: int = 1) -> list[ReplicateResult]:
    """Run replicates ``0..R-1``; results come back ordered by index.

    Each replicate draws only from streams keyed by its own index, so its
    output does not depend on which other replicates run.
    """
    reps = range(cfg.schedule.replicates) if replicates is None else replicates
    jobs = [(g, cfg, k) for k in reps]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    return sorted(results, key=lambda r: r.replicate)


def daily_csv(results: list[ReplicateResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DAILY_HEADER)
    for res in results:
        for rec in res.metrics.records:
            w.writerow([res.replicate, rec.day, *rec.counts, rec.infectious, rec.masked, rec.new_infections])
    return buf.getvalue()


def agents_csv(results: list[ReplicateResult], g: ContactGraph) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGENTS_HEADER)
    names = [s.name.lower() for s in State]
    for res in results:
        m = res.metrics
        for i in range(g.n_nodes):
            w.writerow([res.replicate, i, int(g.degree[i]), int(m.masked_days[i]), int(m.masked_epochs[i]), names[res.final_state[i]]])
    return buf.getvalue()


def _metadata(cfg: ScenarioConfig, g: ContactGraph, calib: CalibrationResult) -> dict:
    return {
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": cfg.to_dict(),
        "calibration": calib.to_dict(),
        "network": {
            "n_nodes": g.n_nodes,
            "n_edges": g.n_edges,
            **{k: v for k, v in g.meta.items() if k not in ("original_ids", "calibration")},
        },
        "defaults_of_note": {
            "mu": cfg.cognition.mu,
            "tau": cfg.cognition.tau,
            "alpha": cfg.cognition.alpha,
            "capacity": cfg.cognition.capacity,
            "visibility": cfg.cognition.visibility,
            "risk_term": "as_written" if cfg.reward.rr_as_written else "convex_combination",
            "discomfort_sign": "penalty (DP = a)",
            "immunity": "geometric" if cfg.disease.geometric_immunity else "fixed countdown",
            "mixing_imports": "Poisson",
            "calibration_kernel": cfg.network.calibration_kernel,
        },
    }


@dataclass
class RunResult:
    out_dir: Path
    calibration: CalibrationResult
    replicates: list[ReplicateResult]
    summary: dict


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n"


def run_scenario(cfg: ScenarioConfig, out_dir=None, replicates: int | None = None, seed: int | None = None, workers: int = 1) -> RunResult:
    """Run a whole scenario and write its artifacts.

    Artifacts are assembled in a temporary directory and moved into
    ``out_dir`` only once everything succeeded, so a failed run leaves no
    partial outputs behind.
    """
    if seed is not None:
        cfg = cfg.replace(seed=int(seed))
    if replicates is not None:
        cfg = cfg.replace(schedule=cfg.schedule.__class__(cfg.schedule.decision_period, cfg.schedule.horizon_days, int(replicates)))
    out = Path(out_dir if out_dir is not None else Path(cfg.output_dir) / cfg.name)

    try:
        g, calib = prepare_network(cfg)
        results = run_replicates(g, cfg, workers=workers)
    except MaskABMError as exc:
        raise type(exc)(f"scenario {cfg.name!r}: {exc}") from exc

    summary = {
        "scenario": cfg.name,
        "seed": cfg.seed,
        "calibration": calib.to_dict(),
        "replicates": [{"replicate": r.replicate, **r.summary} for r in results],
    }
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}-", dir=out.parent))
    try:
        (tmp / "daily.csv").write_text(daily_csv(results))
        (tmp / "agents.csv").write_text(agents_csv(results, g))
        (tmp / "summary.json").write_text(_json(summary))
        (tmp / "metadata.json").write_text(_json(_metadata(cfg, g, calib)))
        out.mkdir(parents=True, exist_ok=True)
        for f in tmp.iterdir():
            shutil.move(str(f), out / f.name)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    return RunResult(out, calib, results, summary)
