"""Repeated runs, sub-seed derivation and malicious-count sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..sim.world import World
from .config import SimConfig
from .metrics import MetricsReport, aggregate, compute_metrics, outcome_from_world
from .propositions import proposition_gains_collusion, proposition_gains_link


@dataclass
class SimulationResult:
    report: MetricsReport
    traces: list[list[str]] = field(default_factory=list)
    trace_hashes: list[str] = field(default_factory=list)


def sub_seeds(seed: int, runs: int) -> list[int]:
    """Independent per-run seeds derived from one master seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(runs)]


def check_startup_margins(cfg: SimConfig) -> None:
    """Honesty must pay strictly more than dishonesty for these parameters."""
    link = proposition_gains_link(1.0, 1.0, cfg.alpha, cfg.phi_size)
    coll = proposition_gains_collusion(cfg.alpha, cfg.phi_size)
    if not (link.margin > 0 and coll.margin > 0):
        raise RuntimeError("reputation margins are not positive for this configuration")


def run_once(cfg: SimConfig, seed: int, keep_trace: bool = False) -> tuple[MetricsReport, World]:
    world = World(cfg, seed=seed, keep_trace=keep_trace)
    world.run()
    return compute_metrics(outcome_from_world(world, seed)), world


def run_simulation(cfg: SimConfig, keep_trace: bool = False) -> SimulationResult:
    check_startup_margins(cfg)
    rows, traces, hashes = [], [], []
    for seed in sub_seeds(cfg.seed, cfg.runs):
        row, world = run_once(cfg, seed, keep_trace)
        rows.append(row)
        hashes.append(world.trace_hash)
        if keep_trace:
            traces.append(world.trace)
    return SimulationResult(aggregate(rows), traces, hashes)


def sweep(cfg: SimConfig, malicious_counts: Sequence[int], keep_trace: bool = False) -> list[SimulationResult]:
    out = []
    for count in malicious_counts:
        if not 0 <= count <= cfg.node_count:
            raise ValueError(f"malicious count {count} outside 0..{cfg.node_count}")
        out.append(run_simulation(cfg.replace(malicious_count=count), keep_trace))
    return out
