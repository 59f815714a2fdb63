"""Simulation configuration and the flat ``key=value`` config file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from ..behaviors import StrategyKind


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.message = message


@dataclass(frozen=True)
class SimConfig:
    node_count: int = 60
    malicious_count: int = 0
    area_width: float = 600.0
    area_height: float = 300.0
    max_radio: float = 250.0
    min_radio: float = 100.0
    v_max: float = 50.0
    pause_max: float = 20.0
    mobility_step: float = 1.0
    hello_min: int = 6
    hello_max: int = 10
    tau_prime: float = 10.0
    eta: int = 5
    packet_size: int = 512
    bandwidth: float = 1_000_000.0
    sim_time: float = 600.0
    runs: int = 6
    seed: int = 1
    alpha: float = 2.0
    M: int = 5
    tau: float = 0.05
    queue_size: int = 5
    H: int = 10
    sigma: float = 1.0
    traffic_rate: float = 0.05
    supportive_fraction: float = 0.5
    blacklist_rule: str = "pseudocode"
    delay_rule: str = "prose"
    penalty_mode: str = "literal"
    malicious_strategy: str = ""
    strategy_counts: str = ""
    node_pins: str = ""
    delay_extra: float = 0.0
    flood_rate: float = 0.0
    flood_start: float = 1.0
    slander_interval: float = 30.0
    paper_profile: bool = False

    def __post_init__(self):
        validate(self)

    @property
    def phi_size(self) -> int:
        return self.node_count

    @property
    def tx_delay(self) -> float:
        return self.packet_size * 8.0 / self.bandwidth

    @property
    def effective_delay_extra(self) -> float:
        if self.delay_extra > 0:
            return self.delay_extra
        return 2.0 * ((self.queue_size - 1) * self.tau + 3.0 * self.tau_prime)

    @property
    def effective_flood_rate(self) -> float:
        return self.flood_rate if self.flood_rate > 0 else 2.0 * self.eta

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def pinned_strategy(self) -> Optional[StrategyKind]:
        return StrategyKind(self.malicious_strategy) if self.malicious_strategy else None

    def parsed_counts(self) -> list[tuple[StrategyKind, int]]:
        return [(StrategyKind(k), int(v)) for k, v in _pairs(self.strategy_counts)]

    def parsed_pins(self) -> dict[int, StrategyKind]:
        return {int(k): StrategyKind(v) for k, v in _pairs(self.node_pins)}


PAPER_PROFILE = dict(
    node_count=500,
    area_width=2000.0,
    area_height=1000.0,
    max_radio=250.0,
    v_max=50.0,
    hello_min=6,
    hello_max=10,
    tau_prime=10.0,
    eta=5,
    packet_size=512,
    bandwidth=1_000_000.0,
    sim_time=3600.0,
    runs=6,
)


def paper_config(**overrides) -> SimConfig:
    values = {**PAPER_PROFILE, "paper_profile": True}
    values.update(overrides)
    return SimConfig(**values)


def _pairs(text: str) -> list[tuple[str, str]]:
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        if ":" not in item:
            raise ValueError(f"expected key:value, got {item!r}")
        k, v = item.split(":", 1)
        out.append((k.strip(), v.strip()))
    return out


def validate(cfg: SimConfig) -> None:
    def need(cond: bool, name: str, msg: str) -> None:
        if not cond:
            raise ConfigError(name, msg)

    need(cfg.node_count > 3, "node_count", "must exceed 3")
    need(0 <= cfg.malicious_count <= cfg.node_count, "malicious_count", "must be within 0..node_count")
    need(cfg.area_width > 0 and cfg.area_height > 0, "area_width", "area must be positive")
    need(0 < cfg.min_radio <= cfg.max_radio, "min_radio", "need 0 < min_radio <= max_radio")
    need(cfg.v_max >= 0, "v_max", "must be non-negative")
    need(cfg.pause_max >= 0, "pause_max", "must be non-negative")
    need(cfg.mobility_step > 0, "mobility_step", "must be positive")
    need(1 <= cfg.hello_min <= cfg.hello_max <= 29, "hello_min", "need 1 <= hello_min <= hello_max <= 29")
    need(cfg.tau_prime > 0, "tau_prime", "must be positive")
    need(cfg.eta >= 1, "eta", "must be at least 1")
    need(cfg.packet_size > 0, "packet_size", "must be positive")
    need(cfg.bandwidth > 0, "bandwidth", "must be positive")
    need(cfg.sim_time > 0, "sim_time", "must be positive")
    need(cfg.runs >= 1, "runs", "must be at least 1")
    need(cfg.alpha > 1, "alpha", "must exceed 1")
    need(cfg.M >= 1, "M", "must be at least 1")
    need(cfg.tau > 0, "tau", "must be positive")
    need(cfg.queue_size >= 1, "queue_size", "must be at least 1")
    need(cfg.H >= 2, "H", "must be at least 2")
    need(cfg.sigma > 0, "sigma", "must be positive")
    need(cfg.traffic_rate >= 0, "traffic_rate", "must be non-negative")
    need(0 <= cfg.supportive_fraction <= 1, "supportive_fraction", "must be within [0, 1]")
    need(cfg.blacklist_rule in ("pseudocode", "prose"), "blacklist_rule", "pseudocode or prose")
    need(cfg.delay_rule in ("pseudocode", "prose"), "delay_rule", "pseudocode or prose")
    need(cfg.penalty_mode in ("literal", "magnitude"), "penalty_mode", "literal or magnitude")
    need(cfg.delay_extra >= 0, "delay_extra", "must be non-negative")
    need(cfg.flood_rate >= 0, "flood_rate", "must be non-negative")
    need(cfg.slander_interval > 0, "slander_interval", "must be positive")
    try:
        pinned = cfg.pinned_strategy()
    except ValueError:
        raise ConfigError("malicious_strategy", f"unknown strategy {cfg.malicious_strategy!r}") from None
    need(pinned is None or pinned.malicious, "malicious_strategy", "must name a malicious strategy")
    try:
        counts = cfg.parsed_counts()
    except ValueError as exc:
        raise ConfigError("strategy_counts", str(exc)) from None
    need(all(k.malicious and n >= 0 for k, n in counts), "strategy_counts", "malicious kinds with counts >= 0")
    need(sum(n for _, n in counts) <= cfg.malicious_count, "strategy_counts", "more than malicious_count")
    try:
        pins = cfg.parsed_pins()
    except ValueError as exc:
        raise ConfigError("node_pins", str(exc)) from None
    need(all(0 <= n < cfg.node_count for n in pins), "node_pins", "node id out of range")
    need(
        sum(1 for k in pins.values() if k.malicious) <= cfg.malicious_count,
        "node_pins",
        "more malicious pins than malicious_count",
    )
    if cfg.paper_profile:
        need(500 <= cfg.node_count <= 5000, "node_count", "full-scale profile allows 500..5000")
        need(cfg.malicious_count <= 500, "malicious_count", "full-scale profile allows 0..500")
        need(cfg.area_width <= 2000 and cfg.area_height <= 1000, "area_width", "at most 2000 x 1000 m")
        need(cfg.max_radio <= 250, "max_radio", "at most 250 m")
        need(cfg.v_max <= 50, "v_max", "at most 50 m/s")
        need(cfg.hello_min >= 6 and cfg.hello_max <= 10, "hello_min", "HELLO interval within 6..10 s")


_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _coerce(name: str, kind, raw: str):
    try:
        if kind in (bool, "bool"):
            return _BOOL[raw.strip().lower()]
        if kind in (int, "int"):
            return int(raw)
        if kind in (float, "float"):
            return float(raw)
        return raw.strip()
    except (KeyError, ValueError):
        raise ConfigError(name, f"cannot parse {raw!r} as {getattr(kind, '__name__', kind)}") from None


def parse_config_text(text: str, **overrides) -> SimConfig:
    types = {f.name: f.type for f in fields(SimConfig)}
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(key, "unknown configuration key")
        values[key] = _coerce(key, types[key], raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    if values.get("paper_profile"):
        values = {**PAPER_PROFILE, **values}
    return SimConfig(**values)


def load_config(path: str | Path, **overrides) -> SimConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"), **overrides)


def dump_config(cfg: SimConfig) -> str:
    return "".join(f"{f.name}={getattr(cfg, f.name)}\n" for f in fields(SimConfig))
