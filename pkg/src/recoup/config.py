"""Scenario configuration: defaults follow the evaluation setup used for RECOUP."""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .adversary import AttackKind
from .errors import ConfigError
from .topology import RadioConfig

SCHEMA_VERSION = 1
PROTOCOLS = ("recoup", "bmrf", "esmrf")
SWEEP_AXES = ("sink_fraction", "node_count", "attacker_fraction")
# ranges the evaluation covered; values outside only warn
SWEEP_RANGES = {
    "sink_fraction": (0.2, 0.8),
    "node_count": (51, 201),
    "attacker_fraction": (0.1, 0.4),
}


@dataclass
class TrafficConfig:
    rate: float = 0.5               # packets per second per source
    packet_budget: int = 500        # total packets across all sources
    payload_size: int = 64


@dataclass
class AttackerConfig:
    kind: str = "none"
    fraction: float = 0.0
    rank_delta: int = 2
    discard_probability: float = 0.5


@dataclass
class ScenarioConfig:
    node_count: int = 101
    area: tuple[float, float] = (200.0, 200.0)
    radio: RadioConfig = field(default_factory=RadioConfig)
    protocols: tuple[str, ...] = PROTOCOLS
    sources: int = 8
    sink_fraction: float = 0.4
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    attacker: AttackerConfig = field(default_factory=AttackerConfig)
    seeds: tuple[int, ...] = tuple(range(1, 31))
    ofm_threshold: int = 3
    alpha_initial: int = 0
    dd_capacity: int = 100
    inter_cluster_choice: str = "rank"
    trace: bool = False
    topology_file: str | None = None
    dodag_file: str | None = None
    # explicit roles, used by fixtures; random sampling when None
    source_nodes: tuple[int, ...] | None = None
    group_members: tuple[int, ...] | None = None
    schema_version: int = SCHEMA_VERSION

    def validate(self) -> "ScenarioConfig":
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"schema_version: unsupported version {self.schema_version}")
        if self.node_count < 2 and self.topology_file is None:
            raise ConfigError("node_count: must be >= 2")
        if len(self.area) != 2 or not all(v > 0 for v in self.area):
            raise ConfigError("area: width and height must be positive")
        bad = [p for p in self.protocols if p not in PROTOCOLS]
        if bad or not self.protocols:
            raise ConfigError(f"protocols: unknown protocol(s) {bad}; choose from {PROTOCOLS}")
        if self.sources < 0:
            raise ConfigError("sources: must be >= 0")
        if not 0.0 <= self.sink_fraction <= 1.0:
            raise ConfigError("sink_fraction: must be within [0, 1]")
        if not self.traffic.rate > 0:
            raise ConfigError("traffic.rate: must be > 0")
        if self.traffic.packet_budget < 0:
            raise ConfigError("traffic.packet_budget: must be >= 0")
        try:
            AttackKind(self.attacker.kind)
        except ValueError:
            raise ConfigError(f"attacker.kind: unknown kind {self.attacker.kind!r}") from None
        if not 0.0 <= self.attacker.fraction <= 1.0:
            raise ConfigError("attacker.fraction: must be within [0, 1]")
        if self.attacker.fraction > 0.4:
            warnings.warn("attacker.fraction above the evaluated 40%", stacklevel=2)
        if not 0.0 <= self.attacker.discard_probability <= 1.0:
            raise ConfigError("attacker.discard_probability: must be within [0, 1]")
        if self.attacker.rank_delta < 0:
            raise ConfigError("attacker.rank_delta: must be >= 0")
        if not self.seeds:
            raise ConfigError("seeds: at least one seed required")
        if self.ofm_threshold < 1:
            raise ConfigError("ofm_threshold: must be >= 1")
        if self.alpha_initial < 0:
            raise ConfigError("alpha_initial: must be >= 0")
        if self.dd_capacity < 1:
            raise ConfigError("dd_capacity: must be >= 1")
        if self.inter_cluster_choice not in ("rank", "random"):
            raise ConfigError("inter_cluster_choice: must be 'rank' or 'random'")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["area"] = list(self.area)
        d["protocols"] = list(self.protocols)
        d["seeds"] = list(self.seeds)
        for k in ("source_nodes", "group_members"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a mapping")
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"{unknown[0]}: unknown field")
        kwargs = {}
        for key, value in data.items():
            try:
                kwargs[key] = _coerce(key, value)
            except ConfigError:
                raise
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: {exc}") from exc
        return cls(**kwargs).validate()


def _sub(cls, key: str, value):
    if not isinstance(value, dict):
        raise ConfigError(f"{key}: expected a mapping")
    known = {f.name for f in fields(cls)}
    for k in value:
        if k not in known:
            raise ConfigError(f"{key}.{k}: unknown field")
    try:
        return cls(**value)
    except ConfigError as exc:
        msg = str(exc)
        raise ConfigError(msg if msg.startswith(key) else f"{key}: {msg}") from exc
    except TypeError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _coerce(key: str, value):
    if key == "radio":
        return _sub(RadioConfig, key, value)
    if key == "traffic":
        return _sub(TrafficConfig, key, value)
    if key == "attacker":
        return _sub(AttackerConfig, key, value)
    if key == "seeds":
        if isinstance(value, int):
            return tuple(range(1, value + 1))
        return tuple(int(v) for v in value)
    if key in ("area", "protocols", "source_nodes", "group_members"):
        if value is None:
            return None
        if isinstance(value, str):
            value = [value]
        conv = float if key == "area" else (str if key == "protocols" else int)
        return tuple(conv(v) for v in value)
    if key in ("node_count", "sources", "ofm_threshold", "dd_capacity", "schema_version"):
        if isinstance(value, bool) or int(value) != value:
            raise ConfigError(f"{key}: expected an integer")
        return int(value)
    if key == "sink_fraction":
        return float(value)
    if key == "trace":
        return bool(value)
    return value


def load_config(path: str | Path) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    cfg = ScenarioConfig.from_dict(data)
    # relative fixture paths resolve against the config file's directory
    for attr in ("topology_file", "dodag_file"):
        val = getattr(cfg, attr)
        if val and not Path(val).is_absolute():
            setattr(cfg, attr, str((p.parent / val).resolve()))
    return cfg
