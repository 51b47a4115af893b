"""Static node placement, binary-disc radio and energy accounting."""

from __future__ import annotations

import json
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import ConfigError

ROOT_ID = 0


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def distance(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class RadioConfig:
    """Radio constants. ``tx_time`` is the per-hop time TX_MP in ms."""

    tx_range: float = 25.0
    tx_time: int = 8
    tx_energy: float = 0.4
    rx_energy: float = 0.45
    delivery_probability: float = 1.0

    def __post_init__(self):
        for name in ("tx_range", "tx_time", "tx_energy", "rx_energy"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"radio.{name} must be > 0")
        if not 0.0 < self.delivery_probability <= 1.0:
            raise ConfigError("radio.delivery_probability must be in (0, 1]")


def in_range(a: Position, b: Position, cfg: RadioConfig) -> bool:
    return a.distance(b) <= cfg.tx_range


@dataclass
class Topology:
    positions: dict[int, Position]
    area: tuple[float, float]

    @property
    def node_ids(self) -> list[int]:
        return sorted(self.positions)

    def neighbors(self, cfg: RadioConfig) -> dict[int, list[int]]:
        ids = self.node_ids
        out: dict[int, list[int]] = {n: [] for n in ids}
        for i, a in enumerate(ids):
            pa = self.positions[a]
            for b in ids[i + 1:]:
                if in_range(pa, self.positions[b], cfg):
                    out[a].append(b)
                    out[b].append(a)
        return out

    def without(self, node: int) -> "Topology":
        if node == ROOT_ID:
            raise ConfigError("the root cannot be removed")
        if node not in self.positions:
            raise ConfigError(f"unknown node {node}")
        pos = {n: p for n, p in self.positions.items() if n != node}
        return Topology(pos, self.area)

    def with_node(self, node: int, position: Position) -> "Topology":
        if node in self.positions:
            raise ConfigError(f"node {node} already exists")
        pos = dict(self.positions)
        pos[node] = position
        return Topology(pos, self.area)


def generate_topology(node_count: int, area: tuple[float, float], seed: int) -> Topology:
    """Uniform random placement; node 0 (the root) sits at the area center."""
    width, height = area
    if node_count < 2:
        raise ConfigError("node_count must be >= 2")
    if not (width > 0 and height > 0):
        raise ConfigError("area must have positive width and height")
    rng = random.Random(f"{seed}:topology")
    positions = {ROOT_ID: Position(width / 2, height / 2)}
    for node in range(1, node_count):
        positions[node] = Position(rng.uniform(0, width), rng.uniform(0, height))
    return Topology(positions, (float(width), float(height)))


def topology_to_dict(topo: Topology) -> dict:
    return {
        "schema": "recoup-topology/1",
        "area": list(topo.area),
        "nodes": [{"id": n, "x": topo.positions[n].x, "y": topo.positions[n].y}
                  for n in topo.node_ids],
    }


def topology_from_dict(data: dict) -> Topology:
    try:
        nodes = data["nodes"]
        positions = {int(rec["id"]): Position(float(rec["x"]), float(rec["y"])) for rec in nodes}
        area = tuple(float(v) for v in data["area"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed topology: {exc}") from exc
    if len(positions) != len(nodes):
        raise ConfigError("duplicate node ids in topology")
    if ROOT_ID not in positions:
        raise ConfigError("topology has no root (id 0)")
    return Topology(positions, area)


def save_topology(topo: Topology, path: str | Path) -> None:
    Path(path).write_text(json.dumps(topology_to_dict(topo), indent=1) + "\n")


def load_topology(path: str | Path) -> Topology:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read topology {path}: {exc}") from exc
    return topology_from_dict(data)


@dataclass
class EnergyLedger:
    """Per-node transmission/reception counters.

    Energy is always derived as count x constant, so the ledger can never
    drift from the counts.
    """

    radio: RadioConfig
    tx_count: dict[int, int] = field(default_factory=lambda: defaultdict(int))
    rx_count: dict[int, int] = field(default_factory=lambda: defaultdict(int))

    def record_transmission(self, sender: int, receivers: Iterable[int]) -> None:
        self.tx_count[sender] += 1
        for r in receivers:
            self.rx_count[r] += 1

    def tx_energy(self, node: int) -> float:
        return self.tx_count.get(node, 0) * self.radio.tx_energy

    def rx_energy(self, node: int) -> float:
        return self.rx_count.get(node, 0) * self.radio.rx_energy

    @property
    def total_tx(self) -> int:
        return sum(self.tx_count.values())

    @property
    def total_rx(self) -> int:
        return sum(self.rx_count.values())

    def total_energy(self) -> float:
        return self.total_tx * self.radio.tx_energy + self.total_rx * self.radio.rx_energy


def record_transmission(ledger: EnergyLedger, sender: int, receivers: Iterable[int]) -> EnergyLedger:
    ledger.record_transmission(sender, receivers)
    return ledger
