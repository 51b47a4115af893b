"""Single-packet walkthroughs on a hand-built network.

The bundled example network has one source (31) and a small group. For each
protocol we report how many transmissions one packet costs, both in total and
counting only those on the causal path of some member's first copy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .adversary import Adversary, AttackKind, Behavior
from .dodag import RoutingState, build_routing_state, dodag_from_dict
from .engine import Simulation
from .errors import ConfigError
from .runner import GROUP_ID
from .baselines import Bmrf, Esmrf
from .routing import Recoup
from .topology import RadioConfig, Topology, topology_from_dict

FIXTURE_SCHEMA = "recoup-fixture/1"
PROTOCOL_CLASSES = {"recoup": Recoup, "bmrf": Bmrf, "esmrf": Esmrf}


@dataclass
class Walkthrough:
    protocol: str
    required_tx: int
    total_tx: int
    delivered: list[int]
    transmissions: list[tuple[int, tuple[int, ...]]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"protocol": self.protocol, "required_tx": self.required_tx,
                "total_tx": self.total_tx, "delivered": self.delivered}


def single_packet(state: RoutingState, protocol: str, source: int,
                  blackholes: tuple[int, ...] = ()) -> Walkthrough:
    """Send one packet from ``source`` to quiescence and count what it cost."""
    try:
        cls = PROTOCOL_CLASSES[protocol]
    except KeyError:
        raise ConfigError(f"protocol: unknown protocol {protocol!r}") from None
    roster = {n: Behavior(AttackKind.BLACKHOLE) for n in blackholes}
    sim = Simulation(state, cls(state), Adversary(roster), trace=True)
    sim.send_packet(source, GROUP_ID, 0, 0)
    sim.run()
    delivered = sorted(r.node for r in sim.deliveries.remote())
    sends = [(e["sender"], tuple(e["targets"])) for e in sim.trace]
    return Walkthrough(protocol, len(sim.required_transmissions()),
                       sim.ledger.total_tx, delivered, sends)


@dataclass
class Fixture:
    name: str
    topology: Topology
    radio: RadioConfig
    neighbors: dict[int, list[int]] | None
    dodag: object
    source: int
    group: list[int]
    modified_group: list[int]
    blackholes: list[int]
    expect: dict

    def state(self, group=None) -> RoutingState:
        members = set(self.group if group is None else group)
        return build_routing_state(self.topology, self.radio, {GROUP_ID: members},
                                   dodag=self.dodag, neighbors=self.neighbors)


def fixture_from_dict(data: dict) -> Fixture:
    if data.get("schema") != FIXTURE_SCHEMA:
        raise ConfigError(f"fixture: unsupported schema {data.get('schema')!r}")
    topo = topology_from_dict(data["topology"])
    radio = RadioConfig(**data.get("radio", {}))
    nbrs = None
    if "links" in data:
        nbrs = {n: [] for n in topo.positions}
        for a, b in data["links"]:
            nbrs[a].append(b)
            nbrs[b].append(a)
        nbrs = {n: sorted(v) for n, v in nbrs.items()}
    dodag = dodag_from_dict(data["dodag"]) if "dodag" in data else None
    return Fixture(data.get("name", "fixture"), topo, radio, nbrs, dodag,
                   int(data["source"]), [int(n) for n in data["group"]],
                   [int(n) for n in data.get("modified_group", [])],
                   [int(n) for n in data.get("blackholes", [])],
                   data.get("expect", {}))


def load_fixture(path: str | Path | None = None) -> Fixture:
    """Load a fixture file; the bundled example network when ``path`` is None."""
    if path is None:
        text = resources.files("recoup").joinpath("data/example_network.json").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read fixture {path}: {exc}") from exc
    try:
        return fixture_from_dict(json.loads(text))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"fixture: malformed ({exc})") from exc


def evaluate(fx: Fixture, protocols=("recoup", "esmrf", "bmrf")) -> dict:
    """Walk the packet through every scenario the fixture describes."""
    out: dict = {"baseline": {}, "modified": {}, "blackhole": {}}
    for proto in protocols:
        out["baseline"][proto] = single_packet(fx.state(), proto, fx.source).to_dict()
        if fx.modified_group:
            out["modified"][proto] = single_packet(fx.state(fx.modified_group), proto,
                                                   fx.source).to_dict()
        if fx.blackholes:
            out["blackhole"][proto] = single_packet(fx.state(), proto, fx.source,
                                                    tuple(fx.blackholes)).to_dict()
    return out


def compare(result: dict, expect: dict) -> list[str]:
    """Mismatches between ``result`` and the fixture's expectations, as messages."""
    problems = []
    for scenario, per_proto in expect.items():
        for proto, fields_ in per_proto.items():
            got = result.get(scenario, {}).get(proto)
            if got is None:
                problems.append(f"{scenario}/{proto}: not evaluated")
                continue
            for key, want in fields_.items():
                if got.get(key) != want:
                    problems.append(f"{scenario}/{proto}/{key}: expected {want}, got {got.get(key)}")
    return problems


def verify_fixture(path: str | Path | None = None) -> tuple[dict, list[str]]:
    fx = load_fixture(path)
    result = evaluate(fx)
    return result, compare(result, fx.expect)
