"""One (config, protocol, seed) run: formation, attacker placement, traffic, metrics."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .adversary import Adversary, AttackKind, Behavior, place_attackers
from .baselines import Bmrf, Esmrf
from .config import ScenarioConfig
from .dodag import RoutingState, build_routing_state, load_dodag
from .engine import Simulation
from .errors import ConfigError
from .metrics import RunMetrics
from .routing import ForwardingProtocol, Recoup
from .topology import ROOT_ID, Topology, generate_topology, load_topology

GROUP_ID = 1
RECORD_SCHEMA = "recoup-run/1"


@dataclass
class RunResult:
    protocol: str
    seed: int
    config: ScenarioConfig
    metrics: RunMetrics
    sources: list[int]
    group: list[int]
    attackers: list[dict]
    simulation: Simulation

    def record(self) -> dict:
        return {
            "schema": RECORD_SCHEMA,
            "protocol": self.protocol,
            "seed": self.seed,
            "sources": self.sources,
            "group": self.group,
            "attackers": self.attackers,
            "metrics": self.metrics.to_dict(),
            "config": self.config.to_dict(),
        }

    def record_line(self) -> str:
        return json.dumps(self.record(), sort_keys=True)


def make_protocol(name: str, state: RoutingState, cfg: ScenarioConfig, seed: int) -> ForwardingProtocol:
    if name == "recoup":
        rng = random.Random(f"{seed}:neighbor-choice") if cfg.inter_cluster_choice == "random" else None
        return Recoup(state, cfg.ofm_threshold, cfg.dd_capacity, cfg.alpha_initial, rng)
    if name == "bmrf":
        return Bmrf(state, cfg.ofm_threshold, cfg.dd_capacity)
    if name == "esmrf":
        return Esmrf(state, cfg.ofm_threshold, cfg.dd_capacity)
    raise ConfigError(f"protocol: unknown protocol {name!r}")


def scenario_topology(cfg: ScenarioConfig, seed: int) -> Topology:
    if cfg.topology_file:
        return load_topology(cfg.topology_file)
    return generate_topology(cfg.node_count, cfg.area, seed)


def build_adversary(cfg: ScenarioConfig, topo: Topology, seed: int) -> Adversary:
    a = cfg.attacker
    behavior = Behavior(AttackKind(a.kind), a.rank_delta, a.discard_probability)
    roster = place_attackers(topo.node_ids, a.fraction, behavior, seed)
    return Adversary(roster, seed)


def pick_roles(cfg: ScenarioConfig, state: RoutingState, seed: int) -> tuple[list[int], list[int]]:
    """Sources and group members among nodes that joined the DODAG."""
    joined = [n for n in state.dodag.joined if n != ROOT_ID]
    rng = random.Random(f"{seed}:traffic")
    if cfg.source_nodes is not None:
        sources = list(cfg.source_nodes)
    else:
        sources = sorted(rng.sample(joined, min(cfg.sources, len(joined))))
    if cfg.group_members is not None:
        members = sorted(cfg.group_members)
    else:
        members = sorted(rng.sample(joined, round(cfg.sink_fraction * len(joined))))
    missing = [n for n in sources if n not in state.dodag.rank]
    if missing:
        raise ConfigError(f"source_nodes: nodes {missing} are not attached to the DODAG")
    return sources, members


def schedule_traffic(sim: Simulation, cfg: ScenarioConfig, sources: list[int], seed: int) -> None:
    if not sources:
        return
    rng = random.Random(f"{seed}:schedule")
    interval = round(1000 / cfg.traffic.rate)
    budget = cfg.traffic.packet_budget
    base, extra = divmod(budget, len(sources))
    for i, src in enumerate(sources):
        offset = rng.randrange(interval)
        for k in range(base + (1 if i < extra else 0)):
            sim.send_packet(src, GROUP_ID, k, offset + k * interval)


def run(cfg: ScenarioConfig, seed: int, protocol: str = "recoup", trace: bool | None = None) -> RunResult:
    """Run one scenario to quiescence. Deterministic per (cfg, seed, protocol)."""
    cfg.validate()
    topo = scenario_topology(cfg, seed)
    adversary = build_adversary(cfg, topo, seed)
    pinned = load_dodag(cfg.dodag_file) if cfg.dodag_file else None
    if pinned is not None and adversary.has_rank_attackers:
        raise ConfigError("attacker: rank attacks need DODAG formation, not a pinned DODAG")
    # roles are drawn from an honest formation so they do not shift with the attack
    honest = build_routing_state(topo, cfg.radio, {}, dodag=pinned)
    sources, members = pick_roles(cfg, honest, seed)
    state = build_routing_state(topo, cfg.radio, {GROUP_ID: set(members)},
                                advertise=adversary.advertise if adversary.has_rank_attackers else None,
                                dodag=pinned)
    proto = make_protocol(protocol, state, cfg, seed)
    sim = Simulation(state, proto, adversary, trace=cfg.trace if trace is None else trace,
                     loss_rng=random.Random(f"{seed}:loss"))
    schedule_traffic(sim, cfg, sources, seed)
    sim.run()
    return RunResult(protocol, seed, cfg, sim.metrics(), sources, members,
                     adversary.metadata(), sim)
