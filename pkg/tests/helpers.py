"""Small hand-built networks and a random-scenario builder shared by the tests."""

from __future__ import annotations

import math
import random

from recoup.adversary import Adversary
from recoup.dodag import build_routing_state
from recoup.engine import Simulation
from recoup.fixture import PROTOCOL_CLASSES
from recoup.runner import GROUP_ID
from recoup.topology import Position, RadioConfig, Topology, generate_topology

RADIO = RadioConfig()


def topo_from(points: dict[int, tuple[float, float]], area=(200.0, 200.0)) -> Topology:
    return Topology({n: Position(float(x), float(y)) for n, (x, y) in points.items()}, area)


def chain(length: int, spacing: float = 20.0) -> Topology:
    """Root at the origin, nodes 1..length on a line, each only reaching its neighbors."""
    return topo_from({n: (n * spacing, 0.0) for n in range(length + 1)})


def state_for(topo: Topology, members=(), radio: RadioConfig = RADIO, **kw):
    return build_routing_state(topo, radio, {GROUP_ID: set(members)}, **kw)


def simulate(state, protocol: str, sends, adversary=None, trace=True, **proto_kw) -> Simulation:
    """``sends`` is a list of (source, seq, time)."""
    sim = Simulation(state, PROTOCOL_CLASSES[protocol](state, **proto_kw), adversary or Adversary({}),
                     trace=trace)
    for src, seq, at in sends:
        sim.send_packet(src, GROUP_ID, seq, at)
    sim.run()
    return sim


def random_scenario(seed: int, n_nodes: int, area: float | None = None, sink_fraction: float = 0.4):
    """A connected-enough random network with a random group and up to 3 sources."""
    rng = random.Random(f"scenario:{seed}")
    side = area if area is not None else max(60.0, 13.0 * n_nodes ** 0.5)
    topo = generate_topology(n_nodes, (side, side), seed)
    base = build_routing_state(topo, RADIO, {})
    joined = [n for n in base.dodag.joined if n != 0]
    members = set(rng.sample(joined, round(sink_fraction * len(joined)))) if joined else set()
    sources = sorted(rng.sample(joined, min(3, len(joined))))
    return state_for(topo, members), sources


def check_invariants(state, protocol, sim):
    by_id = {e["tx"]: e for e in sim.trace}
    clusters = state.clusters
    root = state.dodag.root

    # at most one application delivery per (node, packet)
    assert all(c == 1 for c in sim.deliveries.copies.values()), protocol
    assert len(sim.deliveries.records) == len(sim.deliveries.copies)

    # bounded work per packet
    bound = len(state.dodag.joined) * (max(state.dodag.rank.values()) + 1)
    per_pkt: dict = {}
    for e in sim.trace:
        per_pkt[e["seq"], e["src"]] = per_pkt.get((e["seq"], e["src"]), 0) + 1
    assert all(v <= bound for v in per_pkt.values())

    for e in sim.trace:
        cause = by_id.get(e["cause"])
        if cause is None:
            continue
        came_from = cause["sender"]
        delegation = protocol == "esmrf" and cause["c2c"] == 0 and e["c2c"] == 1
        if not delegation:
            # never hand a copy straight back to whoever sent it
            assert came_from not in e["targets"], (protocol, e)
        if e["dir"] == "inter" and e["sender"] != root:
            back = clusters.get(came_from)
            assert all(clusters[t] != back for t in e["targets"]), (protocol, e)
            assert all(clusters[t] != clusters[e["sender"]] for t in e["targets"])
        # c_travel only grows, pkt_drop never grows
        assert set(cause["c_travel"]) <= set(e["c_travel"])
        assert e["pkt_drop"] <= cause["pkt_drop"]
        # past the root or an inter-cluster phase, copies only go down
        if cause["c2c"] == 1:
            assert e["c2c"] == 1 and e["dir"] == "down", (protocol, e)


def isolated_branches(rng: random.Random):
    """2 or 3 radial chains far enough apart that no two clusters hear each other."""
    pts = {0: (0.0, 0.0)}
    node = 1
    branches = rng.randint(2, 3)
    for b in range(branches):
        ang = 2 * math.pi * b / branches + rng.uniform(-0.05, 0.05)
        r = 0.0
        for hop in range(rng.randint(1, 8)):
            r += rng.uniform(20, 24) if hop == 0 else rng.uniform(14, 22)
            pts[node] = (r * math.cos(ang), r * math.sin(ang))
            node += 1
    return topo_from(pts, area=(400.0, 400.0))


def scenario_sends(sources):
    return [(src, k, 5 * i + 300 * k) for i, src in enumerate(sources) for k in range(2)]
