"""DODAG formation, cluster overlay, neighbor tables and downward routes.

Control traffic (DIO/DIS/DAO/DAO-ACK) is not simulated; formation is a
single batch wave at time 0 producing read-only routing state.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping

from .errors import ConfigError, FormationError
from .topology import ROOT_ID, RadioConfig, Topology


class Relation(str, Enum):
    PARENT = "preferred-parent"
    CHILD = "child"
    SIBLING = "sibling-same-cluster"
    FOREIGN = "foreign-cluster"


@dataclass(frozen=True)
class NeighborEntry:
    neighbor: int
    cluster: int | None
    rank: int
    relation: Relation


@dataclass
class Dodag:
    root: int
    rank: dict[int, int]            # rank each node advertises
    parent: dict[int, int | None]
    unreachable: set[int] = field(default_factory=set)
    true_rank: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.true_rank:
            self.true_rank = dict(self.rank)
        self.children: dict[int, list[int]] = {n: [] for n in self.rank}
        for node, par in sorted(self.parent.items()):
            if par is not None:
                self.children[par].append(node)

    @property
    def joined(self) -> list[int]:
        return sorted(self.rank)

    def path_to_root(self, node: int) -> list[int]:
        path = [node]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
            if len(path) > len(self.rank) + 1:
                raise FormationError("parent pointers contain a cycle")
        return path

    def descendants(self, node: int) -> list[int]:
        out, stack = [], list(self.children[node])
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(self.children[n])
        return out


def form_dodag(topology: Topology, radio: RadioConfig, root: int = ROOT_ID,
               advertise: Callable[[int, int], int] | None = None,
               neighbors: Mapping[int, list[int]] | None = None) -> Dodag:
    """Run one DIO wave outward from ``root``.

    Objective function is minimum hop count; ties go to the lowest parent id.
    A node attaches once and never switches parent afterwards. ``advertise``
    maps (node, true_rank) to the rank the node announces in its DIOs; it is
    the hook the rank attack uses.
    """
    if root not in topology.positions:
        raise ConfigError(f"root {root} not in topology")
    nbrs = neighbors if neighbors is not None else topology.neighbors(radio)
    if not nbrs[root]:
        raise FormationError("root is isolated: 0 nodes joined the DODAG")

    advertised = {root: 0}
    true_rank = {root: 0}
    parent: dict[int, int | None] = {root: None}
    best: dict[int, tuple[int, int]] = {}   # node -> (candidate rank, parent)
    heap: list[tuple[int, int]] = []

    def offer(from_node: int) -> None:
        cand = advertised[from_node] + 1
        for nb in nbrs[from_node]:
            if nb in parent:
                continue
            if (cand, from_node) < best.get(nb, (cand + 1, 0)):
                best[nb] = (cand, from_node)
                heapq.heappush(heap, (cand, nb))

    offer(root)
    while heap:
        cand, node = heapq.heappop(heap)
        if node in parent or best[node][0] != cand:
            continue
        rank, par = best[node]
        parent[node] = par
        true_rank[node] = rank
        advertised[node] = advertise(node, rank) if advertise else rank
        offer(node)

    unreachable = set(topology.positions) - set(parent)
    return Dodag(root, advertised, parent, unreachable, true_rank)


def assign_clusters(dodag: Dodag) -> dict[int, int]:
    """Cluster id of every joined non-root node: its rank-1 ancestor's id."""
    clusters: dict[int, int] = {}
    for head in dodag.children[dodag.root]:
        clusters[head] = head
        for d in dodag.descendants(head):
            clusters[d] = head
    return clusters


def build_neighbor_tables(neighbors: Mapping[int, list[int]], dodag: Dodag,
                          clusters: Mapping[int, int]) -> dict[int, list[NeighborEntry]]:
    tables: dict[int, list[NeighborEntry]] = {}
    for node in dodag.joined:
        own = clusters.get(node)
        kids = set(dodag.children[node])
        rows = []
        for nb in sorted(neighbors[node]):
            if nb not in dodag.rank:
                continue
            cl = clusters.get(nb)
            if nb == dodag.parent[node]:
                rel = Relation.PARENT
            elif nb in kids:
                rel = Relation.CHILD
            elif own is not None and cl is not None and cl != own:
                rel = Relation.FOREIGN
            else:
                rel = Relation.SIBLING
            rows.append(NeighborEntry(nb, cl, dodag.rank[nb], rel))
        tables[node] = rows
    return tables


def build_downward_routes(dodag: Dodag, groups: Mapping[int, set[int]]) -> dict[int, dict[int, frozenset[int]]]:
    """Storing-mode tables: node -> group -> children leading to a member.

    Built by pushing each member's registration up its parent chain, the
    same way DAOs propagate.
    """
    routes: dict[int, dict[int, set[int]]] = {n: {} for n in dodag.joined}
    for gid, members in groups.items():
        for m in members:
            if m not in dodag.rank:
                continue
            child = m
            node = dodag.parent[m]
            while node is not None:
                slot = routes[node].setdefault(gid, set())
                if child in slot:
                    break
                slot.add(child)
                child, node = node, dodag.parent[node]
    return {n: {g: frozenset(c) for g, c in tab.items()} for n, tab in routes.items()}


@dataclass
class RoutingState:
    """Everything formation produces for one run; read-only afterwards."""

    topology: Topology
    radio: RadioConfig
    neighbors: dict[int, list[int]]
    dodag: Dodag
    clusters: dict[int, int]
    ntab: dict[int, list[NeighborEntry]]
    groups: dict[int, set[int]]
    routes: dict[int, dict[int, frozenset[int]]]

    def __post_init__(self):
        # per node: foreign cluster -> candidate neighbor entries
        self.foreign: dict[int, dict[int, list[NeighborEntry]]] = {}
        for node, rows in self.ntab.items():
            by_cluster: dict[int, list[NeighborEntry]] = {}
            for e in rows:
                if e.relation is Relation.FOREIGN:
                    by_cluster.setdefault(e.cluster, []).append(e)
            self.foreign[node] = by_cluster

    def interested_children(self, node: int, group: int) -> frozenset[int]:
        return self.routes.get(node, {}).get(group, frozenset())

    def members(self, group: int) -> set[int]:
        return self.groups.get(group, set())


def build_routing_state(topology: Topology, radio: RadioConfig, groups: Mapping[int, set[int]],
                        advertise: Callable[[int, int], int] | None = None,
                        dodag: Dodag | None = None,
                        neighbors: dict[int, list[int]] | None = None) -> RoutingState:
    if neighbors is None:
        neighbors = topology.neighbors(radio)
    if dodag is None:
        dodag = form_dodag(topology, radio, advertise=advertise, neighbors=neighbors)
    else:
        check_pinned_dodag(dodag, neighbors)
        dodag.unreachable = set(topology.positions) - set(dodag.rank)
    clusters = assign_clusters(dodag)
    ntab = build_neighbor_tables(neighbors, dodag, clusters)
    joined_groups = {g: {m for m in ms if m in dodag.rank} for g, ms in groups.items()}
    routes = build_downward_routes(dodag, joined_groups)
    return RoutingState(topology, radio, neighbors, dodag, clusters, ntab, joined_groups, routes)


def rebuild(state: RoutingState, *, remove: int | None = None, add: tuple[int, object] | None = None,
            advertise: Callable[[int, int], int] | None = None) -> RoutingState:
    """Recompute everything after a node leaves or joins (no incremental repair)."""
    topo = state.topology
    groups = {g: set(ms) for g, ms in state.groups.items()}
    if remove is not None:
        topo = topo.without(remove)
        for ms in groups.values():
            ms.discard(remove)
    if add is not None:
        topo = topo.with_node(*add)
    return build_routing_state(topo, state.radio, groups, advertise=advertise)


def check_pinned_dodag(dodag: Dodag, neighbors: Mapping[int, list[int]]) -> None:
    for node, par in dodag.parent.items():
        if par is None:
            if node != dodag.root or dodag.rank[node] != 0:
                raise ConfigError(f"node {node} has no parent but is not the root")
            continue
        if par not in neighbors.get(node, ()):
            raise ConfigError(f"pinned parent {par} of node {node} is out of radio range")
        if dodag.true_rank[node] != dodag.rank[par] + 1:
            raise ConfigError(f"pinned rank of node {node} is not parent rank + 1")
    for node in dodag.rank:
        dodag.path_to_root(node)


def dodag_to_dict(dodag: Dodag, clusters: Mapping[int, int]) -> dict:
    return {
        "schema": "recoup-dodag/1",
        "root": dodag.root,
        "nodes": [{"id": n, "rank": dodag.rank[n], "parent": dodag.parent[n],
                   "cluster": clusters.get(n)} for n in dodag.joined],
        "unreachable": sorted(dodag.unreachable),
    }


def dodag_from_dict(data: dict) -> Dodag:
    try:
        rows = data["nodes"]
        rank = {int(r["id"]): int(r["rank"]) for r in rows}
        parent = {int(r["id"]): (None if r["parent"] is None else int(r["parent"])) for r in rows}
        root = int(data.get("root", ROOT_ID))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed DODAG dump: {exc}") from exc
    for n, p in parent.items():
        if p is not None and p not in rank:
            raise ConfigError(f"node {n} has parent {p} which is not in the dump")
    return Dodag(root, rank, parent, set(data.get("unreachable", ())))


def save_dodag(dodag: Dodag, clusters: Mapping[int, int], path: str | Path) -> None:
    Path(path).write_text(json.dumps(dodag_to_dict(dodag, clusters), indent=1) + "\n")


def load_dodag(path: str | Path) -> Dodag:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read DODAG dump {path}: {exc}") from exc
    return dodag_from_dict(data)
