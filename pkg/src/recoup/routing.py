"""RECOUP forwarding: root hold-and-forward plus cluster-aware node logic."""

from __future__ import annotations

import random
from collections import OrderedDict
from dataclasses import dataclass, field, replace

from .dodag import RoutingState
from .packet import Arrival, Deliver, Direction, Drop, Hold, MulticastPacket, Send

DEFAULT_OFM_THRESHOLD = 3
DEFAULT_DD_CAPACITY = 100


def compute_f_time(src_rank, tx_mp, alpha):
    """Root hold time for a packet whose source sits at ``src_rank``."""
    if not tx_mp > 0:
        raise ValueError("tx_mp must be positive")
    return tx_mp * src_rank + alpha


@dataclass
class AlphaState:
    """Adaptive slack for one (source, group) session at the root."""

    alpha: int | float = 0
    prev_f_time: int | float | None = None
    # arrival offset of the last copy of the previous round, relative to its first copy
    last_all_copies_time: int | float | None = None


def update_alpha(state: AlphaState):
    raw = state.alpha + (state.last_all_copies_time - state.prev_f_time)
    return max(0, raw)


class DuplicateTable:
    """FIFO-bounded set of (src, group, seq) keys."""

    def __init__(self, capacity: int = DEFAULT_DD_CAPACITY):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._keys: OrderedDict[tuple, None] = OrderedDict()

    def __contains__(self, key) -> bool:
        return key in self._keys

    def __len__(self) -> int:
        return len(self._keys)

    def is_duplicate(self, key) -> bool:
        if key in self._keys:
            return True
        if len(self._keys) >= self.capacity:
            self._keys.popitem(last=False)
        self._keys[key] = None
        return False


def is_duplicate(dd_tab: DuplicateTable, key) -> bool:
    return dd_tab.is_duplicate(key)


def ofm_downward(node: int, pkt: MulticastPacket, interested: frozenset[int] | set[int],
                 threshold: int = DEFAULT_OFM_THRESHOLD) -> list[Send]:
    """Mixed-mode downward forwarding: unicasts below ``threshold``, else one broadcast."""
    if not interested:
        return []
    kids = tuple(sorted(interested))
    if len(kids) >= threshold:
        return [Send(node, kids, True, Direction.DOWN, pkt)]
    return [Send(node, (k,), False, Direction.DOWN, pkt) for k in kids]


def select_inter_cluster_targets(state: RoutingState, node: int, pkt: MulticastPacket,
                                 exclude: frozenset[int] | set[int] = frozenset(),
                                 rng: random.Random | None = None) -> list[int]:
    """One neighbor per foreign cluster the packet has not entered yet.

    Default choice is the highest-ranked neighbor, lowest id on ties; with
    ``rng`` the pick is uniform among that cluster's neighbors.
    """
    targets = []
    for cid in sorted(state.foreign.get(node, {})):
        if cid in pkt.c_travel or cid in exclude:
            continue
        entries = state.foreign[node][cid]
        if rng is not None:
            pick = rng.choice(entries)
        else:
            pick = max(entries, key=lambda e: (e.rank, -e.neighbor))
        targets.append(pick.neighbor)
    return targets


class ForwardingProtocol:
    """Shared plumbing for the three protocols; subclasses fill in the rules."""

    name = "base"

    def __init__(self, state: RoutingState, ofm_threshold: int = DEFAULT_OFM_THRESHOLD,
                 dd_capacity: int = DEFAULT_DD_CAPACITY):
        self.state = state
        self.dodag = state.dodag
        self.root = state.dodag.root
        self.ofm_threshold = ofm_threshold
        self.dd_capacity = dd_capacity
        self._dd: dict[int, DuplicateTable] = {}

    def dd(self, node: int) -> DuplicateTable:
        tab = self._dd.get(node)
        if tab is None:
            tab = self._dd[node] = DuplicateTable(self.dd_capacity)
        return tab

    def arrival_class(self, node: int, sender: int | None) -> Arrival:
        if sender is None:
            return Arrival.SELF
        if self.dodag.parent.get(node) == sender:
            return Arrival.PARENT
        if self.dodag.parent.get(sender) == node:
            return Arrival.CHILD
        clusters = self.state.clusters
        if clusters.get(sender) != clusters.get(node):
            return Arrival.FOREIGN
        return Arrival.SIBLING

    def _deliver(self, node: int, pkt: MulticastPacket) -> list:
        return [Deliver(node, pkt)] if node in self.state.members(pkt.group) else []

    def _up(self, node: int, pkt: MulticastPacket) -> list[Send]:
        par = self.dodag.parent[node]
        return [] if par is None else [Send(node, (par,), False, Direction.UP, pkt)]

    def _ic(self, node: int, group: int) -> frozenset[int]:
        return self.state.interested_children(node, group)

    def originate(self, node: int, pkt: MulticastPacket, now) -> list:
        raise NotImplementedError

    def receive(self, node: int, pkt: MulticastPacket, sender: int, now) -> list:
        raise NotImplementedError

    def on_timer(self, node: int, key, now) -> list:
        return []

    def pending_timers(self) -> int:
        return 0


@dataclass
class DDEntry:
    key: tuple[int, int, int]
    packet: MulticastPacket
    first_arrival: int | float
    f_time: int | float
    cid_visit: set[int] = field(default_factory=set)
    last_offset: int | float = 0

    @property
    def f_time_expiry(self):
        return self.first_arrival + self.f_time


class Recoup(ForwardingProtocol):
    name = "recoup"

    def __init__(self, state: RoutingState, ofm_threshold: int = DEFAULT_OFM_THRESHOLD,
                 dd_capacity: int = DEFAULT_DD_CAPACITY, alpha_initial=0,
                 neighbor_rng: random.Random | None = None):
        super().__init__(state, ofm_threshold, dd_capacity)
        self.tx_time = state.radio.tx_time
        self.alpha_initial = alpha_initial
        self.neighbor_rng = neighbor_rng
        self.holds: dict[tuple, DDEntry] = {}
        self.sessions: dict[tuple[int, int], AlphaState] = {}
        # last forwarded round per session: key -> (session, entry)
        self._closed: dict[tuple, tuple[AlphaState, DDEntry]] = {}
        self._session_round: dict[tuple[int, int], tuple] = {}

    # -- helpers -----------------------------------------------------------
    def _inter(self, node: int, pkt: MulticastPacket, exclude=frozenset()) -> list[int]:
        return select_inter_cluster_targets(self.state, node, pkt, exclude, self.neighbor_rng)

    def _fan_out(self, node: int, pkt: MulticastPacket, ic, inter: list[int], up: bool) -> list[Send]:
        sends = self._up(node, pkt) if up else []
        sends += ofm_downward(node, pkt, ic, self.ofm_threshold)
        sends += [Send(node, (t,), False, Direction.INTER, pkt) for t in inter]
        return sends

    def _with_targets(self, pkt: MulticastPacket, inter: list[int], **changes) -> MulticastPacket:
        clusters = self.state.clusters
        c_travel = pkt.c_travel | {clusters[t] for t in inter}
        return replace(pkt, c_travel=frozenset(c_travel), **changes)

    # -- entry points --------------------------------------------------------
    def originate(self, node: int, pkt: MulticastPacket, now) -> list:
        self.dd(node).is_duplicate(pkt.key)
        actions = self._deliver(node, pkt)
        if node == self.root:
            out = replace(pkt, c2c=1, src_rank=0)
            return actions + ofm_downward(node, out, self._ic(node, pkt.group), self.ofm_threshold)
        rank = self.dodag.true_rank[node]
        seeded = replace(pkt, src_rank=rank, pkt_drop=rank, c2c=0,
                         c_travel=frozenset({self.state.clusters[node]}))
        inter = self._inter(node, seeded)
        out = self._with_targets(seeded, inter)
        return actions + self._fan_out(node, out, self._ic(node, pkt.group), inter, up=True)

    def receive(self, node: int, pkt: MulticastPacket, sender: int, now) -> list:
        if node == self.root:
            return self.route_at_root(pkt, sender, now)
        if self.dd(node).is_duplicate(pkt.key):
            return [Drop(node, pkt, "duplicate")]
        return self.route_at_node(node, pkt, self.arrival_class(node, sender), sender)

    def route_at_node(self, node: int, pkt: MulticastPacket, arrival: Arrival, sender: int) -> list:
        actions = self._deliver(node, pkt)
        ic = self._ic(node, pkt.group)
        if arrival is Arrival.PARENT:
            inter = []
            if pkt.c2c == 0 and pkt.pkt_drop > 0:
                inter = self._inter(node, pkt)
            out = self._with_targets(pkt, inter)
            return actions + self._fan_out(node, out, ic, inter, up=False)
        # from a child or a foreign-cluster neighbor
        ic = ic - {sender}
        if pkt.pkt_drop > 0:
            inter = self._inter(node, pkt, exclude={self.state.clusters[sender]})
            out = self._with_targets(pkt, inter, pkt_drop=pkt.pkt_drop - 1)
        else:
            inter, out = [], pkt
        return actions + self._fan_out(node, out, ic, inter, up=True)

    def route_at_root(self, pkt: MulticastPacket, sender: int, now) -> list:
        key = pkt.key
        arrival_cluster = self.state.clusters[sender]
        entry = self.holds.get(key)
        if entry is not None:
            entry.cid_visit.add(arrival_cluster)
            entry.last_offset = max(entry.last_offset, now - entry.first_arrival)
            return [Drop(self.root, pkt, "duplicate")]
        if self.dd(self.root).is_duplicate(key):
            closed = self._closed.get(key)
            if closed is not None:
                session, done = closed
                offset = now - done.first_arrival
                if offset > session.last_all_copies_time:
                    session.last_all_copies_time = offset
            return [Drop(self.root, pkt, "duplicate")]

        sid = (pkt.src, pkt.group)
        session = self.sessions.get(sid)
        if session is None:
            session = self.sessions[sid] = AlphaState(alpha=self.alpha_initial)
        elif session.prev_f_time is not None:
            session.alpha = update_alpha(session)
            session.prev_f_time = None
            self._closed.pop(self._session_round.get(sid), None)
        f_time = compute_f_time(pkt.src_rank, self.tx_time, session.alpha)
        entry = DDEntry(key, pkt, now, f_time, {arrival_cluster})
        self.holds[key] = entry
        return self._deliver(self.root, pkt) + [Hold(self.root, key, now + f_time)]

    def on_timer(self, node: int, key, now) -> list:
        entry = self.holds.pop(key)
        pkt = entry.packet
        sid = (pkt.src, pkt.group)
        session = self.sessions[sid]
        session.prev_f_time = entry.f_time
        session.last_all_copies_time = entry.last_offset
        self._closed[key] = (session, entry)
        self._session_round[sid] = key

        clusters = self.state.clusters
        ic_new = {c for c in self._ic(self.root, pkt.group) if clusters[c] not in entry.cid_visit}
        if not ic_new:
            return [Drop(self.root, pkt, "clusters-served")]
        out = replace(pkt, c2c=1)
        return ofm_downward(self.root, out, ic_new, self.ofm_threshold)

    def pending_timers(self) -> int:
        return len(self.holds)
