"""Deterministic discrete-event engine driving one protocol over one network."""

from __future__ import annotations

import heapq
import random
from dataclasses import replace

from .adversary import Adversary
from .dodag import RoutingState
from .metrics import (DeliveryLog, RunMetrics, compute_eed, compute_energy,
                      compute_pdr)
from .packet import Arrival, Deliver, Drop, Hold, MulticastPacket, Send
from .routing import ForwardingProtocol
from .topology import EnergyLedger

APP_SEND = "app-send"
HOP_DELIVER = "hop-deliver"
ROOT_TIMER = "root-timer-expiry"


class Simulation:
    """Event queue ordered by (time, ordinal); ordinals are handed out at scheduling time."""

    def __init__(self, state: RoutingState, protocol: ForwardingProtocol,
                 adversary: Adversary | None = None, trace: bool = False,
                 loss_rng: random.Random | None = None):
        self.state = state
        self.protocol = protocol
        self.adversary = adversary or Adversary({})
        self.radio = state.radio
        self.ledger = EnergyLedger(state.radio)
        self.deliveries = DeliveryLog()
        self.loss_rng = loss_rng or random.Random(0)
        self.queue: list = []
        self._ordinal = 0
        self.now = 0
        self.trace: list[dict] | None = [] if trace else None
        self.tx_cause: list[int | None] = []
        self.tx_sender: list[int] = []
        self.duplicates = 0
        self.attack_drops = 0
        self.packets_sent = 0
        self.expected = 0
        self.processed = 0

    # -- scheduling --------------------------------------------------------------
    def schedule(self, time, kind: str, payload) -> None:
        heapq.heappush(self.queue, (time, self._ordinal, kind, payload))
        self._ordinal += 1

    def send_packet(self, node: int, group: int, seq: int, at) -> None:
        self.schedule(at, APP_SEND, (node, group, seq))

    def schedule_hop(self, send: Send, arrival: Arrival) -> int:
        """Charge energy for one transmission and queue its receptions one TX_MP later."""
        tx_id = len(self.tx_cause)
        self.tx_cause.append(send.packet.via)
        self.tx_sender.append(send.sender)
        heard = self.state.neighbors[send.sender] if send.broadcast else send.targets
        self.ledger.record_transmission(send.sender, heard)
        pkt = replace(send.packet, via=tx_id)
        at = self.now + self.radio.tx_time
        lossy = self.radio.delivery_probability < 1.0
        for t in send.targets:
            if lossy and self.loss_rng.random() >= self.radio.delivery_probability:
                continue
            self.schedule(at, HOP_DELIVER, (t, send.sender, pkt))
        if self.trace is not None:
            p = send.packet
            self.trace.append({
                "t": self.now, "tx": tx_id, "cause": p.via, "sender": send.sender,
                "targets": list(send.targets), "receivers": sorted(heard),
                "mode": "broadcast" if send.broadcast else "unicast",
                "dir": send.direction.value, "arrival": arrival.value,
                "src": p.src, "group": p.group, "seq": p.seq,
                "pkt_drop": p.pkt_drop, "c_travel": sorted(p.c_travel), "c2c": p.c2c,
            })
        return tx_id

    # -- main loop -----------------------------------------------------------------
    def run(self) -> None:
        while self.queue:
            time, _, kind, payload = heapq.heappop(self.queue)
            self.now = time
            self.processed += 1
            if kind == HOP_DELIVER:
                node, sender, pkt = payload
                actions = self.protocol.receive(node, pkt, sender, time)
                arrival = self.protocol.arrival_class(node, sender)
                if any(isinstance(a, (Send, Hold)) for a in actions) and self.adversary.drops(node, pkt):
                    self.attack_drops += 1
                    actions = [a for a in actions if not isinstance(a, (Send, Hold))]
                self._apply(actions, arrival)
            elif kind == APP_SEND:
                node, group, seq = payload
                pkt = MulticastPacket(src=node, group=group, seq=seq, created_at=time)
                self.packets_sent += 1
                members = self.state.members(group)
                self.expected += len(members - {node})
                self._apply(self.protocol.originate(node, pkt, time), Arrival.SELF)
            else:
                node, key = payload
                self._apply(self.protocol.on_timer(node, key, time), Arrival.CHILD)
        assert self.protocol.pending_timers() == 0

    def _apply(self, actions, arrival: Arrival) -> None:
        for a in actions:
            if isinstance(a, Send):
                self.schedule_hop(a, arrival)
            elif isinstance(a, Deliver):
                self.deliveries.deliver_local(a.node, a.packet, self.state.members(a.packet.group), self.now)
            elif isinstance(a, Hold):
                self.schedule(a.expiry, ROOT_TIMER, (a.node, a.key))
            elif isinstance(a, Drop) and a.reason == "duplicate":
                self.duplicates += 1

    # -- results -------------------------------------------------------------------
    def required_transmissions(self) -> set[int]:
        """Transmissions on the causal path of at least one first-copy remote delivery."""
        needed: set[int] = set()
        for rec in self.deliveries.remote():
            tx = rec.via
            while tx is not None and tx not in needed:
                needed.add(tx)
                tx = self.tx_cause[tx]
        return needed

    def metrics(self) -> RunMetrics:
        remote = self.deliveries.remote()
        ecp, total = compute_energy(self.ledger, len(remote))
        return RunMetrics(
            pdr=compute_pdr(len(remote), self.expected),
            mean_eed=compute_eed(remote),
            energy_per_delivered_packet=ecp,
            total_energy=total,
            tx_count=self.ledger.total_tx,
            rx_count=self.ledger.total_rx,
            duplicate_count=self.duplicates,
            delivered=len(remote),
            expected=self.expected,
            packets_sent=self.packets_sent,
            dropped_by_attackers=self.attack_drops,
            unreachable=sorted(self.state.dodag.unreachable),
            per_node_tx=dict(self.ledger.tx_count),
            per_node_rx=dict(self.ledger.rx_count),
        )
