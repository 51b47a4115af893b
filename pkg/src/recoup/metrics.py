"""Delivery bookkeeping and the per-run metric set."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .packet import MulticastPacket
from .topology import EnergyLedger


@dataclass(frozen=True)
class DeliveryRecord:
    node: int
    src: int
    group: int
    seq: int
    latency: int | float
    via: int | None
    self_delivery: bool = False


class DeliveryLog:
    """Application-layer delivery ledger: at most one record per (node, src, group, seq)."""

    def __init__(self):
        self.records: dict[tuple[int, int, int, int], DeliveryRecord] = {}
        self.copies: dict[tuple[int, int, int, int], int] = {}

    def deliver_local(self, node: int, pkt: MulticastPacket, members, now) -> DeliveryRecord | None:
        if node not in members:
            return None
        k = (node, pkt.src, pkt.group, pkt.seq)
        self.copies[k] = self.copies.get(k, 0) + 1
        if k in self.records:
            return None
        rec = DeliveryRecord(node, pkt.src, pkt.group, pkt.seq, now - pkt.created_at,
                             pkt.via, self_delivery=(node == pkt.src))
        self.records[k] = rec
        return rec

    def remote(self) -> list[DeliveryRecord]:
        return [r for r in self.records.values() if not r.self_delivery]


def deliver_local(log: DeliveryLog, node: int, pkt: MulticastPacket, members, now):
    return log.deliver_local(node, pkt, members, now)


def compute_pdr(delivered: int, expected: int) -> float | None:
    if expected == 0:
        return None
    return delivered / expected


def compute_eed(records: list[DeliveryRecord]) -> float | None:
    if not records:
        return None
    return sum(r.latency for r in records) / len(records)


def compute_energy(ledger: EnergyLedger, delivered: int) -> tuple[float | None, float]:
    total = ledger.total_energy()
    return (total / delivered if delivered else None), total


@dataclass
class RunMetrics:
    pdr: float | None
    mean_eed: float | None
    energy_per_delivered_packet: float | None
    total_energy: float
    tx_count: int
    rx_count: int
    duplicate_count: int
    delivered: int
    expected: int
    packets_sent: int
    dropped_by_attackers: int
    unreachable: list[int] = field(default_factory=list)
    per_node_tx: dict[int, int] = field(default_factory=dict)
    per_node_rx: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_node_tx"] = {str(k): v for k, v in sorted(self.per_node_tx.items())}
        d["per_node_rx"] = {str(k): v for k, v in sorted(self.per_node_rx.items())}
        return d
