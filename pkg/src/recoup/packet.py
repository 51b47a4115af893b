"""Multicast packet header and the actions a protocol hands back to the engine."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple


@dataclass(frozen=True)
class MulticastPacket:
    src: int
    group: int
    seq: int
    created_at: int | float
    src_rank: int = 0
    c2c: int = 0
    pkt_drop: int = 0
    c_travel: frozenset[int] = field(default_factory=frozenset)
    payload_size: int = 64
    # id of the transmission that carried this copy; None at the source
    via: int | None = None

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.src, self.group, self.seq)


class Arrival(str, Enum):
    SELF = "self-originated"
    PARENT = "from-parent"
    CHILD = "from-child"
    FOREIGN = "from-foreign-neighbor"
    SIBLING = "from-sibling"


class Direction(str, Enum):
    UP = "up"
    DOWN = "down"
    INTER = "inter"


class Send(NamedTuple):
    sender: int
    targets: tuple[int, ...]
    broadcast: bool
    direction: Direction
    packet: MulticastPacket


class Deliver(NamedTuple):
    node: int
    packet: MulticastPacket


class Hold(NamedTuple):
    """Ask the engine to call the protocol's timer hook for ``key`` at ``expiry``."""

    node: int
    key: tuple[int, int, int]
    expiry: int | float


class Drop(NamedTuple):
    node: int
    packet: MulticastPacket
    reason: str
