"""ESMRF- and BMRF-style forwarding over the same DODAG, for comparison runs."""

from __future__ import annotations

from dataclasses import replace
from enum import Enum

from .packet import Arrival, Direction, Drop, MulticastPacket, Send
from .routing import ForwardingProtocol, ofm_downward


class BaselineKind(str, Enum):
    ESMRF = "esmrf"
    BMRF = "bmrf"


class Esmrf(ForwardingProtocol):
    """Sources delegate to the root, which alone disseminates downward.

    The delegation leg is an encapsulated unicast (``c2c == 0`` on the way up):
    relays neither deliver nor record it. Downward forwarding is one unicast
    per interested child.
    """

    name = "esmrf"

    def _down(self, node: int, pkt: MulticastPacket) -> list[Send]:
        return [Send(node, (c,), False, Direction.DOWN, pkt)
                for c in sorted(self._ic(node, pkt.group))]

    def _disseminate(self, pkt: MulticastPacket) -> list:
        if self.dd(self.root).is_duplicate(pkt.key):
            return [Drop(self.root, pkt, "duplicate")]
        out = replace(pkt, c2c=1)
        return self._deliver(self.root, out) + self._down(self.root, out)

    def originate(self, node: int, pkt: MulticastPacket, now) -> list:
        pkt = replace(pkt, src_rank=self.dodag.true_rank[node])
        if node == self.root:
            return self._disseminate(pkt)
        return self._deliver(node, pkt) + self._up(node, replace(pkt, c2c=0))

    def receive(self, node: int, pkt: MulticastPacket, sender: int, now) -> list:
        if pkt.c2c == 0:
            # still encapsulated
            if node == self.root:
                return self._disseminate(pkt)
            return self._up(node, pkt)
        if self.dd(node).is_duplicate(pkt.key):
            return [Drop(node, pkt, "duplicate")]
        # the root's copy can pass back through the source on its way to the
        # source's own subtree; the source already delivered at origination
        local = [] if node == pkt.src else self._deliver(node, pkt)
        return local + self._down(node, pkt)


class Bmrf(ForwardingProtocol):
    """Bidirectional forwarding: climb to the root while serving subtrees on the way."""

    name = "bmrf"

    def originate(self, node: int, pkt: MulticastPacket, now) -> list:
        pkt = replace(pkt, src_rank=self.dodag.true_rank[node])
        self.dd(node).is_duplicate(pkt.key)
        ic = self._ic(node, pkt.group)
        return (self._deliver(node, pkt) + self._up(node, pkt)
                + ofm_downward(node, pkt, ic, self.ofm_threshold))

    def receive(self, node: int, pkt: MulticastPacket, sender: int, now) -> list:
        if self.dd(node).is_duplicate(pkt.key):
            return [Drop(node, pkt, "duplicate")]
        actions = self._deliver(node, pkt)
        ic = self._ic(node, pkt.group)
        if self.arrival_class(node, sender) is Arrival.PARENT:
            return actions + ofm_downward(node, pkt, ic, self.ofm_threshold)
        return (actions + self._up(node, pkt)
                + ofm_downward(node, pkt, ic - {sender}, self.ofm_threshold))
