"""Misbehaving nodes: blackhole and rank attack with selective discard."""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .errors import ConfigError
from .packet import MulticastPacket
from .topology import ROOT_ID


class AttackKind(str, Enum):
    NONE = "none"
    BLACKHOLE = "blackhole"
    RANK = "rank"


@dataclass(frozen=True)
class Behavior:
    kind: AttackKind = AttackKind.NONE
    rank_delta: int = 2
    discard_probability: float = 0.5

    @property
    def honest(self) -> bool:
        return self.kind is AttackKind.NONE


HONEST = Behavior()


def place_attackers(nodes: Iterable[int], fraction: float, behavior: Behavior,
                    seed: int, root: int = ROOT_ID) -> dict[int, Behavior]:
    """Seeded sample of ``round(fraction * non-root count)`` attackers; root never chosen."""
    if not 0.0 <= fraction <= 1.0:
        raise ConfigError(f"attacker fraction {fraction} outside [0, 1]")
    candidates = sorted(n for n in nodes if n != root)
    count = round(fraction * len(candidates))
    if count == 0 or behavior.honest:
        return {}
    rng = random.Random(f"{seed}:attackers")
    return {n: behavior for n in sorted(rng.sample(candidates, count))}


def rank_attack_advertise(behavior: Behavior, true_rank: int) -> int:
    if behavior.kind is not AttackKind.RANK or true_rank == 0:
        return true_rank
    return max(1, true_rank - behavior.rank_delta)


def blackhole_filter(behavior: Behavior, pkt: MulticastPacket) -> bool:
    """True when the node drops ``pkt`` instead of forwarding it."""
    return behavior.kind is AttackKind.BLACKHOLE


def selective_discard(behavior: Behavior, pkt: MulticastPacket, rng: random.Random) -> bool:
    if behavior.kind is not AttackKind.RANK:
        return False
    return rng.random() < behavior.discard_probability


class Adversary:
    """Per-run view of who misbehaves, with node-scoped RNG streams."""

    def __init__(self, roster: dict[int, Behavior], seed: int = 0):
        if ROOT_ID in roster:
            raise ConfigError("the root cannot be an attacker")
        self.roster = roster
        self.seed = seed
        self._rngs: dict[int, random.Random] = {}

    def behavior(self, node: int) -> Behavior:
        return self.roster.get(node, HONEST)

    def advertise(self, node: int, true_rank: int) -> int:
        return rank_attack_advertise(self.behavior(node), true_rank)

    def drops(self, node: int, pkt: MulticastPacket) -> bool:
        b = self.roster.get(node)
        if b is None:
            return False
        if b.kind is AttackKind.BLACKHOLE:
            return blackhole_filter(b, pkt)
        rng = self._rngs.get(node)
        if rng is None:
            rng = self._rngs[node] = random.Random(f"{self.seed}:discard:{node}")
        return selective_discard(b, pkt, rng)

    @property
    def has_rank_attackers(self) -> bool:
        return any(b.kind is AttackKind.RANK for b in self.roster.values())

    def metadata(self) -> list[dict]:
        return [{"node": n, "kind": b.kind.value, "rank_delta": b.rank_delta,
                 "discard_probability": b.discard_probability}
                for n, b in sorted(self.roster.items())]
