from fractions import Fraction

import pytest

from helpers import chain, simulate, state_for, topo_from
from recoup.fixture import load_fixture, single_packet
from recoup.packet import Arrival, Direction, Hold, MulticastPacket
from recoup.routing import (AlphaState, DuplicateTable, Recoup, compute_f_time, is_duplicate,
                            ofm_downward, select_inter_cluster_targets, update_alpha)
from recoup.topology import RadioConfig


@pytest.mark.parametrize("rank, tx, alpha, want", [(4, 10, 0, 40), (0, 8, 0, 0), (0, 99, 0, 0), (3, 8, 5, 29)])
def test_f_time_examples(rank, tx, alpha, want):
    assert compute_f_time(rank, tx, alpha) == want


@pytest.mark.parametrize("prev, last, f_prev, want", [(0, 50, 40, 10), (10, 45, 50, 5), (0, 30, 40, 0)])
def test_alpha_examples(prev, last, f_prev, want):
    assert update_alpha(AlphaState(prev, f_prev, last)) == want


def test_f_time_exact_rational():
    assert compute_f_time(3, Fraction(17, 3), Fraction(1, 6)) == Fraction(103, 6)


def test_f_time_rejects_zero_tx():
    with pytest.raises(ValueError):
        compute_f_time(2, 0, 0)


def test_duplicate_table():
    dd = DuplicateTable()
    assert not is_duplicate(dd, (1, 1, 0))
    assert is_duplicate(dd, (1, 1, 0))
    assert not is_duplicate(dd, (1, 2, 0))


def test_duplicate_eviction_at_capacity():
    dd = DuplicateTable(100)
    for s in range(100):
        dd.is_duplicate((5, 1, s))
    assert not dd.is_duplicate((5, 1, 100))
    assert len(dd) == 100
    assert (5, 1, 0) not in dd and (5, 1, 1) in dd


PKT = MulticastPacket(src=9, group=1, seq=0, created_at=0)


def test_ofm_boundary():
    assert ofm_downward(0, PKT, set()) == []
    two = ofm_downward(0, PKT, {4, 2})
    assert [s.targets for s in two] == [(2,), (4,)] and not any(s.broadcast for s in two)
    three = ofm_downward(0, PKT, {1, 2, 3})
    assert len(three) == 1 and three[0].broadcast and three[0].targets == (1, 2, 3)
    assert three[0].direction is Direction.DOWN


def test_inter_cluster_example_network():
    st = load_fixture().state()
    pkt = MulticastPacket(31, 1, 0, 0, c_travel=frozenset({st.clusters[31]}))
    assert select_inter_cluster_targets(st, 31, pkt) == [34]
    done = MulticastPacket(31, 1, 0, 0, c_travel=frozenset({st.clusters[31], st.clusters[34]}))
    assert select_inter_cluster_targets(st, 31, done) == []


def three_cluster_hub():
    # node 4 (cluster 1) hears 6, 7 and 8, one from each of clusters 2, 3 and 5
    links = [(0, 1), (0, 2), (0, 3), (0, 5), (1, 4), (2, 6), (3, 7), (5, 8), (4, 6), (4, 7), (4, 8)]
    nbrs = {n: [] for n in range(9)}
    for a, b in links:
        nbrs[a].append(b)
        nbrs[b].append(a)
    topo = topo_from({n: (3 * n, 0) for n in range(9)})
    return state_for(topo, neighbors={n: sorted(v) for n, v in nbrs.items()})


def test_inter_cluster_three_clusters():
    st = three_cluster_hub()
    assert sorted(st.foreign[4]) == [2, 3, 5]
    pkt = MulticastPacket(4, 1, 0, 0, c_travel=frozenset({1}))
    assert select_inter_cluster_targets(st, 4, pkt) == [6, 7, 8]
    pkt2 = MulticastPacket(4, 1, 0, 0, c_travel=frozenset({1, 3}))
    assert select_inter_cluster_targets(st, 4, pkt2) == [6, 8]


def test_no_foreign_neighbors():
    st = state_for(chain(3))
    assert select_inter_cluster_targets(st, 3, PKT) == []


def test_originate_example_network():
    st = load_fixture().state()
    proto = Recoup(st)
    acts = proto.originate(31, MulticastPacket(31, 1, 0, 0), 0)
    sends = {(a.direction, a.targets) for a in acts}
    assert sends == {(Direction.UP, (29,)), (Direction.INTER, (34,))}
    pkt = acts[0].packet
    assert pkt.pkt_drop == 4 and pkt.src_rank == 4 and pkt.c2c == 0
    assert pkt.c_travel == {st.clusters[31], st.clusters[34]}


def test_34_relays_up_and_toward_38():
    w = single_packet(load_fixture().state(), "recoup", 31)
    sends = {(a, t) for a, ts in w.transmissions for t in ts}
    assert {(34, 6), (34, 37), (37, 38), (6, 4)} <= sends


def test_from_parent_c2c_is_downward_only():
    st = load_fixture().state()
    proto = Recoup(st)
    pkt = MulticastPacket(31, 1, 0, 0, c2c=1, pkt_drop=3)
    node = 13
    acts = proto.route_at_node(node, pkt, Arrival.PARENT, st.dodag.parent[node])
    assert all(a.direction is Direction.DOWN for a in acts if hasattr(a, "direction"))


def root_scenario():
    # three clusters 1, 2, 3; each clusterhead has one subscribing child
    return topo_from({0: (0, 0), 1: (20, 0), 2: (-20, 0), 3: (0, 20),
                      4: (40, 0), 5: (-40, 0), 6: (0, 40)})


def test_root_sourced_only_downward():
    st = state_for(root_scenario(), members={4, 5})
    sim = simulate(st, "recoup", [(0, 0, 0)])
    assert all(e["dir"] == "down" and e["c2c"] == 1 for e in sim.trace)
    assert sorted(r.node for r in sim.deliveries.remote()) == [4, 5]


def test_root_forwards_only_to_unvisited_cluster():
    st = state_for(root_scenario(), members={1, 2, 3})
    proto = Recoup(st)
    pkt = MulticastPacket(4, 1, 0, 0, src_rank=2, pkt_drop=1, c_travel=frozenset({1}))
    acts = proto.route_at_root(pkt, 1, 16)
    hold = acts[-1]
    assert isinstance(hold, Hold) and hold.expiry == 16 + 2 * 8
    proto.route_at_root(pkt, 2, 20)
    out = proto.on_timer(0, pkt.key, hold.expiry)
    assert [s.targets for s in out] == [(3,)]
    assert out[0].packet.c2c == 1


def test_root_drops_when_all_clusters_seen():
    st = state_for(root_scenario(), members={1, 2})
    proto = Recoup(st)
    pkt = MulticastPacket(4, 1, 0, 0, src_rank=2)
    hold = proto.route_at_root(pkt, 1, 16)[-1]
    proto.route_at_root(pkt, 2, 18)
    out = proto.on_timer(0, pkt.key, hold.expiry)
    assert [type(a).__name__ for a in out] == ["Drop"]


def test_alpha_learns_from_late_copy():
    st = state_for(root_scenario(), members={1, 2, 3})
    proto = Recoup(st)
    first = MulticastPacket(4, 1, 0, 0, src_rank=2)
    hold = proto.route_at_root(first, 1, 16)[-1]
    proto.on_timer(0, first.key, hold.expiry)
    # a copy shows up 26 ms after the first, past the 16 ms hold
    proto.route_at_root(first, 2, 42)
    second = MulticastPacket(4, 1, 1, 0, src_rank=2)
    hold2 = proto.route_at_root(second, 1, 1016)[-1]
    assert proto.sessions[(4, 1)].alpha == 10
    assert hold2.expiry == 1016 + 16 + 10


def test_eed_through_root_hold():
    # 2 hops up, a 40 ms hold at the root, 2 hops down
    radio = RadioConfig(tx_time=8)
    topo = topo_from({0: (0, 0), 1: (20, 0), 3: (40, 0), 2: (-20, 0), 4: (-40, 0)})
    st = state_for(topo, members={4}, radio=radio)
    sim = simulate(st, "recoup", [(3, 0, 0)], alpha_initial=24)
    rec, = sim.deliveries.remote()
    # F_time = 8 * 2 + 24 = 40
    assert rec.latency == 72
