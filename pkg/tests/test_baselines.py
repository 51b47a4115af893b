from helpers import chain, simulate, state_for, topo_from
from recoup.fixture import load_fixture, single_packet


def test_esmrf_climbs_then_descends():
    st = state_for(chain(5), members={5})
    sim = simulate(st, "esmrf", [(4, 0, 0)])
    dirs = [e["dir"] for e in sim.trace]
    assert dirs == ["up"] * 4 + ["down"] * 5
    rec, = sim.deliveries.remote()
    assert rec.node == 5 and rec.latency == 9 * 8


def test_esmrf_no_delivery_on_the_way_up():
    st = state_for(chain(4), members={2})
    sim = simulate(st, "esmrf", [(4, 0, 0)])
    rec, = sim.deliveries.remote()
    # reached only on the way down: 4 hops up then 2 down
    assert rec.latency == 6 * 8


def test_esmrf_root_sourced_is_pure_downward():
    st = state_for(chain(3), members={3})
    sim = simulate(st, "esmrf", [(0, 0, 0)])
    assert [e["dir"] for e in sim.trace] == ["down"] * 3


def test_esmrf_unicasts_even_to_many_children():
    topo = topo_from({0: (50, 50), 1: (60, 50), 2: (40, 50), 3: (50, 60), 4: (50, 40)})
    st = state_for(topo, members={1, 2, 3, 4})
    sim = simulate(st, "esmrf", [(0, 0, 0)])
    assert [e["mode"] for e in sim.trace] == ["unicast"] * 4


def sibling_net():
    return topo_from({0: (0, 0), 1: (20, 0), 2: (40, 12), 3: (40, -12)})


def test_bmrf_serves_sibling_at_shared_parent():
    st = state_for(sibling_net(), members={3})
    assert st.dodag.parent[2] == st.dodag.parent[3] == 1
    sim = simulate(st, "bmrf", [(2, 0, 0)])
    rec, = sim.deliveries.remote()
    assert rec.latency == 16


def test_bmrf_broadcasts_at_threshold():
    topo = topo_from({0: (50, 50), 1: (60, 50), 2: (40, 50), 3: (50, 60)})
    st = state_for(topo, members={1, 2, 3})
    sim = simulate(st, "bmrf", [(0, 0, 0)])
    assert [e["mode"] for e in sim.trace] == ["broadcast"]
    assert sorted(r.node for r in sim.deliveries.remote()) == [1, 2, 3]


def test_example_network_counts():
    fx = load_fixture()
    assert single_packet(fx.state(), "bmrf", 31).required_tx == 17
    assert single_packet(fx.state(fx.modified_group), "bmrf", 31).required_tx == 20


def test_blackhole_on_only_path():
    st = state_for(chain(4), members={4})
    for proto in ("esmrf", "bmrf"):
        assert single_packet(st, proto, 1, blackholes=(2,)).delivered == []
