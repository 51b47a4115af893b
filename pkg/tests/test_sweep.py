import warnings

import pytest

from recoup.config import ScenarioConfig, TrafficConfig
from recoup.errors import ConfigError
from recoup.sweep import SweepSpec, aggregate, apply_axis, cell, mean_sd, run_sweep

CFG = ScenarioConfig(node_count=30, area=(100.0, 100.0), seeds=(1, 2),
                     traffic=TrafficConfig(packet_budget=16))


def test_empty_values():
    with pytest.raises(ConfigError):
        SweepSpec("sink_fraction", ()).validate()


def test_unknown_axis():
    with pytest.raises(ConfigError):
        SweepSpec("tx_range", (1,)).validate()


def test_out_of_range_warns():
    with warnings.catch_warnings(record=True) as got:
        warnings.simplefilter("always")
        SweepSpec("sink_fraction", (0.9,)).validate()
    assert got


def test_attacker_axis_turns_on_blackholes():
    cfg = apply_axis(ScenarioConfig(), "attacker_fraction", 0.2)
    assert cfg.attacker.kind == "blackhole" and cfg.attacker.fraction == 0.2


def test_mean_sd():
    assert mean_sd([]) == (None, None)
    assert mean_sd([3.0]) == (3.0, 0.0)
    m, sd = mean_sd([1.0, 2.0, 3.0])
    assert m == 2.0 and sd == pytest.approx(1.0)


def test_sweep_shape_and_order():
    records, rows = run_sweep(CFG, SweepSpec("sink_fraction", (0.2, 0.4)), jobs=1)
    assert len(records) == 2 * 3 * 2
    assert len(rows) == 2 * 3
    assert cell(rows, 0.4, "bmrf")["runs"] == 2


def test_aggregate_independent_of_completion_order():
    records, rows = run_sweep(CFG, SweepSpec("sink_fraction", (0.2,)), jobs=1)
    assert aggregate(list(reversed(records))) == rows


@pytest.mark.filterwarnings("ignore:sweep values")
def test_parallel_matches_serial():
    spec = SweepSpec("node_count", (20, 30))
    serial = run_sweep(CFG, spec, jobs=1)
    parallel = run_sweep(CFG, spec, jobs=2)
    assert serial == parallel
