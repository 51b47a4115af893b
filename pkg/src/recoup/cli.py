"""Command-line front end: run, sweep, verify-fixture, dump-topology."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import PROTOCOLS, SWEEP_AXES, ScenarioConfig, load_config
from .dodag import build_routing_state, dodag_to_dict
from .errors import ConfigError, FormationError
from .fixture import verify_fixture
from .runner import run, scenario_topology
from .sweep import SweepSpec, run_sweep, table_csv
from .topology import topology_to_dict

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
OUTPUT_ENV = "RECOUP_OUTPUT_DIR"


def number(text: str):
    """int when integral, so timing arithmetic stays exact."""
    v = float(text)
    return int(v) if v.is_integer() else v


def add_scenario_flags(ap: argparse.ArgumentParser) -> None:
    g = ap.add_argument_group("scenario (overrides the config file)")
    g.add_argument("--config", help="JSON scenario file")
    g.add_argument("--node-count", type=int)
    g.add_argument("--area", type=float, nargs=2, metavar=("W", "H"))
    g.add_argument("--tx-range", type=float)
    g.add_argument("--tx-time", type=number, help="per-hop transmission time, ms")
    g.add_argument("--tx-energy", type=float, help="mJ per transmitted packet")
    g.add_argument("--rx-energy", type=float, help="mJ per received packet")
    g.add_argument("--delivery-probability", type=float)
    g.add_argument("--protocols", nargs="+", choices=PROTOCOLS)
    g.add_argument("--sources", type=int)
    g.add_argument("--sink-fraction", type=float)
    g.add_argument("--rate", type=float, help="packets per second per source")
    g.add_argument("--packet-budget", type=int)
    g.add_argument("--payload-size", type=int)
    g.add_argument("--attacker-kind", choices=["none", "blackhole", "rank"])
    g.add_argument("--attacker-fraction", type=float)
    g.add_argument("--rank-delta", type=int)
    g.add_argument("--discard-probability", type=float)
    g.add_argument("--seeds", type=int, nargs="+",
                   help="one number N means seeds 1..N; several numbers are used as given")
    g.add_argument("--ofm-threshold", type=int)
    g.add_argument("--alpha-initial", type=int)
    g.add_argument("--dd-capacity", type=int)
    g.add_argument("--inter-cluster-choice", choices=["rank", "random"])
    g.add_argument("--topology-file")
    g.add_argument("--dodag-file")
    g.add_argument("--source-nodes", type=int, nargs="+")
    g.add_argument("--group-members", type=int, nargs="+")


def scenario_from_args(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    data = cfg.to_dict()
    radio = data["radio"]
    for flag, key in (("tx_range", "tx_range"), ("tx_time", "tx_time"), ("tx_energy", "tx_energy"),
                      ("rx_energy", "rx_energy"), ("delivery_probability", "delivery_probability")):
        if getattr(args, flag) is not None:
            radio[key] = getattr(args, flag)
    for flag in ("rate", "packet_budget", "payload_size"):
        if getattr(args, flag) is not None:
            data["traffic"][flag] = getattr(args, flag)
    for flag, key in (("attacker_kind", "kind"), ("attacker_fraction", "fraction"),
                      ("rank_delta", "rank_delta"), ("discard_probability", "discard_probability")):
        if getattr(args, flag) is not None:
            data["attacker"][key] = getattr(args, flag)
    for flag in ("node_count", "area", "protocols", "sources", "sink_fraction", "ofm_threshold",
                 "alpha_initial", "dd_capacity", "inter_cluster_choice", "topology_file",
                 "dodag_file", "source_nodes", "group_members"):
        if getattr(args, flag, None) is not None:
            data[flag] = getattr(args, flag)
    if args.seeds is not None:
        data["seeds"] = args.seeds[0] if len(args.seeds) == 1 else args.seeds
    if getattr(args, "trace", False):
        data["trace"] = True
    return ScenarioConfig.from_dict(data)


def output_dir(flag: str | None) -> Path:
    """``--output-dir`` wins; else $RECOUP_OUTPUT_DIR; else the working directory."""
    path = Path(flag or os.environ.get(OUTPUT_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_run(args) -> int:
    cfg = scenario_from_args(args)
    out = output_dir(args.output_dir)
    lines = []
    for protocol in cfg.protocols:
        for seed in cfg.seeds:
            res = run(cfg, seed, protocol)
            lines.append(res.record_line())
            if cfg.trace:
                tpath = out / f"trace_{protocol}_seed{seed}.jsonl"
                tpath.write_text("".join(json.dumps(e, sort_keys=True) + "\n"
                                         for e in res.simulation.trace))
    (out / args.name).write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} records to {out / args.name}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = scenario_from_args(args)
    spec = SweepSpec(args.axis, tuple(args.values))
    records, rows = run_sweep(cfg, spec, args.jobs)
    out = output_dir(args.output_dir)
    stem = args.name or f"sweep_{args.axis}"
    (out / f"{stem}.jsonl").write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in records))
    (out / f"{stem}.csv").write_text(table_csv(rows))
    print(f"wrote {len(records)} records and {len(rows)} table rows under {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    result, problems = verify_fixture(args.fixture)
    print(json.dumps(result, indent=2, sort_keys=True))
    if problems:
        for p in problems:
            print("MISMATCH", p, file=sys.stderr)
        return EXIT_MISMATCH
    print("fixture OK")
    return EXIT_OK


def cmd_dump(args) -> int:
    cfg = scenario_from_args(args)
    topo = scenario_topology(cfg, args.seed)
    state = build_routing_state(topo, cfg.radio, {})
    out = output_dir(args.output_dir)
    (out / f"topology_seed{args.seed}.json").write_text(json.dumps(topology_to_dict(topo), indent=1))
    (out / f"dodag_seed{args.seed}.json").write_text(
        json.dumps(dodag_to_dict(state.dodag, state.clusters), indent=1))
    print(f"wrote topology and DODAG for seed {args.seed} under {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="recoup", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario for every protocol and seed")
    add_scenario_flags(p)
    p.add_argument("--trace", action="store_true", help="also write per-run forwarding traces")
    p.add_argument("--output-dir")
    p.add_argument("--name", default="results.jsonl", help="records file name")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one axis; writes records and a mean/sd table")
    add_scenario_flags(p)
    p.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", type=float, nargs="+", required=True)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--output-dir")
    p.add_argument("--name")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify-fixture", help="replay the single-packet example and compare")
    p.add_argument("--fixture", help="fixture JSON (default: the bundled example network)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dump-topology", help="write a generated topology and its DODAG")
    add_scenario_flags(p)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_dump)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "values", None) is not None and args.axis == "node_count":
        args.values = [int(v) for v in args.values]
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormationError, RuntimeError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
