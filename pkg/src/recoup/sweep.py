"""Parameter sweeps: many (config, protocol, seed) runs merged into a table."""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .config import SWEEP_AXES, SWEEP_RANGES, ScenarioConfig
from .errors import ConfigError
from .runner import run

TABLE_METRICS = ("pdr", "mean_eed", "energy_per_delivered_packet", "total_energy",
                 "tx_count", "duplicate_count")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple

    def validate(self) -> "SweepSpec":
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis: unknown axis {self.axis!r}; choose from {SWEEP_AXES}")
        if not self.values:
            raise ConfigError("sweep.values: empty value list")
        lo, hi = SWEEP_RANGES[self.axis]
        outside = [v for v in self.values if not lo <= v <= hi]
        if outside:
            warnings.warn(f"sweep values {outside} outside the evaluated range [{lo}, {hi}]",
                          stacklevel=2)
        return self


def apply_axis(cfg: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    if axis == "sink_fraction":
        out = replace(cfg, sink_fraction=float(value))
    elif axis == "node_count":
        if int(value) != value:
            raise ConfigError("sweep.values: node_count values must be integers")
        out = replace(cfg, node_count=int(value))
    elif axis == "attacker_fraction":
        kind = cfg.attacker.kind if cfg.attacker.kind != "none" else "blackhole"
        out = replace(cfg, attacker=replace(cfg.attacker, fraction=float(value), kind=kind))
    else:
        raise ConfigError(f"sweep.axis: unknown axis {axis!r}")
    return out.validate()


def _job(args):
    cfg_dict, axis, value, protocol, seed = args
    cfg = ScenarioConfig.from_dict(cfg_dict)
    rec = run(cfg, seed, protocol, trace=False).record()
    rec["axis"] = axis
    rec["axis_value"] = value
    return rec


def sweep_jobs(cfg: ScenarioConfig, spec: SweepSpec) -> list[tuple]:
    jobs = []
    for value in spec.values:
        point = apply_axis(cfg, spec.axis, value).to_dict()
        for protocol in cfg.protocols:
            for seed in cfg.seeds:
                jobs.append((point, spec.axis, value, protocol, seed))
    return jobs


def record_sort_key(rec: dict):
    return (rec.get("axis_value", 0), rec["protocol"], rec["seed"])


def run_sweep(cfg: ScenarioConfig, spec: SweepSpec, jobs: int | None = None) -> tuple[list[dict], list[dict]]:
    """Run every (value, protocol, seed) combination; returns (records, table rows).

    Both outputs are in canonical order whatever order the workers finish in.
    """
    cfg.validate()
    spec.validate()
    work = sweep_jobs(cfg, spec)
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1:
        records = [_job(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_job, work, chunksize=max(1, len(work) // (jobs * 4))))
    records.sort(key=record_sort_key)
    return records, aggregate(records)


def mean_sd(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    m = math.fsum(values) / len(values)
    if len(values) < 2:
        return m, 0.0
    var = math.fsum((v - m) ** 2 for v in values) / (len(values) - 1)
    return m, math.sqrt(var)


def aggregate(records: list[dict], metrics=TABLE_METRICS) -> list[dict]:
    """One row per (axis value, protocol): mean, sample sd and n for each metric."""
    cells: dict[tuple, list[dict]] = {}
    for rec in records:
        cells.setdefault((rec.get("axis_value"), rec["protocol"]), []).append(rec)
    rows = []
    for (value, protocol), recs in sorted(cells.items(), key=lambda kv: (kv[0][0] or 0, kv[0][1])):
        # sort so float summation does not depend on completion order
        recs = sorted(recs, key=lambda r: r["seed"])
        row = {"axis": recs[0].get("axis"), "value": value, "protocol": protocol, "runs": len(recs)}
        for m in metrics:
            vals = [r["metrics"][m] for r in recs if r["metrics"][m] is not None]
            mean, sd = mean_sd(vals)
            row[f"{m}_mean"] = mean
            row[f"{m}_sd"] = sd
            row[f"{m}_n"] = len(vals)
        rows.append(row)
    return rows


def table_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return buf.getvalue()


def cell(rows: list[dict], value, protocol: str) -> dict:
    for row in rows:
        if row["value"] == value and row["protocol"] == protocol:
            return row
    raise KeyError((value, protocol))
