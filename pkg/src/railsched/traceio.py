"""Loss-free text serialization for traces, summaries, and sweep tables.

Traces are comma-delimited with one row per slot and a fixed column order:
t, d, N, P, C, served, then A/mu/Q/X per service, then Y and the slot's
total drops (6 + 4K + 2 columns).  Floats are written with 17 significant
digits so parsing returns the exact double and a write/read/write cycle is
byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .engine import SimSummary, Trace


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def trace_columns(num_services: int) -> list[str]:
    cols = ["t", "d", "N", "P", "C", "served"]
    for k in range(num_services):
        cols += [f"A{k}", f"mu{k}", f"Q{k}", f"X{k}"]
    cols += ["Y", "drops"]
    return cols


def write_trace(trace: Trace, path: str | Path) -> None:
    k_count = trace.num_services
    lines = [",".join(trace_columns(k_count))]
    for t in range(len(trace)):
        row = [
            _fmt(trace.slot[t]),
            _fmt(trace.distance[t]),
            _fmt(trace.noise[t]),
            _fmt(trace.power[t]),
            _fmt(trace.capacity[t]),
            _fmt(trace.served[t]),
        ]
        for k in range(k_count):
            row += [
                _fmt(trace.arrivals[t, k]),
                _fmt(trace.allocation[t, k]),
                _fmt(trace.queues[t, k]),
                _fmt(trace.virtual_delay[t, k]),
            ]
        row += [_fmt(trace.virtual_power[t]), _fmt(trace.drops[t])]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_trace(path: str | Path) -> Trace:
    text = Path(path).read_text(encoding="utf-8").rstrip("\n")
    lines = text.split("\n")
    header = lines[0].split(",")
    if (len(header) - 8) % 4 != 0:
        raise ValueError(f"{path}: {len(header)} columns do not fit the 6 + 4K + 2 trace schema")
    k_count = (len(header) - 8) // 4
    if header != trace_columns(k_count):
        raise ValueError(f"{path}: unexpected trace header")
    rows = len(lines) - 1
    trace = Trace(
        slot=np.zeros(rows, dtype=np.int64),
        distance=np.zeros(rows),
        noise=np.zeros(rows),
        power=np.zeros(rows),
        capacity=np.zeros(rows, dtype=np.int64),
        served=np.zeros(rows, dtype=np.int64),
        arrivals=np.zeros((rows, k_count), dtype=np.int64),
        allocation=np.zeros((rows, k_count), dtype=np.int64),
        queues=np.zeros((rows, k_count), dtype=np.int64),
        virtual_delay=np.zeros((rows, k_count)),
        virtual_power=np.zeros(rows),
        drops=np.zeros(rows, dtype=np.int64),
    )
    for t, line in enumerate(lines[1:]):
        parts = line.split(",")
        if len(parts) != len(header):
            raise ValueError(f"{path}: row {t} has {len(parts)} fields, expected {len(header)}")
        trace.slot[t] = int(parts[0])
        trace.distance[t] = float(parts[1])
        trace.noise[t] = float(parts[2])
        trace.power[t] = float(parts[3])
        trace.capacity[t] = int(parts[4])
        trace.served[t] = int(parts[5])
        base = 6
        for k in range(k_count):
            trace.arrivals[t, k] = int(parts[base + 4 * k])
            trace.allocation[t, k] = int(parts[base + 4 * k + 1])
            trace.queues[t, k] = int(parts[base + 4 * k + 2])
            trace.virtual_delay[t, k] = float(parts[base + 4 * k + 3])
        trace.virtual_power[t] = float(parts[base + 4 * k_count])
        trace.drops[t] = int(parts[base + 4 * k_count + 1])
    return trace


def write_summary(summary: SimSummary, path: str | Path) -> None:
    def vec(values) -> str:
        return ",".join(_fmt(v) for v in values)

    lines = [
        f"horizon = {summary.horizon}",
        f"avg_power = {_fmt(summary.avg_power)}",
        f"avg_backlog = {vec(summary.avg_backlog)}",
        f"avg_delay = {vec(summary.avg_delay)}",
        f"empirical_rates = {vec(summary.empirical_rates)}",
        f"delay_ok = {vec(int(b) for b in summary.delay_ok)}",
        f"power_ok = {int(summary.power_ok)}",
        f"total_drops = {vec(summary.total_drops)}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_summary(path: str | Path) -> SimSummary:
    fields: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        key, _, raw = line.partition(" = ")
        fields[key] = raw
    try:
        return SimSummary(
            avg_power=float(fields["avg_power"]),
            avg_backlog=tuple(float(v) for v in fields["avg_backlog"].split(",")),
            avg_delay=tuple(float(v) for v in fields["avg_delay"].split(",")),
            empirical_rates=tuple(float(v) for v in fields["empirical_rates"].split(",")),
            delay_ok=tuple(bool(int(v)) for v in fields["delay_ok"].split(",")),
            power_ok=bool(int(fields["power_ok"])),
            total_drops=tuple(int(v) for v in fields["total_drops"].split(",")),
            horizon=int(fields["horizon"]),
        )
    except KeyError as exc:
        raise ValueError(f"{path}: summary file missing field {exc}") from None
