"""Versioned line-delimited trajectory traces.

First line: header with trace_version, scenario name, seed and sampling
settings. Following lines: one JSON object per sampled frame with module
poses, the bond set, and the events since the previous frame. Keys are
sorted so identical runs serialize byte-for-byte identically.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import TraceFormatError
from .sim.engine import TrajectoryFrame
from .sim.world import SimEvent

TRACE_VERSION = 1


def dump_trace(
    trajectory: list[TrajectoryFrame],
    events: list[SimEvent],
    scenario: str = "",
    seed: int = 0,
    sample_dt: float = 0.02,
    backend: str = "",
) -> str:
    header = {
        "trace_version": TRACE_VERSION,
        "scenario": scenario,
        "seed": seed,
        "sample_dt": sample_dt,
        "backend": backend,
    }
    lines = [json.dumps(header, sort_keys=True)]
    ev_idx = 0
    events = sorted(events, key=lambda e: e.time)
    for frame in trajectory:
        record = frame.to_dict()
        frame_events = []
        while ev_idx < len(events) and events[ev_idx].time <= frame.time + 1e-12:
            frame_events.append(events[ev_idx].to_dict())
            ev_idx += 1
        record["events"] = frame_events
        lines.append(json.dumps(record, sort_keys=True))
    # events after the last sampled frame (aborts, goal flags)
    if ev_idx < len(events):
        tail = {"t": events[-1].time, "modules": None, "bonds": None,
                "events": [e.to_dict() for e in events[ev_idx:]]}
        lines.append(json.dumps(tail, sort_keys=True))
    return "\n".join(lines) + "\n"


def write_trace(path, *args, **kwargs) -> None:
    Path(path).write_text(dump_trace(*args, **kwargs))


def parse_trace(text: str) -> tuple[dict, list[dict]]:
    """Parse a trace back into (header, frames). Rejects unknown versions."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise TraceFormatError("empty trace")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"bad trace header: {exc.msg}") from exc
    if header.get("trace_version") != TRACE_VERSION:
        raise TraceFormatError(
            f"unsupported trace_version {header.get('trace_version')!r}"
        )
    frames = []
    for k, line in enumerate(lines[1:], start=2):
        try:
            frames.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"line {k}: {exc.msg}") from exc
    return header, frames


def read_trace(path) -> tuple[dict, list[dict]]:
    return parse_trace(Path(path).read_text())
