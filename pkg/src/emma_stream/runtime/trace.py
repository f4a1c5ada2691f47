"""Trace serialization: one JSON object per event, plus a summary line."""

from __future__ import annotations

import json
from pathlib import Path

from .types import DecisionTrace

__all__ = ["trace_to_lines", "write_trace_jsonl"]


def trace_to_lines(trace: DecisionTrace) -> list[str]:
    lines = []
    for ev in trace.events:
        record: dict = {"sim_time_s": ev.sim_time_s, "kind": ev.kind}
        if ev.token is not None:
            record["token"] = ev.token
        if ev.units is not None:
            record["units"] = ev.units
        lines.append(json.dumps(record, sort_keys=True))
    summary = {
        "kind": "SUMMARY",
        "instance_id": trace.instance_id,
        "source_duration_s": trace.source_duration_s,
        "outputs": list(trace.outputs),
        "delays_s": list(trace.delays),
        "emissions": [{"emit_time_s": e.emit_time_s,
                       "playback_duration_s": e.playback_duration_s,
                       "tokens": list(e.tokens)} for e in trace.emissions],
        "truncated": trace.truncated,
    }
    lines.append(json.dumps(summary, sort_keys=True))
    return lines


def write_trace_jsonl(trace: DecisionTrace, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{trace.instance_id}.jsonl"
    path.write_text("\n".join(trace_to_lines(trace)) + "\n", encoding="utf-8")
    return path
