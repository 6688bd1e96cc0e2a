"""Reading and writing trajectory logs.

A log is a directory holding three files:

* ``log.json``: scenario, arrivals, final priorities, negotiation outcomes
* ``trajectory.csv``: one row per robot per tick
* ``transcripts.jsonl``: dialogue messages, one per line, and session outcomes

Floats are written with ``repr`` so a write/read/write cycle is byte-stable.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Union

from faca.engine import NegotiationRecord, RobotSnap, Snapshot, TrajectoryLog
from faca.scenarios import scenario_from_dict, scenario_to_dict

FORMAT_VERSION = 1
CSV_COLUMNS = ("t", "id", "x", "y", "vx", "vy", "heading", "priority")

PathLike = Union[str, Path]


class LogFormatError(ValueError):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def log_header(log: TrajectoryLog) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "digest": log.digest,
        "scenario": scenario_to_dict(log.scenario),
        "arrivals": dict(sorted(log.arrivals.items())),
        "final_priorities": dict(sorted(log.final_priorities.items())),
        "aborted": log.aborted,
        "negotiations": [{
            "pair": list(r.pair), "opened_at": r.opened_at, "resolved_at": r.resolved_at,
            "high": r.high, "low": r.low,
            "new_priorities": dict(sorted(r.new_priorities.items())),
            "fallback": r.fallback, "fallback_reason": r.fallback_reason,
        } for r in log.negotiations],
    }


def trajectory_csv(log: TrajectoryLog) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for snap in log.snapshots:
        for s in snap.states:
            w.writerow([repr(snap.t), s.id, repr(s.x), repr(s.y), repr(s.vx), repr(s.vy),
                        repr(s.heading), repr(s.priority)])
    return buf.getvalue()


def transcripts_jsonl(log: TrajectoryLog) -> str:
    """One line per dialogue message, then one outcome line per session."""
    lines = []
    for r in log.negotiations:
        base = {"format_version": FORMAT_VERSION, "pair": list(r.pair), "opened_at": r.opened_at}
        for k, (who, text) in enumerate(r.transcript):
            lines.append(dict(base, type="message", index=k, speaker=who, text=text))
        lines.append(dict(base, type="outcome", high=r.high, low=r.low, fallback=r.fallback))
    return "".join(json.dumps(line, sort_keys=True) + "\n" for line in lines)


def log_bytes(log: TrajectoryLog) -> bytes:
    """All three files concatenated; used to compare runs byte for byte."""
    return (_dumps(log_header(log)) + trajectory_csv(log) + transcripts_jsonl(log)).encode()


def write_log(log: TrajectoryLog, out_dir: PathLike) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "log.json").write_text(_dumps(log_header(log)))
    (out / "trajectory.csv").write_text(trajectory_csv(log))
    (out / "transcripts.jsonl").write_text(transcripts_jsonl(log))
    return out


def _read_snapshots(text: str) -> list[Snapshot]:
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if tuple(header or ()) != CSV_COLUMNS:
        raise LogFormatError(f"trajectory.csv: expected columns {CSV_COLUMNS}, got {header}")
    snaps: list[Snapshot] = []
    cur_t, cur = None, []
    for row in rows:
        t = float(row[0])
        if cur_t is not None and t != cur_t:
            snaps.append(Snapshot(cur_t, tuple(cur)))
            cur = []
        cur_t = t
        cur.append(RobotSnap(row[1], *map(float, row[2:])))
    if cur_t is not None:
        snaps.append(Snapshot(cur_t, tuple(cur)))
    return snaps


def read_log(in_dir: PathLike) -> TrajectoryLog:
    d = Path(in_dir)
    head = json.loads((d / "log.json").read_text())
    if head.get("format_version") != FORMAT_VERSION:
        raise LogFormatError(f"unsupported log format_version {head.get('format_version')!r}")
    tpath = d / "transcripts.jsonl"
    transcripts = {}
    if tpath.exists():
        for line in tpath.read_text().splitlines():
            if line.strip():
                e = json.loads(line)
                if e.get("type") == "message":
                    transcripts.setdefault((tuple(e["pair"]), e["opened_at"]), []).append(
                        (e["speaker"], e["text"]))
    records = [NegotiationRecord(
        tuple(n["pair"]), n["opened_at"], n["resolved_at"], n["high"], n["low"],
        dict(n["new_priorities"]), n["fallback"], n["fallback_reason"],
        transcripts.get((tuple(n["pair"]), n["opened_at"]), []))
        for n in head["negotiations"]]
    return TrajectoryLog(
        scenario=scenario_from_dict(head["scenario"]),
        digest=head["digest"],
        snapshots=_read_snapshots((d / "trajectory.csv").read_text()),
        arrivals=dict(head["arrivals"]),
        negotiations=records,
        final_priorities=dict(head["final_priorities"]),
        aborted=head["aborted"],
    )
