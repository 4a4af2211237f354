"""Text and JSON rendering of verdicts and schedules."""

from __future__ import annotations

import json
from typing import Optional

from .frontend import Instance, format_expr
from .model import Kind, UnrolledProgram
from .schedule import Schedule


def schedule_rows(s: Schedule, up: UnrolledProgram) -> list[dict]:
    rows = []
    for r in s.rounds:
        if r.executed is None:
            rows.append(
                {"round": r.k, "thread": None, "statement": None, "iteration": None,
                 "start": r.start, "end": r.end}
            )
            continue
        t, i = r.executed
        st = up.thread(t).stmt(i)
        rows.append(
            {"round": r.k, "thread": up.thread(t).name, "statement": st.label,
             "iteration": st.iteration or None, "start": r.start, "end": r.end}
        )
    return rows


def sleep_rows(s: Schedule, up: UnrolledProgram) -> list[dict]:
    out = []
    for (t, i), end in sorted(s.end_times.items()):
        st = up.thread(t).stmt(i)
        if st.kind is Kind.SLEEP:
            out.append({"thread": up.thread(t).name, "start": end - st.duration, "end": end})
    return sorted(out, key=lambda r: (r["start"], r["thread"]))


def timeline(s: Schedule, up: UnrolledProgram) -> str:
    """Round table with sleep intervals interleaved by start time."""
    header = f"{'round':>5}  {'thread':<8}  {'statement':<12}  {'start':>5}  {'end':>5}"
    lines = [header]
    sleeps = sleep_rows(s, up)
    for row in schedule_rows(s, up):
        while sleeps and sleeps[0]["start"] <= row["start"]:
            z = sleeps.pop(0)
            lines.append(f"{'~':>5}  {z['thread']:<8}  {'(sleeping)':<12}  {z['start']:>5}  {z['end']:>5}")
        if row["thread"] is None:
            lines.append(f"{row['round']:>5}  {'-':<8}  {'(terminated)':<12}  {row['start']:>5}  {row['end']:>5}")
            continue
        name = row["statement"] + (f"[{row['iteration']}]" if row["iteration"] else "")
        lines.append(f"{row['round']:>5}  {row['thread']:<8}  {name:<12}  {row['start']:>5}  {row['end']:>5}")
    for z in sleeps:
        lines.append(f"{'~':>5}  {z['thread']:<8}  {'(sleeping)':<12}  {z['start']:>5}  {z['end']:>5}")
    return "\n".join(lines)


def instance_dict(inst: Instance) -> dict:
    return {"property": inst.prop, "instance": format_expr(inst.formula), "i": inst.valuation}


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def verdict_text(v) -> str:
    head = f"(bound N={v.bound}"
    if v.up.loop_iterations != 1:
        head += f", loops unrolled {v.up.loop_iterations}x"
    head += ")"
    if v.status == "holds":
        return f"HOLDS {head}\n"
    if v.status == "error":
        return f"ERROR {head}: {v.message}\n"
    lines = [f"VIOLATED {head}", timeline(v.schedule, v.up), "failed:"]
    lines += [f"  {inst.describe()}" for inst in v.failed]
    return "\n".join(lines) + "\n"


def verdict_json(v, timings: Optional[dict] = None) -> dict:
    out = {
        "verdict": v.status,
        "bound": v.bound,
        "loop_iterations": v.up.loop_iterations,
        "message": v.message,
        "node_count": v.node_count,
        "schedule": schedule_rows(v.schedule, v.up) if v.schedule else None,
        "sleeps": sleep_rows(v.schedule, v.up) if v.schedule else None,
        "failed": [instance_dict(i) for i in v.failed],
    }
    out["timings"] = {k: round(x, 6) for k, x in (timings or v.timings).items()}
    return out
