"""Decoded executions, shared by the SMT backend and the brute-force oracle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import Kind, UnrolledProgram


@dataclass(frozen=True)
class Round:
    k: int
    executed: Optional[tuple[int, int]]  # (thread, position), None on padding rounds
    start: int
    end: int


@dataclass(frozen=True)
class Schedule:
    rounds: tuple[Round, ...]
    end_times: dict  # (t, i) -> E, only for meaningful entries

    def key(self) -> tuple:
        return self.rounds, tuple(sorted(self.end_times.items()))

    def __hash__(self):
        return hash(self.key())

    @property
    def order(self) -> tuple[tuple[int, int], ...]:
        return tuple(r.executed for r in self.rounds if r.executed is not None)

    def scheduled(self, t: int, i: int) -> bool:
        return (t, i) in self.order

    def describe(self, up: UnrolledProgram) -> list[str]:
        return [f"{up.thread(t).name}.{up.thread(t).stmt(i).display}" for t, i in self.order]


def violations(s: Schedule, up: UnrolledProgram) -> list[str]:
    """Every way the schedule breaks the single-processor execution model."""
    out = []
    N = up.rounds
    if len(s.rounds) != N:
        out.append(f"expected {N} rounds, got {len(s.rounds)}")
    padding = False
    last = {t: 0 for t in range(1, up.T + 1)}
    prev_end = None
    intervals = []
    for r in s.rounds:
        if r.executed is None:
            padding = True
            if r.start != r.end:
                out.append(f"round {r.k}: padding round with non-empty span")
            if prev_end is not None and r.end != prev_end:
                out.append(f"round {r.k}: time moves after termination")
        else:
            if padding:
                out.append(f"round {r.k}: execution after termination")
            t, i = r.executed
            th = up.thread(t)
            if th.stmt(i).kind is not Kind.ORDINARY:
                out.append(f"round {r.k}: executes a sleep")
            if i <= last[t]:
                out.append(f"round {r.k}: thread {t} program counter moves backwards")
            last[t] = i
            if r.end != r.start + th.duration(i):
                out.append(f"round {r.k}: X != Y + D")
            if s.end_times.get((t, i)) != r.end:
                out.append(f"round {r.k}: E_{t}_{i} != X")
            intervals.append((r.end - th.duration(i), r.end, r.k))
        if prev_end is not None and r.start < prev_end:
            out.append(f"round {r.k}: Y < previous X")
        prev_end = r.end
    intervals.sort()
    for (s1, e1, k1), (s2, e2, k2) in zip(intervals, intervals[1:]):
        if s2 < e1:
            out.append(f"rounds {k1} and {k2} overlap")
    return out
