"""Brute-force schedule enumeration under the eager single-processor model.

This is deliberately naive: a depth-first search over every thread that is
ready whenever the processor becomes free.  It shares nothing with the
constraint generator except the unrolled program, and serves as ground truth
for it.

Execution model:

* one ordinary statement executes at a time, atomically, for its duration;
* a sleep right after an ordinary statement starts when that statement ends;
* whenever some live thread is ready the processor is never idle; when all
  live threads sleep, time jumps to the earliest wake-up;
* a thread whose last ordinary statement has run is terminated, even if a
  trailing sleep is still pending.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, prod
from typing import Iterable, Optional

from .frontend import Property, evaluate, instantiate
from .model import Kind, UnrolledProgram
from .schedule import Round, Schedule


@dataclass
class SimState:
    now: int
    pcs: list[int]  # next position per thread, n_t + 1 when terminated
    ends: dict[tuple[int, int], int] = field(default_factory=dict)
    trace: list[Round] = field(default_factory=list)

    def wake(self, t: int) -> Optional[int]:
        """Earliest time thread t may run its next statement (None at its first)."""
        i = self.pcs[t - 1]
        return None if i == 1 else self.ends[t, i - 1]

    def live(self, up: UnrolledProgram) -> list[int]:
        return [t for t in range(1, up.T + 1) if self.pcs[t - 1] <= up.thread(t).n]


def initial_state(up: UnrolledProgram) -> SimState:
    s = SimState(0, [])
    for t in range(1, up.T + 1):
        th = up.thread(t)
        if th.stmt(1).kind is Kind.SLEEP:
            s.ends[t, 1] = th.duration(1)
            s.pcs.append(2)
        else:
            s.pcs.append(1)
    if not s.live(up):
        s.now = min(up.thread(t).duration(1) for t in range(1, up.T + 1))
    return s


def step_candidates(state: SimState, up: UnrolledProgram) -> set[int]:
    """Live threads ready to run at ``state.now``."""
    out = set()
    for t in state.live(up):
        w = state.wake(t)
        if w is None or w <= state.now:
            out.add(t)
    return out


def _advance(state: SimState, up: UnrolledProgram) -> set[int]:
    ready = step_candidates(state, up)
    live = state.live(up)
    if not ready and live:
        state.now = min(state.wake(t) for t in live)
        ready = step_candidates(state, up)
    return ready


def enumerate_schedules(up: UnrolledProgram, rounds: Optional[int] = None) -> list[Schedule]:
    N = up.rounds if rounds is None else rounds
    if N < 1:
        raise ValueError("rounds must be >= 1")
    found: dict[tuple, Schedule] = {}

    def dfs(state: SimState, k: int) -> None:
        if k > N:
            sched = Schedule(tuple(state.trace), dict(state.ends))
            found.setdefault(sched.key(), sched)
            return
        ready = _advance(state, up)
        if not ready:
            pad = [Round(j, None, state.now, state.now) for j in range(k, N + 1)]
            sched = Schedule(tuple(state.trace + pad), dict(state.ends))
            found.setdefault(sched.key(), sched)
            return
        for t in sorted(ready):
            th = up.thread(t)
            i = state.pcs[t - 1]
            saved = (state.now, list(state.pcs), dict(state.ends))
            start = state.now
            end = start + th.duration(i)
            state.ends[t, i] = end
            if th.is_sleep(i + 1):
                state.ends[t, i + 1] = end + th.duration(i + 1)
                state.pcs[t - 1] = i + 2
            else:
                state.pcs[t - 1] = i + 1
            state.now = end
            state.trace.append(Round(k, (t, i), start, end))
            dfs(state, k + 1)
            state.trace.pop()
            state.now, state.pcs, state.ends = saved

    dfs(initial_state(up), 1)
    return list(found.values())


def check(schedule: Schedule, prop: Property, up: UnrolledProgram) -> bool:
    """Does every fully scheduled instance of the property hold?"""
    return not failed_instances(schedule, [prop], up)


def failed_instances(schedule: Schedule, props: Iterable[Property], up: UnrolledProgram) -> list:
    ran = set(schedule.order)
    out = []
    for prop in props:
        for inst in instantiate(prop, up):
            if all((p.t, p.i) in ran for p in inst.positions):
                if not evaluate(inst.formula, schedule.end_times):
                    out.append(inst)
    return out


def interleaving_bound(up: UnrolledProgram) -> int:
    """Upper bound on the number of schedules: interleavings of the threads."""
    counts = [len(th.ns) for th in up.threads]
    return factorial(sum(counts)) // prod(factorial(c) for c in counts)
