"""End-to-end checks: encode and solve, or enumerate with the oracle."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from . import oracle
from .encode import encode
from .frontend import Instance, Property
from .model import SourceProgram, UnrolledProgram, unroll
from .schedule import Schedule
from .smt import DecodeError, SolverConfig, SolverError, decode, serialize_encoding, solve

HOLDS, VIOLATED, ERROR = "holds", "violated", "error"


@dataclass
class Verdict:
    status: str
    up: UnrolledProgram
    schedule: Optional[Schedule] = None
    failed: list[Instance] = field(default_factory=list)
    message: str = ""
    node_count: int = 0
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def bound(self) -> int:
        return self.up.rounds


def verify(
    program: SourceProgram,
    rounds: Optional[int] = None,
    loop_iterations: int = 1,
    solver: Optional[SolverConfig] = None,
    properties: Optional[list[Property]] = None,
) -> Verdict:
    """Check ``sched and not lambda`` for all properties in one solver query.

    Raises :class:`~tickbmc.frontend.UnreachableUnderBound` when a property
    names a statement the bound cuts away.
    """
    props = list(program.properties if properties is None else properties)
    t0 = time.perf_counter()
    up = unroll(program, loop_iterations, rounds)
    enc = encode(up, props)
    text = serialize_encoding(enc)
    t1 = time.perf_counter()
    v = Verdict(HOLDS, up, node_count=enc.node_count())
    try:
        res = solve(text, solver)
    except SolverError as e:
        v.status, v.message = ERROR, str(e)
        return v
    finally:
        v.timings = {"encode": t1 - t0, "solve": time.perf_counter() - t1}
    if res.status == "unsat":
        return v
    try:
        v.schedule = decode(res.bindings, up)
    except DecodeError as e:
        v.status, v.message = ERROR, f"cannot decode model: {e}"
        return v
    v.status = VIOLATED
    v.failed = oracle.failed_instances(v.schedule, props, up)
    if not v.failed:
        v.status, v.message = ERROR, "solver model violates no property instance"
    return v


class TooManySchedules(Exception):
    def __init__(self, estimate: int, cap: int):
        super().__init__(
            f"refusing to enumerate: up to {estimate} interleavings exceeds the cap of {cap}"
        )
        self.estimate = estimate
        self.cap = cap


@dataclass
class Simulation:
    up: UnrolledProgram
    runs: list[tuple[Schedule, list[Instance]]]

    @property
    def status(self) -> str:
        return VIOLATED if any(failed for _, failed in self.runs) else HOLDS


def simulate(
    program: SourceProgram,
    rounds: Optional[int] = None,
    loop_iterations: int = 1,
    cap: int = 100_000,
) -> Simulation:
    up = unroll(program, loop_iterations, rounds)
    estimate = oracle.interleaving_bound(up)
    if estimate > cap:
        raise TooManySchedules(estimate, cap)
    scheds = oracle.enumerate_schedules(up)
    runs = [(s, oracle.failed_instances(s, program.properties, up)) for s in scheds]
    return Simulation(up, runs)
