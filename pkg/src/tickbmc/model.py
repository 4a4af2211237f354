"""Annotated programs, sleep normalization and loop unrolling.

A thread is a sequence of ordinary statements (which occupy the processor
for their annotated duration) and sleep statements, optionally containing a
single non-nested loop.  Verification works on the unrolled, loop-free form
where statement positions are numbered ``1..n_t`` per thread.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, TypeVar


class Kind(enum.Enum):
    ORDINARY = "stmt"
    SLEEP = "sleep"
    LOOP = "loop"


@dataclass(frozen=True)
class Stmt:
    kind: Kind
    label: Optional[str] = None
    duration: int = 0
    body: tuple["Stmt", ...] = ()

    def __post_init__(self):
        if self.kind is not Kind.LOOP and self.duration < 1:
            raise ValueError(f"duration must be >= 1, got {self.duration}")
        if self.kind is Kind.LOOP and any(s.kind is Kind.LOOP for s in self.body):
            raise ValueError("nested loops are not supported")


def ordinary(label: str, duration: int) -> Stmt:
    return Stmt(Kind.ORDINARY, label, duration)


def sleep(duration: int) -> Stmt:
    return Stmt(Kind.SLEEP, None, duration)


def loop(*body: Stmt) -> Stmt:
    return Stmt(Kind.LOOP, body=tuple(body))


@dataclass(frozen=True)
class ThreadDef:
    name: str
    stmts: tuple[Stmt, ...]

    def __post_init__(self):
        if not self.stmts:
            raise ValueError(f"thread {self.name!r} has no statements")
        if sum(s.kind is Kind.LOOP for s in self.stmts) > 1:
            raise ValueError(f"thread {self.name!r} has more than one loop")

    def loop_labels(self) -> set[str]:
        return {
            b.label
            for s in self.stmts
            if s.kind is Kind.LOOP
            for b in s.body
            if b.label is not None
        }

    def labels(self) -> list[str]:
        out = []
        for s in self.stmts:
            for x in s.body if s.kind is Kind.LOOP else (s,):
                if x.label is not None:
                    out.append(x.label)
        return out


@dataclass(frozen=True)
class SourceProgram:
    threads: tuple[ThreadDef, ...]
    properties: tuple = ()  # of frontend.Property

    def __post_init__(self):
        if not self.threads:
            raise ValueError("no threads declared")
        names = [t.name for t in self.threads]
        if len(set(names)) != len(names):
            raise ValueError("duplicate thread name")

    def thread(self, name: str) -> ThreadDef:
        for t in self.threads:
            if t.name == name:
                return t
        raise KeyError(name)

    def thread_index(self, name: str) -> int:
        """1-based thread number."""
        for n, t in enumerate(self.threads, start=1):
            if t.name == name:
                return n
        raise KeyError(name)


@dataclass(frozen=True)
class UStmt:
    """One position of an unrolled thread.

    ``iteration`` is the 1-based loop replica, or 0 outside the loop.
    """

    label: Optional[str]
    iteration: int
    kind: Kind
    duration: int

    @property
    def display(self) -> str:
        if self.kind is Kind.SLEEP:
            return f"sleep({self.duration})"
        return f"{self.label}[{self.iteration}]" if self.iteration else str(self.label)


@dataclass(frozen=True)
class UnrolledThread:
    name: str
    stmts: tuple[UStmt, ...]
    # ordinary instances present at the requested unroll depth but cut by the bound
    dropped: frozenset[tuple[str, int]] = frozenset()

    @property
    def n(self) -> int:
        return len(self.stmts)

    @property
    def ns(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.stmts, start=1) if s.kind is Kind.ORDINARY)

    def stmt(self, i: int) -> UStmt:
        return self.stmts[i - 1]

    def duration(self, i: int) -> int:
        return self.stmts[i - 1].duration

    def is_sleep(self, i: int) -> bool:
        return 1 <= i <= self.n and self.stmts[i - 1].kind is Kind.SLEEP

    def position(self, label: str, iteration: int) -> Optional[int]:
        for i, s in enumerate(self.stmts, start=1):
            if s.kind is Kind.ORDINARY and s.label == label and s.iteration == iteration:
                return i
        return None


@dataclass(frozen=True)
class UnrolledProgram:
    threads: tuple[UnrolledThread, ...]
    rounds: int
    loop_iterations: int = 1
    source: Optional[SourceProgram] = field(default=None, compare=False, repr=False)

    @property
    def T(self) -> int:
        return len(self.threads)

    def thread(self, t: int) -> UnrolledThread:
        return self.threads[t - 1]

    def durations(self) -> dict[tuple[int, int], int]:
        return {
            (t, i): s.duration
            for t, th in enumerate(self.threads, start=1)
            for i, s in enumerate(th.stmts, start=1)
        }


S = TypeVar("S", Stmt, UStmt)


def normalize_sleeps(stmts: Sequence[S]) -> list[S]:
    """Merge adjacent sleeps, ``sleep(m); sleep(n)`` -> ``sleep(m+n)``.

    Loop bodies are normalized separately; merging never crosses a loop
    boundary at source level (unrolling takes care of that).
    """
    out: list = []
    for s in stmts:
        if s.kind is Kind.LOOP:
            s = replace(s, body=tuple(normalize_sleeps(s.body)))
        if s.kind is Kind.SLEEP and out and out[-1].kind is Kind.SLEEP:
            out[-1] = replace(out[-1], duration=out[-1].duration + s.duration)
        else:
            out.append(s)
    return out


def flatten(thread: ThreadDef, loop_iterations: int) -> list[UStmt]:
    flat = []
    for s in thread.stmts:
        if s.kind is Kind.LOOP:
            for it in range(1, loop_iterations + 1):
                flat.extend(UStmt(b.label, it, b.kind, b.duration) for b in s.body)
        else:
            flat.append(UStmt(s.label, 0, s.kind, s.duration))
    return normalize_sleeps(flat)


def ordinary_count(program: SourceProgram, loop_iterations: int = 1) -> int:
    return sum(
        1
        for th in program.threads
        for s in flatten(th, loop_iterations)
        if s.kind is Kind.ORDINARY
    )


def default_rounds(program: SourceProgram, loop_iterations: int = 1) -> int:
    """Largest useful bound: every ordinary statement gets a round."""
    return max(1, ordinary_count(program, loop_iterations))


def _truncate(flat: list[UStmt], keep: int) -> tuple[list[UStmt], frozenset]:
    if keep == 0:
        return flat, frozenset()
    seen = 0
    for pos, s in enumerate(flat):
        if s.kind is Kind.ORDINARY:
            seen += 1
            if seen == keep:
                break
    end = pos + 1
    if end < len(flat) and flat[end].kind is Kind.SLEEP:
        end += 1
    dropped = frozenset(
        (s.label, s.iteration) for s in flat[end:] if s.kind is Kind.ORDINARY
    )
    return flat[:end], dropped


def unroll(
    program: SourceProgram, loop_iterations: int = 1, rounds: Optional[int] = None
) -> UnrolledProgram:
    """Replicate loop bodies and cut every thread to ``rounds`` ordinary statements."""
    if loop_iterations < 1:
        raise ValueError("loop_iterations must be >= 1")
    if rounds is None:
        rounds = default_rounds(program, loop_iterations)
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    threads = []
    for th in program.threads:
        flat = flatten(th, loop_iterations)
        n_ord = sum(s.kind is Kind.ORDINARY for s in flat)
        stmts, dropped = _truncate(flat, min(rounds, n_ord))
        threads.append(UnrolledThread(th.name, tuple(stmts), dropped))
    return UnrolledProgram(tuple(threads), rounds, loop_iterations, program)
