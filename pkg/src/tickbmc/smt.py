"""SMT-LIB v2 emission, external solver driver and model decoding."""

from __future__ import annotations

import os
import select
import shlex
import shutil
import subprocess
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import formula as F
from .encode import Encoding, gen_some_executable
from .formula import SVar
from .model import UnrolledProgram
from .schedule import Round, Schedule, violations

SOLVER_ENV = "TICKBMC_SOLVER"
DEFAULT_TIMEOUT = 60.0


class SolverError(Exception):
    def __init__(self, message: str, output: str = ""):
        super().__init__(message)
        self.output = output


class DecodeError(Exception):
    """A model that does not describe a schedule (points at an encoder bug)."""


def _default_command() -> tuple[str, ...]:
    env = os.environ.get(SOLVER_ENV)
    if env:
        return tuple(shlex.split(env))
    z3 = shutil.which("z3") or str(Path(sys.executable).with_name("z3"))
    return (z3, "-in", "-smt2")


@dataclass(frozen=True)
class SolverConfig:
    command: tuple[str, ...] = field(default_factory=_default_command)
    timeout: float = DEFAULT_TIMEOUT

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    @classmethod
    def from_string(cls, command: Optional[str] = None, timeout: float = DEFAULT_TIMEOUT):
        if command:
            return cls(tuple(shlex.split(command)), timeout)
        return cls(timeout=timeout)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def serialize(
    parts: Sequence[tuple[str, F.Formula]],
    variables: Sequence[SVar],
    durations: Sequence[F.Dur] = (),
    header: Sequence[str] = (),
) -> str:
    """Deterministic SMT-LIB v2 text: declarations, assertions, check-sat, get-value."""
    lines = [f"; {h}" for h in header]
    lines += ["(set-option :produce-models true)", "(set-logic QF_LIA)"]
    if durations:
        lines.append("; timing annotations")
        for d in durations:
            lines.append(f"(declare-fun {d.name} () Int)")
        for d in durations:
            lines.append(f"(assert (= {d.name} {d.value}))")
    if variables:
        lines.append("; schedule variables")
        lines += [f"(declare-fun {v.name} () Int)" for v in variables]
    for name, f in parts:
        lines.append(f"; {name}")
        lines.append(f"(assert {F.to_smtlib(f)})")
    lines.append("(check-sat)")
    if variables:
        lines.append("(get-value (" + " ".join(v.name for v in variables) + "))")
    lines.append("(exit)")
    return "\n".join(lines) + "\n"


def serialize_encoding(enc: Encoding, extra: Sequence[tuple[str, F.Formula]] = ()) -> str:
    up = enc.up
    header = [
        "bounded schedule encoding",
        f"threads: {', '.join(th.name for th in up.threads)}",
        f"rounds N={up.rounds}, loop iterations L={up.loop_iterations}",
    ]
    return serialize(list(enc.parts) + list(extra), enc.variables, enc.durations, header)


# ---------------------------------------------------------------------------
# Solver driver
# ---------------------------------------------------------------------------


@dataclass
class SolverResult:
    status: str  # 'sat' | 'unsat'
    bindings: dict[str, int] = field(default_factory=dict)


def _sexprs(text: str):
    """Tokenize solver output into nested lists of atoms."""
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            tokens.append(c)
            i += 1
        elif c == '"':
            j = i + 1
            while j < len(text) and text[j] != '"':
                j += 2 if text[j] == "\\" else 1
            tokens.append(text[i : j + 1])
            i = j + 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in '()"':
                j += 1
            tokens.append(text[i:j])
            i = j
    stack: list[list] = [[]]
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ValueError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ValueError("unbalanced '('")
    return stack[0]


def _int_value(v) -> int:
    if isinstance(v, str):
        return int(v)
    if len(v) == 2 and v[0] == "-":
        return -_int_value(v[1])
    raise ValueError(f"not an integer literal: {v!r}")


def parse_output(out: str) -> SolverResult:
    try:
        items = _sexprs(out)
    except ValueError as e:
        raise SolverError(f"unparseable solver output: {e}", out) from None
    status = None
    for n, item in enumerate(items):
        if isinstance(item, list) and item and item[0] == "error":
            if status == "unsat":
                # the trailing get-value has no model to report
                continue
            raise SolverError(f"solver error: {' '.join(map(str, item[1:]))}", out)
        if status is None:
            if item in ("sat", "unsat"):
                status = item
                continue
            if item == "success":
                continue
            raise SolverError(f"unexpected solver answer {item!r}", out)
        if status == "sat" and isinstance(item, list):
            try:
                bindings = {name: _int_value(val) for name, val in item}
            except (ValueError, TypeError):
                raise SolverError("unparseable model", out) from None
            return SolverResult("sat", bindings)
    if status is None:
        raise SolverError("solver produced no verdict", out)
    return SolverResult(status)


def solve(text: str, solver: Optional[SolverConfig] = None) -> SolverResult:
    solver = solver or SolverConfig()
    try:
        proc = subprocess.run(
            list(solver.command),
            input=text,
            capture_output=True,
            text=True,
            timeout=solver.timeout,
        )
    except subprocess.TimeoutExpired as e:
        raise SolverError(f"solver timed out after {solver.timeout:g}s", str(e.stdout or "")) from None
    except OSError as e:
        raise SolverError(f"cannot run solver {solver.command[0]!r}: {e}") from None
    res = parse_output(proc.stdout)
    if proc.returncode != 0 and res.status != "unsat":
        raise SolverError(
            f"solver exited with status {proc.returncode}", proc.stdout + proc.stderr
        )
    return res


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------


def as_env(bindings: dict[str, int]) -> dict[SVar, int]:
    return {F.parse_var(k): v for k, v in bindings.items()}


def decode(bindings: dict[str, int], up: UnrolledProgram) -> Schedule:
    env = as_env(bindings)
    N = up.rounds
    rounds = []
    end_times = {}
    for t in range(1, up.T + 1):
        if up.thread(t).is_sleep(1):
            end_times[t, 1] = env[F.E(t, 1)]
    for k in range(1, N + 1):
        moved = []
        for t in range(1, up.T + 1):
            a, b = env[F.pc(t, k)], env[F.pc(t, k + 1)]
            if b != a:
                moved.append((t, a, b))
        start, end = env[F.Y(k)], env[F.X(k)]
        if not moved:
            if any(env[F.pc(t, k)] != up.thread(t).n + 1 for t in range(1, up.T + 1)):
                raise DecodeError(f"round {k}: nothing executes but program not terminated")
            rounds.append(Round(k, None, start, end))
            continue
        if len(moved) != 1:
            raise DecodeError(f"round {k}: {len(moved)} threads advance")
        t, i, nxt = moved[0]
        th = up.thread(t)
        if i not in th.ns or nxt <= i:
            raise DecodeError(f"round {k}: invalid program counter step {i} -> {nxt}")
        end_times[t, i] = env[F.E(t, i)]
        if th.is_sleep(i + 1):
            end_times[t, i + 1] = env[F.E(t, i + 1)]
        rounds.append(Round(k, (t, i), start, end))
    return Schedule(tuple(rounds), end_times)


def model_violations(bindings: dict[str, int], up: UnrolledProgram) -> list[str]:
    """Invariants every model of ``sched`` must satisfy, checked on raw bindings."""
    env = as_env(bindings)
    out = []
    N = up.rounds
    for t in range(1, up.T + 1):
        th = up.thread(t)
        legal = set(th.ns) | {th.n + 1}
        for k in range(1, N + 2):
            if env[F.pc(t, k)] not in legal:
                out.append(f"pc_{t}_{k}={env[F.pc(t, k)]} outside NS ∪ {{n+1}}")
            if k <= N and env[F.pc(t, k + 1)] < env[F.pc(t, k)]:
                out.append(f"pc_{t} decreases at round {k}")
    for k in range(1, N + 1):
        if env[F.Y(k + 1)] < env[F.X(k)]:
            out.append(f"Y_{k + 1} < X_{k}")
        if F.evaluate(gen_some_executable(up, k), env) and env[F.Y(k + 1)] != env[F.X(k)]:
            out.append(f"round {k}: some thread ready but Y_{k + 1} != X_{k}")
    try:
        out += violations(decode(bindings, up), up)
    except DecodeError as e:
        out.append(str(e))
    return out


def block_trajectory(bindings: dict[str, int], up: UnrolledProgram) -> F.Formula:
    """Exclude every model with the same program-counter trajectory."""
    lits = [
        F.eq(F.pc(t, k), bindings[F.pc(t, k).name])
        for t in range(1, up.T + 1)
        for k in range(1, up.rounds + 2)
    ]
    return F.Not(F.conj(*lits))


class SolverSession:
    """One long-lived solver process fed assertions incrementally.

    Used for model enumeration, where each blocking clause only adds to the
    previous query.
    """

    def __init__(self, solver: Optional[SolverConfig] = None):
        self.solver = solver or SolverConfig()
        try:
            self.proc = subprocess.Popen(
                list(self.solver.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as e:
            raise SolverError(f"cannot run solver {self.solver.command[0]!r}: {e}") from None
        self._buf = b""

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self) -> None:
        if self.proc.poll() is None:
            self.proc.kill()
        self.proc.wait()

    def send(self, text: str) -> None:
        try:
            self.proc.stdin.write(text.encode())
            self.proc.stdin.flush()
        except OSError as e:
            raise SolverError(f"solver died: {e}") from None

    def _complete(self) -> Optional[int]:
        """End offset of the first complete s-expression in the buffer, if any."""
        depth = 0
        started = False
        in_str = False
        for n, c in enumerate(self._buf.decode(errors="replace")):
            if in_str:
                in_str = c != '"'
                continue
            if c == '"':
                in_str = True
            elif c == "(":
                depth += 1
                started = True
            elif c == ")":
                depth -= 1
                if depth == 0:
                    return n + 1
            elif c.isspace():
                if started and depth == 0:
                    return n
            else:
                started = True
        return None

    def read(self, deadline: float) -> str:
        fd = self.proc.stdout.fileno()
        while (end := self._complete()) is None:
            left = deadline - time.monotonic()
            if left <= 0:
                raise SolverError(f"solver timed out after {self.solver.timeout:g}s")
            ready, _, _ = select.select([fd], [], [], left)
            if ready:
                chunk = os.read(fd, 65536)
                if not chunk:
                    raise SolverError("solver closed its output", self._buf.decode())
                self._buf += chunk
        text = self._buf.decode()
        out, self._buf = text[:end], text[end:].encode()
        return out

    def check(self, variables: Sequence[SVar]) -> SolverResult:
        deadline = time.monotonic() + self.solver.timeout
        self.send("(check-sat)\n")
        answer = self.read(deadline).strip()
        if answer == "unsat":
            return SolverResult("unsat")
        if answer != "sat":
            raise SolverError(f"unexpected solver answer {answer!r}", answer)
        self.send("(get-value (" + " ".join(v.name for v in variables) + "))\n")
        return parse_output("sat\n" + self.read(deadline))


def enumerate_models(
    enc: Encoding, limit: int, solver: Optional[SolverConfig] = None
) -> list[dict[str, int]]:
    """Models with pairwise distinct program-counter trajectories."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    text = serialize_encoding(enc)
    base = text[: text.index("(check-sat)")]
    models = []
    with SolverSession(solver) as session:
        session.send(base)
        while len(models) < limit:
            res = session.check(enc.variables)
            if res.status == "unsat":
                break
            models.append(res.bindings)
            block = block_trajectory(res.bindings, enc.up)
            session.send(f"(assert {F.to_smtlib(block)})\n")
    return models


def enumerate_schedules(
    enc: Encoding, limit: int, solver: Optional[SolverConfig] = None
) -> list[Schedule]:
    """Distinct schedules (by execution order) satisfying the encoding."""
    return [decode(m, enc.up) for m in enumerate_models(enc, limit, solver)]
