"""Command line: ``tickbmc verify|emit|simulate FILE``.

Exit status: 0 the properties hold, 1 a violation was found, 2 input or
solver error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import report
from .encode import encode
from .frontend import ParseError, UnreachableUnderBound, parse_program
from .model import unroll
from .smt import DEFAULT_TIMEOUT, SOLVER_ENV, SolverConfig, serialize_encoding
from .verify import ERROR, HOLDS, TooManySchedules, simulate, verify

EXIT_HOLDS, EXIT_VIOLATED, EXIT_ERROR = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    input: Path
    rounds: Optional[int] = None
    loop_iterations: int = 1
    solver: Optional[str] = None
    timeout: float = DEFAULT_TIMEOUT
    format: str = "text"

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("--timeout must be positive")
        if self.rounds is not None and self.rounds < 1:
            raise ValueError("--rounds must be >= 1")
        if self.loop_iterations < 1:
            raise ValueError("--unroll must be >= 1")

    def solver_config(self) -> SolverConfig:
        return SolverConfig.from_string(self.solver, self.timeout)


def _load(cfg: RunConfig):
    try:
        text = cfg.input.read_text(encoding="utf-8")
    except OSError as e:
        raise _Fail(f"{cfg.input}: {e.strerror}") from None
    try:
        return parse_program(text)
    except ParseError as e:
        raise _Fail("\n".join(f"{cfg.input}:{d}" for d in e.diagnostics)) from None


class _Fail(Exception):
    pass


def cmd_verify(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    prog = _load(cfg)
    try:
        v = verify(prog, cfg.rounds, cfg.loop_iterations, cfg.solver_config())
    except UnreachableUnderBound as e:
        raise _Fail(str(e)) from None
    if cfg.format == "structured":
        out.write(report.dumps(report.verdict_json(v)))
    else:
        out.write(report.verdict_text(v))
    if v.status == ERROR:
        return EXIT_ERROR
    return EXIT_HOLDS if v.status == HOLDS else EXIT_VIOLATED


def cmd_emit(cfg: RunConfig, output: Optional[Path], out=None) -> int:
    out = out or sys.stdout
    prog = _load(cfg)
    t0 = time.perf_counter()
    try:
        up = unroll(prog, cfg.loop_iterations, cfg.rounds)
        enc = encode(up, prog.properties)
    except UnreachableUnderBound as e:
        raise _Fail(str(e)) from None
    text = serialize_encoding(enc)
    elapsed = time.perf_counter() - t0
    nodes = enc.node_count()
    if output is None:
        out.write(text)
        info = sys.stderr
    else:
        output.write_text(text, encoding="utf-8")
        info = out
    if cfg.format == "structured":
        info.write(report.dumps({
            "output": str(output) if output else None,
            "bound": up.rounds,
            "loop_iterations": up.loop_iterations,
            "node_count": nodes,
            "timings": {"encode": round(elapsed, 6)},
        }))
    else:
        info.write(f"encoding time: {elapsed:.3f}s, formula nodes: {nodes}, bound N={up.rounds}\n")
    return EXIT_HOLDS


def cmd_simulate(cfg: RunConfig, cap: int, out=None) -> int:
    out = out or sys.stdout
    prog = _load(cfg)
    try:
        sim = simulate(prog, cfg.rounds, cfg.loop_iterations, cap)
    except TooManySchedules as e:
        raise _Fail(str(e)) from None
    except UnreachableUnderBound as e:
        raise _Fail(str(e)) from None
    if cfg.format == "structured":
        out.write(report.dumps({
            "verdict": sim.status,
            "bound": sim.up.rounds,
            "loop_iterations": sim.up.loop_iterations,
            "schedules": [
                {"schedule": report.schedule_rows(s, sim.up),
                 "failed": [report.instance_dict(i) for i in failed]}
                for s, failed in sim.runs
            ],
        }))
    else:
        out.write(f"{len(sim.runs)} schedule(s) (bound N={sim.up.rounds})\n")
        for n, (s, failed) in enumerate(sim.runs, start=1):
            verdict = "violates " + "; ".join(i.describe() for i in failed) if failed else "ok"
            out.write(f"\nschedule {n}: {verdict}\n{report.timeline(s, sim.up)}\n")
        out.write(f"\n{sim.status.upper()}\n")
    return EXIT_HOLDS if sim.status == HOLDS else EXIT_VIOLATED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", type=Path, help=".tick program")
    common.add_argument("--rounds", "-N", type=int, help="schedule bound (default: all ordinary statements)")
    common.add_argument("--unroll", "-L", type=int, default=1, dest="loop_iterations",
                        help="loop unrolling depth (default 1)")
    common.add_argument("--solver", help=f"solver command line (default: ${SOLVER_ENV} or 'z3 -in -smt2')")
    common.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="seconds per solver query")
    common.add_argument("--format", choices=("text", "structured"), default="text")

    p = argparse.ArgumentParser(prog="tickbmc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="check all properties with the SMT solver")
    e = sub.add_parser("emit", parents=[common], help="write the SMT-LIB encoding")
    e.add_argument("-o", "--output", type=Path, help="output file (default: stdout)")
    s = sub.add_parser("simulate", parents=[common], help="enumerate schedules by brute force")
    s.add_argument("--cap", type=int, default=100_000, help="maximum interleavings to explore")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(args.input, args.rounds, args.loop_iterations, args.solver, args.timeout, args.format)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "emit":
            return cmd_emit(cfg, args.output)
        return cmd_simulate(cfg, args.cap)
    except (_Fail, ValueError) as e:
        print(f"tickbmc: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
