"""Bundled example programs, parametric families and a random program generator."""

from __future__ import annotations

import random
from importlib import resources

from ..frontend import parse_program
from ..model import SourceProgram

BUNDLED = ("toy", "toy_mutated", "producer_consumer", "conflict")


def text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.tick").read_text(encoding="utf-8")


def load(name: str) -> SourceProgram:
    return parse_program(text(name))


def path(name: str):
    return resources.files(__name__).joinpath(f"{name}.tick")


def pipeline_text(threads: int) -> str:
    """One producer and ``threads - 1`` consumers; consumer c_m sleeps 2m+1."""
    if threads < 2:
        raise ValueError("a pipeline needs at least two threads")
    lines = [
        "# pipeline: each consumer copies its predecessor's variable",
        "thread p {",
        "    stmt l1 dur 1;    # j0 = 0",
        "    stmt l2 dur 2;    # j0 += 2",
        "}",
    ]
    for m in range(1, threads):
        lines += [
            f"thread c{m} {{",
            f"    sleep {2 * m + 1};",
            f"    stmt l4 dur 2;    # j{m} = j{m - 1}",
            "}",
        ]
    atoms = ["before(p.l2, c1.l4)"]
    atoms += [f"before(c{m - 1}.l4, c{m}.l4)" for m in range(2, threads)]
    lines.append("property copies { " + " and ".join(atoms) + " }")
    return "\n".join(lines) + "\n"


def pipeline(threads: int) -> SourceProgram:
    return parse_program(pipeline_text(threads))


def random_text(rng: random.Random, max_threads: int = 3, max_stmts: int = 4, loop_iterations: int = 1) -> str:
    """A small random program with one random property.

    Every thread has at most ``max_stmts`` statements once its loop is
    unrolled ``loop_iterations`` times.
    """
    T = rng.randint(1, max_threads)
    threads = []
    ordinary = []  # (thread, label, in_loop)
    for t in range(1, T + 1):
        name = f"t{t}"
        n = rng.randint(1, max_stmts)
        stmts = []
        for s in range(1, n + 1):
            if rng.random() < 0.7:
                stmts.append(("stmt", f"s{s}", rng.randint(1, 3)))
            else:
                stmts.append(("sleep", None, rng.randint(1, 3)))
        lo = hi = None
        if rng.random() < 0.3:
            size = rng.randint(1, n)
            extra = size * (loop_iterations - 1)
            if n + extra <= max_stmts:
                lo = rng.randint(0, n - size)
                hi = lo + size
        body = []
        for idx, (kind, label, d) in enumerate(stmts):
            pad = "        " if lo is not None and lo <= idx < hi else "    "
            if idx == lo:
                body.append("    loop {")
            body.append(f"{pad}stmt {label} dur {d};" if kind == "stmt" else f"{pad}sleep {d};")
            if idx == (hi - 1 if hi is not None else None):
                body.append("    }")
            if kind == "stmt":
                ordinary.append((name, label, lo is not None and lo <= idx < hi))
        threads.append(f"thread {name} {{\n" + "\n".join(body) + "\n}")
    out = "\n".join(threads) + "\n"
    if ordinary:
        out += f"property p {{ {_random_expr(rng, ordinary, 2)} }}\n"
    return out


def _random_ref(rng: random.Random, ordinary) -> str:
    th, label, in_loop = rng.choice(ordinary)
    if not in_loop:
        return f"{th}.{label}"
    return f"{th}.{label}[{rng.choice(['i', 'i', 'i+1', '1'])}]"


def _random_expr(rng: random.Random, ordinary, depth: int) -> str:
    r = rng.random()
    if depth == 0 or r < 0.45:
        return f"before({_random_ref(rng, ordinary)}, {_random_ref(rng, ordinary)})"
    if r < 0.55:
        return f"not ({_random_expr(rng, ordinary, depth - 1)})"
    op = rng.choice(["and", "or", "->"])
    a = _random_expr(rng, ordinary, depth - 1)
    b = _random_expr(rng, ordinary, depth - 1)
    return f"({a}) {op} ({b})"


def random_instance(rng: random.Random, max_rounds: int = 6):
    """``(program, loop_iterations, rounds)`` whose property survives the bound."""
    from ..frontend import UnreachableUnderBound, instantiate
    from ..model import unroll

    while True:
        L = rng.choice([1, 1, 2])
        prog = parse_program(random_text(rng, loop_iterations=L))
        for N in range(rng.randint(1, max_rounds), max_rounds + 1):
            up = unroll(prog, L, N)
            try:
                for prop in prog.properties:
                    instantiate(prop, up)
            except UnreachableUnderBound:
                continue
            return prog, L, N
