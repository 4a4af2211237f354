"""Quantifier-free linear integer arithmetic formulas over schedule variables.

Variables are ``pc_t_k`` (program counter of thread t at round k), ``Y_k`` /
``X_k`` (start / end time of round k) and ``E_t_i`` (ending time of statement
i of thread t).  Durations appear as named constants ``D_t_i`` carrying their
value, so the emitted file can bind them in one place.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Union


@dataclass(frozen=True)
class SVar:
    kind: str  # 'pc' | 'Y' | 'X' | 'E'
    a: int
    b: int = 0

    @property
    def name(self) -> str:
        if self.kind in ("Y", "X"):
            return f"{self.kind}_{self.a}"
        return f"{self.kind}_{self.a}_{self.b}"

    def __str__(self):
        return self.name


def pc(t: int, k: int) -> SVar:
    return SVar("pc", t, k)


def Y(k: int) -> SVar:
    return SVar("Y", k)


def X(k: int) -> SVar:
    return SVar("X", k)


def E(t: int, i: int) -> SVar:
    return SVar("E", t, i)


def parse_var(name: str) -> SVar:
    kind, *idx = name.split("_")
    if kind not in ("pc", "Y", "X", "E") or len(idx) != (1 if kind in ("Y", "X") else 2):
        raise ValueError(f"not a schedule variable: {name!r}")
    return SVar(kind, *map(int, idx))


@dataclass(frozen=True)
class IntConst:
    value: int


@dataclass(frozen=True)
class Dur:
    t: int
    i: int
    value: int

    @property
    def name(self) -> str:
        return f"D_{self.t}_{self.i}"


@dataclass(frozen=True)
class Sum:
    args: tuple["Term", ...]


Term = Union[IntConst, SVar, Dur, Sum]


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # '=', '!=', '<', '<=', '>', '>='
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class And:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Formula", ...]


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


Formula = Union[BoolConst, Cmp, And, Or, Not, Implies]

TRUE = BoolConst(True)
FALSE = BoolConst(False)
CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


def _term(x) -> Term:
    return IntConst(x) if isinstance(x, int) else x


def add(*xs) -> Term:
    return Sum(tuple(_term(x) for x in xs))


def cmp(op: str, a, b) -> Cmp:
    if op not in CMP_OPS:
        raise ValueError(f"unknown comparison {op!r}")
    return Cmp(op, _term(a), _term(b))


def eq(a, b) -> Cmp:
    return cmp("=", a, b)


def ne(a, b) -> Cmp:
    return cmp("!=", a, b)


def le(a, b) -> Cmp:
    return cmp("<=", a, b)


def lt(a, b) -> Cmp:
    return cmp("<", a, b)


def gt(a, b) -> Cmp:
    return cmp(">", a, b)


def conj(*fs: Formula) -> Formula:
    out = []
    for f in fs:
        if isinstance(f, And):
            out.extend(f.args)
        elif f == FALSE:
            return FALSE
        elif f != TRUE:
            out.append(f)
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*fs: Formula) -> Formula:
    out = []
    for f in fs:
        if isinstance(f, Or):
            out.extend(f.args)
        elif f == TRUE:
            return TRUE
        elif f != FALSE:
            out.append(f)
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else Or(tuple(out))


def children(f) -> tuple:
    if isinstance(f, (Sum, And, Or)):
        return f.args
    if isinstance(f, (Cmp, Implies)):
        return (f.lhs, f.rhs)
    if isinstance(f, Not):
        return (f.arg,)
    return ()


def walk(f) -> Iterator:
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def node_count(f) -> int:
    return sum(1 for _ in walk(f))


def variables(f) -> set[SVar]:
    return {n for n in walk(f) if isinstance(n, SVar)}


def evaluate(f, env: Mapping[SVar, int]):
    """Value of a term (int) or formula (bool) under an assignment."""
    if isinstance(f, SVar):
        return env[f]
    if isinstance(f, IntConst):
        return f.value
    if isinstance(f, Dur):
        return f.value
    if isinstance(f, Sum):
        return sum(evaluate(a, env) for a in f.args)
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, Cmp):
        a, b = evaluate(f.lhs, env), evaluate(f.rhs, env)
        return {
            "=": a == b,
            "!=": a != b,
            "<": a < b,
            "<=": a <= b,
            ">": a > b,
            ">=": a >= b,
        }[f.op]
    if isinstance(f, And):
        return all(evaluate(a, env) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, env) for a in f.args)
    if isinstance(f, Not):
        return not evaluate(f.arg, env)
    if isinstance(f, Implies):
        return (not evaluate(f.lhs, env)) or evaluate(f.rhs, env)
    raise TypeError(f"not a formula node: {f!r}")


_SMT_OP = {"=": "=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def to_smtlib(f) -> str:
    if isinstance(f, SVar):
        return f.name
    if isinstance(f, Dur):
        return f.name
    if isinstance(f, IntConst):
        return str(f.value) if f.value >= 0 else f"(- {-f.value})"
    if isinstance(f, Sum):
        return "(+ " + " ".join(map(to_smtlib, f.args)) + ")"
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, Cmp):
        a, b = to_smtlib(f.lhs), to_smtlib(f.rhs)
        if f.op == "!=":
            return f"(not (= {a} {b}))"
        return f"({_SMT_OP[f.op]} {a} {b})"
    if isinstance(f, And):
        return "(and " + " ".join(map(to_smtlib, f.args)) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(map(to_smtlib, f.args)) + ")"
    if isinstance(f, Not):
        return f"(not {to_smtlib(f.arg)})"
    if isinstance(f, Implies):
        return f"(=> {to_smtlib(f.lhs)} {to_smtlib(f.rhs)})"
    raise TypeError(f"not a formula node: {f!r}")


def pretty(f) -> str:
    """Infix rendering, for diagnostics and documentation."""
    if isinstance(f, (SVar, Dur)):
        return f.name
    if isinstance(f, IntConst):
        return str(f.value)
    if isinstance(f, Sum):
        return " + ".join(map(pretty, f.args))
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, Cmp):
        return f"{pretty(f.lhs)} {f.op} {pretty(f.rhs)}"
    if isinstance(f, And):
        return " & ".join(_paren(a) for a in f.args)
    if isinstance(f, Or):
        return " | ".join(_paren(a) for a in f.args)
    if isinstance(f, Not):
        return "!" + _paren(f.arg)
    return f"{_paren(f.lhs)} -> {_paren(f.rhs)}"


def _paren(f) -> str:
    s = pretty(f)
    return s if isinstance(f, (Cmp, BoolConst, Not)) else f"({s})"
