"""Constraint generation: eager single-processor schedules as QF_LIA.

``sched`` is ``init`` conjoined with one ``round`` formula per round.  A round
either keeps an already terminated program frozen, or executes one ordinary
statement of a thread that is ready at the round's start time and then fixes
the start time of the next round (immediately if some thread is ready, at the
earliest wake-up time otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import formula as F
from .formula import E, X, Y, Formula, pc
from .frontend import (
    And as PAnd,
    Before,
    Implies as PImplies,
    Instance,
    Not as PNot,
    Or as POr,
    Property,
    instantiate,
)
from .model import UnrolledProgram


def dur(up: UnrolledProgram, t: int, i: int) -> F.Dur:
    return F.Dur(t, i, up.thread(t).duration(i))


def _threads(up: UnrolledProgram) -> range:
    return range(1, up.T + 1)


def _min_choice(target: F.Term, candidates: Sequence[tuple[int, F.Term]]) -> Formula:
    """``target = min(values)`` as a disjunction over which candidate is minimal."""
    return F.disj(
        *(
            F.conj(
                *(F.le(v, w) for u, w in candidates if u != t),
                F.eq(target, v),
            )
            for t, v in candidates
        )
    )


def gen_init(up: UnrolledProgram) -> Formula:
    pcs, ends = [], []
    live = []
    for t in _threads(up):
        th = up.thread(t)
        if th.is_sleep(1):
            pcs.append(F.eq(pc(t, 1), 2))
            ends.append(F.eq(E(t, 1), dur(up, t, 1)))
            if th.n >= 2:
                live.append(t)
        else:
            pcs.append(F.eq(pc(t, 1), 1))
    if len(ends) < up.T:
        start = [F.eq(Y(1), 0)]
    else:
        # threads consisting of a single sleep are terminated from the start
        # and do not delay the first round
        pool = live or list(_threads(up))
        start = [_min_choice(Y(1), [(t, dur(up, t, 1)) for t in pool])]
        if not live:
            start.append(F.eq(X(1), Y(1)))
    return F.conj(*pcs, *start, *ends)


def gen_exec(up: UnrolledProgram, t: int, i: int, k: int) -> Formula:
    th = up.thread(t)
    if i not in th.ns:
        raise ValueError(f"statement {i} of thread {t} is not an ordinary statement")
    parts = [
        F.eq(pc(t, k), i),
        F.eq(X(k), F.add(Y(k), dur(up, t, i))),
        F.eq(E(t, i), X(k)),
    ]
    if th.is_sleep(i + 1):
        parts.append(F.eq(E(t, i + 1), F.add(X(k), dur(up, t, i + 1))))
        parts.append(F.eq(pc(t, k + 1), i + 2))
    else:
        parts.append(F.eq(pc(t, k + 1), i + 1))
    parts.extend(F.eq(pc(u, k + 1), pc(u, k)) for u in _threads(up) if u != t)
    return F.conj(*parts)


def expand_eprev(
    up: UnrolledProgram, t: int, k: int, op: str, expr, flip: bool = False
) -> Formula:
    """``E_prev(t, k) op expr`` (or ``expr op E_prev`` when ``flip``).

    E_prev is the ending time of the statement just before the one thread t
    is about to execute at round k.
    """
    out = []
    for i in range(1, up.thread(t).n + 1):
        c = F.cmp(op, expr, E(t, i)) if flip else F.cmp(op, E(t, i), expr)
        out.append(F.conj(F.eq(pc(t, k), i + 1), c))
    return F.disj(*out)


def eprev_pair(up: UnrolledProgram, t: int, u: int, k: int, op: str) -> Formula:
    """``E_prev(t, k) op E_prev(u, k)`` over joint program-counter cases."""
    out = []
    for i in range(1, up.thread(t).n + 1):
        for j in range(1, up.thread(u).n + 1):
            out.append(
                F.conj(
                    F.eq(pc(t, k), i + 1),
                    F.eq(pc(u, k), j + 1),
                    F.cmp(op, E(t, i), E(u, j)),
                )
            )
    return F.disj(*out)


def _done(up: UnrolledProgram, t: int) -> int:
    return up.thread(t).n + 1


def gen_terminated(up: UnrolledProgram, k: int) -> Formula:
    parts = []
    for t in _threads(up):
        parts.append(F.eq(pc(t, k), _done(up, t)))
        parts.append(F.eq(pc(t, k + 1), pc(t, k)))
    return F.conj(*parts, F.eq(Y(k + 1), X(k)), F.eq(X(k + 1), X(k)))


def gen_some_executable(up: UnrolledProgram, k: int) -> Formula:
    return F.disj(
        *(
            F.conj(
                F.ne(pc(t, k + 1), _done(up, t)),
                F.disj(F.eq(pc(t, k + 1), 1), expand_eprev(up, t, k + 1, "<=", X(k))),
            )
            for t in _threads(up)
        )
    )


def gen_set_min_end_time(up: UnrolledProgram, k: int) -> Formula:
    out = []
    for t in _threads(up):
        out.append(
            F.conj(
                F.ne(pc(t, k + 1), _done(up, t)),
                *(
                    F.Implies(
                        F.ne(pc(u, k + 1), _done(up, u)),
                        eprev_pair(up, t, u, k + 1, "<="),
                    )
                    for u in _threads(up)
                    if u != t
                ),
                expand_eprev(up, t, k + 1, "=", Y(k + 1), flip=True),
            )
        )
    return F.disj(*out)


def gen_all_done(up: UnrolledProgram, k: int) -> Formula:
    """Round k executed the program's last statement: freeze time from here on."""
    return F.conj(
        *(F.eq(pc(t, k + 1), _done(up, t)) for t in _threads(up)),
        F.eq(Y(k + 1), X(k)),
        F.eq(X(k + 1), X(k)),
    )


def gen_fix_starting_time(up: UnrolledProgram, k: int) -> Formula:
    some = gen_some_executable(up, k)
    return F.disj(
        F.conj(some, F.eq(Y(k + 1), X(k))),
        F.conj(F.Not(some), gen_set_min_end_time(up, k)),
        gen_all_done(up, k),
    )


def gen_exec_thread(up: UnrolledProgram, k: int) -> Formula:
    choices = []
    for t in _threads(up):
        for i in up.thread(t).ns:
            ready = F.TRUE if i == 1 else F.le(E(t, i - 1), Y(k))
            choices.append(F.conj(gen_exec(up, t, i, k), ready))
    return F.conj(F.disj(*choices), gen_fix_starting_time(up, k))


def gen_round(up: UnrolledProgram, k: int) -> Formula:
    return F.disj(gen_terminated(up, k), gen_exec_thread(up, k))


def gen_sched(up: UnrolledProgram) -> Formula:
    return F.conj(gen_init(up), *(gen_round(up, k) for k in range(1, up.rounds + 1)))


def _translate(e) -> Formula:
    if isinstance(e, Before):
        return F.lt(E(e.a.t, e.a.i), E(e.b.t, e.b.i))
    if isinstance(e, PNot):
        return F.Not(_translate(e.arg))
    if isinstance(e, PAnd):
        return F.And(tuple(map(_translate, e.args)))
    if isinstance(e, POr):
        return F.Or(tuple(map(_translate, e.args)))
    if isinstance(e, PImplies):
        return F.Implies(_translate(e.lhs), _translate(e.rhs))
    raise TypeError(e)


def gen_instance(up: UnrolledProgram, inst: Instance) -> Formula:
    """Guarded instance: the inequations matter only if every statement ran."""
    n1 = up.rounds + 1
    guard = F.conj(*(F.gt(pc(p.t, n1), p.i) for p in inst.positions))
    return F.Implies(guard, _translate(inst.formula))


def gen_property(up: UnrolledProgram, prop: Property) -> Formula:
    return F.conj(*(gen_instance(up, inst) for inst in instantiate(prop, up)))


def schedule_variables(up: UnrolledProgram) -> list[F.SVar]:
    N = up.rounds
    out = [pc(t, k) for t in _threads(up) for k in range(1, N + 2)]
    out += [Y(k) for k in range(1, N + 2)]
    out += [X(k) for k in range(1, N + 2)]
    out += [E(t, i) for t in _threads(up) for i in range(1, up.thread(t).n + 1)]
    return out


@dataclass
class Encoding:
    """Named top-level assertions plus the variable layout they range over."""

    up: UnrolledProgram
    parts: list[tuple[str, Formula]]
    variables: list[F.SVar] = field(default_factory=list)

    @property
    def durations(self) -> list[F.Dur]:
        return [
            dur(self.up, t, i)
            for t in _threads(self.up)
            for i in range(1, self.up.thread(t).n + 1)
        ]

    def node_count(self) -> int:
        return sum(F.node_count(f) for _, f in self.parts)

    def formulas(self) -> list[Formula]:
        return [f for _, f in self.parts]


def encode(
    up: UnrolledProgram, properties: Optional[Iterable[Property]] = None, negate: bool = True
) -> Encoding:
    """``sched``, plus the negated conjunction of ``properties`` when given.

    With properties (even an empty list, whose conjunction is true) and
    ``negate``, the encoding is satisfiable exactly when some schedule of at
    most N rounds violates a property.
    """
    parts = [("init", gen_init(up))]
    parts += [(f"round {k}", gen_round(up, k)) for k in range(1, up.rounds + 1)]
    if properties is not None:
        lam = F.conj(*(gen_property(up, p) for p in properties))
        parts.append(("not lambda", F.Not(lam)) if negate else ("lambda", lam))
    return Encoding(up, parts, schedule_variables(up))


def well_formed(f: Formula, up: UnrolledProgram) -> list[str]:
    """Structural check: allowed node types, variables inside the layout."""
    allowed = set(schedule_variables(up))
    node_types = (
        F.SVar, F.IntConst, F.Dur, F.Sum, F.BoolConst, F.Cmp, F.And, F.Or, F.Not, F.Implies,
    )
    problems = []
    for node in F.walk(f):
        if not isinstance(node, node_types):
            problems.append(f"unexpected node {node!r}")
        elif isinstance(node, F.SVar) and node not in allowed:
            problems.append(f"variable {node.name} outside layout")
        elif isinstance(node, F.Dur) and node.value != up.thread(node.t).duration(node.i):
            problems.append(f"duration {node.name} has wrong value")
    return problems
