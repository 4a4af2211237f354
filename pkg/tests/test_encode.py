import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tickbmc import corpus, oracle
from tickbmc import formula as F
from tickbmc.encode import (
    encode,
    expand_eprev,
    gen_exec,
    gen_init,
    gen_property,
    gen_round,
    gen_sched,
    gen_terminated,
    schedule_variables,
    well_formed,
)
from tickbmc.formula import E, X, Y, pc
from tickbmc.frontend import parse_program
from tickbmc.model import unroll


def toy_env(**override):
    """The toy's only schedule, written out by hand.

    t1 = l11(1); l12(2)   t2 = sleep(2); l22(2)
    round 1: l11 [0,1]   round 2: l12 [1,3]   round 3: l22 [3,5]
    """
    env = {
        pc(1, 1): 1, pc(1, 2): 2, pc(1, 3): 3, pc(1, 4): 3,
        pc(2, 1): 2, pc(2, 2): 2, pc(2, 3): 2, pc(2, 4): 3,
        Y(1): 0, X(1): 1, Y(2): 1, X(2): 3, Y(3): 3, X(3): 5, Y(4): 5, X(4): 5,
        E(1, 1): 1, E(1, 2): 3, E(2, 1): 2, E(2, 2): 5,
    }
    for name, v in override.items():
        env[F.parse_var(name)] = v
    return env


def test_toy_init_literal(toy):
    up = unroll(toy)
    f = gen_init(up)
    assert isinstance(f, F.And)
    assert F.pretty(f) == "pc_1_1 = 1 & pc_2_1 = 2 & Y_1 = 0 & E_2_1 = D_2_1"
    assert F.evaluate(f, toy_env())
    assert not F.evaluate(f, toy_env(Y_1=1))


def test_exec_plain_and_followed_by_sleep():
    up = unroll(corpus.load("producer_consumer"), 1, 3)
    plain = gen_exec(up, 1, 1, 1)
    assert F.pretty(plain) == (
        "pc_1_1 = 1 & X_1 = Y_1 + D_1_1 & E_1_1 = X_1 & pc_1_2 = 2 & pc_2_2 = pc_2_1"
    )
    slept = gen_exec(up, 1, 2, 2)
    assert F.pretty(slept) == (
        "pc_1_2 = 2 & X_2 = Y_2 + D_1_2 & E_1_2 = X_2 & E_1_3 = X_2 + D_1_3"
        " & pc_1_3 = 4 & pc_2_3 = pc_2_2"
    )


def test_exec_rejects_sleep_position():
    up = unroll(corpus.load("producer_consumer"), 1, 3)
    with pytest.raises(ValueError):
        gen_exec(up, 1, 3, 1)


def test_terminated_literal(toy):
    up = unroll(toy)
    assert F.pretty(gen_terminated(up, 3)) == (
        "pc_1_3 = 3 & pc_1_4 = pc_1_3 & pc_2_3 = 3 & pc_2_4 = pc_2_3 & Y_4 = X_3 & X_4 = X_3"
    )


def test_eprev_expansion(toy):
    up = unroll(toy)
    f = expand_eprev(up, 2, 3, "<=", X(2))
    assert F.pretty(f) == "(pc_2_3 = 2 & E_2_1 <= X_2) | (pc_2_3 = 3 & E_2_2 <= X_2)"


def test_toy_schedule_satisfies_sched(toy):
    up = unroll(toy)
    assert F.evaluate(gen_sched(up), toy_env())


@pytest.mark.parametrize(
    "change",
    [
        {"X_3": 6},  # wrong duration
        {"Y_3": 4},  # idles while l22 is ready
        {"Y_2": 0, "X_2": 2, "E_1_2": 2},  # overlaps round 1
        {"pc_2_4": 2},  # l22 never advances
    ],
)
def test_toy_perturbed_schedule_rejected(toy, change):
    up = unroll(toy)
    assert not F.evaluate(gen_sched(up), toy_env(**change))


def test_set_min_picks_earliest_wakeup():
    # after l1 ends at 1, both threads are asleep until 3 (t1) and 4 (t2)
    up = unroll(parse_program(
        "thread a { stmt l1 dur 1; sleep 2; stmt l2 dur 1; }\n"
        "thread b { sleep 4; stmt l3 dur 1; }\n"
    ))
    f = gen_round(up, 1)
    base = {
        pc(1, 1): 1, pc(1, 2): 3, pc(2, 1): 2, pc(2, 2): 2,
        Y(1): 0, X(1): 1, E(1, 1): 1, E(1, 2): 3, E(2, 1): 4,
        E(1, 3): 0, E(2, 2): 0, X(2): 0,
    }
    assert F.evaluate(f, {**base, Y(2): 3})
    for wrong in (1, 2, 4):
        assert not F.evaluate(f, {**base, Y(2): wrong})


def test_property_guard(toy):
    up = unroll(toy)
    f = gen_property(up, toy.properties[0])
    assert F.pretty(f) == "(pc_1_4 > 2 & pc_2_4 > 2) -> E_1_2 < E_2_2"


def test_property_vacuous_when_unscheduled(toy):
    up = unroll(toy)
    f = gen_property(up, toy.properties[0])
    assert F.evaluate(f, toy_env(pc_2_4=2, E_2_2=0))


@pytest.mark.parametrize("name", corpus.BUNDLED)
def test_well_formed_and_linear(name):
    prog = corpus.load(name)
    up = unroll(prog, 2)
    enc = encode(up, prog.properties)
    for f in enc.formulas():
        assert well_formed(f, up) == []
        for node in F.walk(f):
            if isinstance(node, F.Cmp):
                for side in (node.lhs, node.rhs):
                    assert isinstance(side, (F.SVar, F.IntConst, F.Dur, F.Sum))
    used = set().union(*(F.variables(f) for f in enc.formulas()))
    assert used <= set(schedule_variables(up))


def test_encoding_without_properties(toy):
    up = unroll(toy)
    assert [n for n, _ in encode(up).parts] == ["init", "round 1", "round 2", "round 3"]
    assert encode(up, []).parts[-1] == ("not lambda", F.Not(F.TRUE))


def schedule_env(s, up):
    """Assignment that mirrors a schedule; the final Y, X are left to the caller."""
    env = {}
    pcs = [2 if up.thread(t).is_sleep(1) else 1 for t in range(1, up.T + 1)]
    for t in range(1, up.T + 1):
        for i in range(1, up.thread(t).n + 1):
            env[E(t, i)] = s.end_times.get((t, i), 0)
    for r in s.rounds:
        for t in range(1, up.T + 1):
            env[pc(t, r.k)] = pcs[t - 1]
        env[Y(r.k)], env[X(r.k)] = r.start, r.end
        if r.executed:
            t, i = r.executed
            pcs[t - 1] = i + 2 if up.thread(t).is_sleep(i + 1) else i + 1
    for t in range(1, up.T + 1):
        env[pc(t, up.rounds + 1)] = pcs[t - 1]
    return env


def completes_to_model(f, env, last):
    """Is there a choice of Y/X at round ``last`` that makes ``f`` true?"""
    values = sorted(set(env.values()) | {0})
    for y, x in itertools.product(values, repeat=2):
        if F.evaluate(f, {**env, Y(last): y, X(last): x}):
            return True
    return False


@given(st.integers(0, 100_000))
def test_every_oracle_schedule_is_a_model(seed):
    prog, L, N = corpus.random_instance(random.Random(seed))
    up = unroll(prog, L, N)
    sched = gen_sched(up)
    for s in oracle.enumerate_schedules(up):
        assert completes_to_model(sched, schedule_env(s, up), up.rounds + 1)
