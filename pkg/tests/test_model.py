import pytest
from hypothesis import given
from hypothesis import strategies as st

from tickbmc.model import (
    Kind,
    SourceProgram,
    ThreadDef,
    default_rounds,
    loop,
    normalize_sleeps,
    ordinary,
    sleep,
    unroll,
)


def merge_by_pairs(durs):
    """Reference: repeatedly merge the first adjacent sleep pair until none is left.

    ``durs`` uses negative numbers for sleeps, positive for ordinary statements.
    """
    xs = list(durs)
    while True:
        for j in range(len(xs) - 1):
            if xs[j] < 0 and xs[j + 1] < 0:
                xs[j : j + 2] = [xs[j] + xs[j + 1]]
                break
        else:
            return xs


def encode_stmts(durs):
    return [sleep(-d) if d < 0 else ordinary(f"s{n}", d) for n, d in enumerate(durs)]


def decode_stmts(stmts):
    return [-s.duration if s.kind is Kind.SLEEP else s.duration for s in stmts]


def test_normalize_merges_two_sleeps():
    out = normalize_sleeps([sleep(2), sleep(3), ordinary("a", 1)])
    assert out == [sleep(5), ordinary("a", 1)]


def test_normalize_identity_without_sleeps():
    assert normalize_sleeps([ordinary("a", 1)]) == [ordinary("a", 1)]


def test_normalize_three_sleeps():
    assert merge_by_pairs([-1, -1, -1]) == [-3]
    assert normalize_sleeps([sleep(1), sleep(1), sleep(1)]) == [sleep(3)]


def test_normalize_inside_loop_body():
    out = normalize_sleeps([loop(sleep(1), sleep(2), ordinary("a", 1))])
    assert out[0].body == (sleep(3), ordinary("a", 1))


@given(st.lists(st.integers(-4, 4).filter(bool), max_size=12))
def test_normalize_matches_pairwise_merge(durs):
    assert decode_stmts(normalize_sleeps(encode_stmts(durs))) == merge_by_pairs(durs)


@given(st.lists(st.integers(-4, 4).filter(bool), max_size=12))
def test_normalize_is_idempotent(durs):
    once = normalize_sleeps(encode_stmts(durs))
    assert normalize_sleeps(once) == once


def test_zero_duration_rejected():
    with pytest.raises(ValueError):
        ordinary("a", 0)
    with pytest.raises(ValueError):
        sleep(0)


def test_nested_loop_rejected():
    with pytest.raises(ValueError):
        loop(loop(ordinary("a", 1)))


def test_two_loops_rejected():
    with pytest.raises(ValueError):
        ThreadDef("t", (loop(ordinary("a", 1)), loop(ordinary("b", 1))))


def producer():
    return SourceProgram(
        (
            ThreadDef("t1", (ordinary("l1", 1), loop(ordinary("l2", 2), sleep(2)))),
            ThreadDef("t2", (loop(sleep(2), ordinary("l5", 2)),)),
        )
    )


def test_unroll_producer_two_iterations():
    up = unroll(producer(), loop_iterations=2, rounds=3)
    th = up.thread(1)
    got = [(s.label, s.iteration, s.kind, s.duration) for s in th.stmts]
    assert got == [
        ("l1", 0, Kind.ORDINARY, 1),
        ("l2", 1, Kind.ORDINARY, 2),
        (None, 1, Kind.SLEEP, 2),
        ("l2", 2, Kind.ORDINARY, 2),
        (None, 2, Kind.SLEEP, 2),
    ]
    assert th.ns == (1, 2, 4)


def test_unroll_merges_sleeps_across_replicas():
    prog = SourceProgram((ThreadDef("t", (loop(sleep(1), sleep(2)),)),))
    up = unroll(prog, loop_iterations=2, rounds=1)
    assert [(s.kind, s.duration) for s in up.thread(1).stmts] == [(Kind.SLEEP, 6)]


def test_unroll_truncates_and_keeps_trailing_sleep():
    prog = SourceProgram(
        (ThreadDef("t", (ordinary("a", 1), sleep(3), ordinary("b", 1), sleep(2), ordinary("c", 1))),)
    )
    up = unroll(prog, rounds=2)
    th = up.thread(1)
    assert [s.display for s in th.stmts] == ["a", "sleep(3)", "b", "sleep(2)"]
    assert th.dropped == {("c", 0)}


def test_unroll_rejects_zero():
    with pytest.raises(ValueError):
        unroll(producer(), loop_iterations=0)
    with pytest.raises(ValueError):
        unroll(producer(), rounds=0)


def test_default_rounds_counts_all_ordinary_statements():
    assert default_rounds(producer(), 2) == 3 + 2


programs = st.lists(
    st.lists(st.integers(-3, 3).filter(bool), min_size=1, max_size=5),
    min_size=1,
    max_size=3,
).map(
    lambda threads: SourceProgram(
        tuple(ThreadDef(f"t{n}", tuple(encode_stmts(d))) for n, d in enumerate(threads))
    )
)


@given(programs, st.integers(1, 8))
def test_unrolled_shape(prog, N):
    up = unroll(prog, rounds=N)
    for src, th in zip(prog.threads, up.threads):
        total = sum(s.kind is Kind.ORDINARY for s in src.stmts)
        assert len(th.ns) == min(N, total)
        assert th.n >= 1
        for i, s in enumerate(th.stmts, start=1):
            assert (i in th.ns) == (s.kind is Kind.ORDINARY)
        kinds = [s.kind for s in th.stmts]
        assert not any(a is b is Kind.SLEEP for a, b in zip(kinds, kinds[1:]))


@given(programs, st.integers(1, 3), st.integers(1, 8))
def test_unroll_ignores_depth_without_loops(prog, L, N):
    assert unroll(prog, L, N).threads == unroll(prog, 1, N).threads
