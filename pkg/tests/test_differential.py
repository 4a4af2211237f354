"""Solver verdicts and schedules against brute-force enumeration."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tickbmc import corpus, oracle
from tickbmc.encode import encode
from tickbmc.model import unroll
from tickbmc.schedule import violations
from tickbmc.smt import enumerate_models, enumerate_schedules, model_violations
from tickbmc.verify import HOLDS, VIOLATED, verify

pytestmark = pytest.mark.solver


@settings(max_examples=60)
@given(st.integers(0, 10**6))
def test_verdict_matches_oracle(seed):
    prog, L, N = corpus.random_instance(random.Random(seed))
    v = verify(prog, N, L)
    up = unroll(prog, L, N)
    bad = [s for s in oracle.enumerate_schedules(up) if oracle.failed_instances(s, prog.properties, up)]
    assert v.status == (VIOLATED if bad else HOLDS)
    if v.schedule is not None:
        assert violations(v.schedule, up) == []
        assert v.schedule.key() in {s.key() for s in bad}


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_schedule_sets_equal(seed):
    prog, L, N = corpus.random_instance(random.Random(seed))
    up = unroll(prog, L, N)
    expected = {s.key() for s in oracle.enumerate_schedules(up)}
    got = enumerate_schedules(encode(up), limit=len(expected) + 5)
    assert {s.key() for s in got} == expected


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_models_satisfy_invariants(seed):
    prog, L, N = corpus.random_instance(random.Random(seed))
    up = unroll(prog, L, N)
    for m in enumerate_models(encode(up), limit=20):
        assert model_violations(m, up) == []
