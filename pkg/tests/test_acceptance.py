"""Acceptance gate: one PASS/FAIL line per criterion."""

import random
import subprocess
import sys
import time

import numpy as np
import pytest

from tickbmc import corpus, oracle
from tickbmc.encode import encode
from tickbmc.model import unroll
from tickbmc.schedule import violations
from tickbmc.smt import enumerate_models, enumerate_schedules, model_violations, serialize_encoding
from tickbmc.verify import HOLDS, VIOLATED, verify

pytestmark = pytest.mark.solver

RANDOM_PROGRAMS = 200
ENUMERATION_CHECKS = 50


@pytest.fixture
def gate(capsys):
    """Run the checks, print the verdict line, then re-raise any failure."""

    def run(label, check):
        try:
            detail = check()
        except AssertionError as e:
            with capsys.disabled():
                print(f"\nFAIL  {label}: {e}")
            raise
        with capsys.disabled():
            print(f"\nPASS  {label}" + (f": {detail}" if detail else ""))

    return run


def timed_verify(prog, **kw):
    t0 = time.perf_counter()
    v = verify(prog, **kw)
    return v, time.perf_counter() - t0


def test_criterion_1_toy_holds(gate):
    def check():
        v, secs = timed_verify(corpus.load("toy"), rounds=3)
        assert v.status == HOLDS, v.status
        assert secs < 5, f"{secs:.2f}s"
        return f"HOLDS in {secs:.2f}s"

    gate("1 toy example", check)


def test_criterion_2_mutated_toy(gate):
    def check():
        prog = corpus.load("toy_mutated")
        v = verify(prog, rounds=3)
        assert v.status == VIOLATED, v.status
        assert v.schedule.describe(v.up) == ["t1.l11", "t2.l22", "t1.l12"]
        ends = [r.end for r in v.schedule.rounds]
        assert ends == [2, 4, 6], ends
        bad = [
            s for s in oracle.enumerate_schedules(v.up)
            if oracle.failed_instances(s, prog.properties, v.up)
        ]
        assert [s.key() for s in bad] == [v.schedule.key()]
        return "order l11, l22, l12; end times 2, 4, 6 (oracle agrees)"

    gate("2 mutated toy", check)


@pytest.mark.parametrize("k", [2, 3, 5, 10])
def test_criterion_3_pipeline(gate, k):
    def check():
        out = []
        # k read both as total threads and as consumers next to the producer
        for threads in (k, k + 1):
            v, secs = timed_verify(corpus.pipeline(threads))
            assert v.status == HOLDS, f"{threads} threads: {v.status}"
            assert secs < 60, f"{threads} threads: {secs:.1f}s"
            out.append(f"{threads} threads {secs:.2f}s")
        return "no conflicts; " + ", ".join(out)

    gate(f"3 pipeline k={k}", check)


@pytest.mark.parametrize("L", [2, 3, 5])
def test_criterion_4_loop_family(gate, L):
    def check():
        v, secs = timed_verify(corpus.load("producer_consumer"), rounds=2 * L + 1, loop_iterations=L)
        assert v.status == HOLDS, v.status
        assert secs < 60, f"{secs:.1f}s"
        return f"no conflicts, N={2 * L + 1}, {secs:.2f}s"

    gate(f"4 loop family L={L}", check)


def test_criterion_5_conflict(gate):
    def check():
        prog = corpus.load("conflict")
        v = verify(prog, loop_iterations=2)
        assert v.status == VIOLATED, v.status
        iterations = {inst.valuation for inst in v.failed}
        assert iterations == {2}, iterations
        # no schedule at all violates the first iteration
        first = {
            inst.valuation
            for s in oracle.enumerate_schedules(v.up)
            for inst in oracle.failed_instances(s, prog.properties, v.up)
        }
        assert first == {2}, first
        return "VIOLATED, failing instance at i=2"

    gate("5 conflict detection", check)


def test_criterion_6_oracle_equivalence(gate):
    def check():
        rng = random.Random(20131)
        agree = enumerated = 0
        for n in range(RANDOM_PROGRAMS):
            prog, L, N = corpus.random_instance(rng)
            up = unroll(prog, L, N)
            assert up.T <= 3 and N <= 6
            assert all(th.n <= 4 for th in up.threads)
            schedules = oracle.enumerate_schedules(up)
            expected = any(oracle.failed_instances(s, prog.properties, up) for s in schedules)
            v = verify(prog, N, L)
            assert v.status == (VIOLATED if expected else HOLDS), f"instance {n}: {v.status}"
            agree += 1
            if n < ENUMERATION_CHECKS * 2:
                got = enumerate_schedules(encode(up), limit=len(schedules) + 5)
                assert {s.order for s in got} == {s.order for s in schedules}, f"instance {n}"
                assert {s.key() for s in got} == {s.key() for s in schedules}, f"instance {n}"
                enumerated += 1
        return f"{agree}/{RANDOM_PROGRAMS} verdicts agree, {enumerated} enumeration sets equal"

    gate("6 oracle equivalence", check)


def test_criterion_7_model_invariants(gate):
    def check():
        cases = [(corpus.load(n), L, None) for n in corpus.BUNDLED for L in (1, 2)]
        cases += [(corpus.pipeline(k), 1, None) for k in (2, 3, 5)]
        rng = random.Random(7)
        cases += [corpus.random_instance(rng) for _ in range(40)]
        models = 0
        for prog, L, N in cases:
            up = unroll(prog, L, N)
            for m in enumerate_models(encode(up), limit=25):
                problems = model_violations(m, up)
                assert problems == [], problems
                models += 1
        for name in ("toy_mutated", "conflict"):
            v = verify(corpus.load(name), loop_iterations=2)
            assert violations(v.schedule, v.up) == []
        return f"{models} models over {len(cases)} programs, zero violations"

    gate("7 model invariants", check)


EMIT = (
    "import sys; from tickbmc import corpus; from tickbmc.encode import encode; "
    "from tickbmc.model import unroll; from tickbmc.smt import serialize_encoding; "
    "p = corpus.load(sys.argv[1]); "
    "sys.stdout.write(serialize_encoding(encode(unroll(p, 2), p.properties)))"
)


def test_criterion_8_determinism_and_growth(gate):
    def check():
        for name in corpus.BUNDLED:
            runs = {
                subprocess.run(
                    [sys.executable, "-c", EMIT, name], capture_output=True, check=True,
                    env={"PYTHONHASHSEED": seed},
                ).stdout
                for seed in ("0", "1", "random")
            }
            prog = corpus.load(name)
            runs.add(serialize_encoding(encode(unroll(prog, 2), prog.properties)).encode())
            assert len(runs) == 1, f"{name}: serialization differs between runs"

        sizes, nodes = [], []
        for k in range(2, 16):
            up = unroll(corpus.pipeline(k), rounds=3)
            sizes.append(sum(th.n for th in up.threads))
            nodes.append(encode(up, up.source.properties).node_count())
        x, y = np.array(sizes, float), np.array(nodes, float)
        fit = np.polyval(np.polyfit(x, y, 2), x)
        worst = float(np.max(np.abs(fit - y) / y))
        assert worst <= 0.10, f"worst relative residual {worst:.3f}"
        return f"byte-identical; quadratic fit worst residual {worst:.2e}"

    gate("8 determinism and growth", check)
