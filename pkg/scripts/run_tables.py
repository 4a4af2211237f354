"""Verdicts and timings for the pipeline and loop-unrolling experiments.

    python scripts/run_tables.py                   # default sizes
    python scripts/run_tables.py --threads 2 3 5 10 20 50 --loops 2 3 5 10 20
"""

import argparse

from tickbmc import corpus
from tickbmc.smt import SolverConfig
from tickbmc.verify import verify


def row(label: str, v) -> str:
    t = v.timings
    return (
        f"{label:<28} {v.bound:>4} {v.node_count:>9} "
        f"{t.get('encode', 0):>9.2f} {t.get('solve', 0):>9.2f}  {v.status}"
    )


def header(title: str) -> None:
    print(f"\n{title}")
    print(f"{'instance':<28} {'N':>4} {'nodes':>9} {'encode s':>9} {'solve s':>9}  verdict")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, nargs="*", default=[2, 3, 5, 10, 20])
    ap.add_argument("--loops", type=int, nargs="*", default=[2, 3, 5, 10])
    ap.add_argument("--timeout", type=float, default=600)
    args = ap.parse_args()

    solver = SolverConfig.from_string(None, args.timeout)

    header("pipeline: producer plus consumers with growing sleeps")
    for k in args.threads:
        print(row(f"{k} threads", verify(corpus.pipeline(k), solver=solver)), flush=True)

    header("producer/consumer loops, N = 2L+1")
    pc = corpus.load("producer_consumer")
    for L in args.loops:
        print(row(f"L={L}", verify(pc, 2 * L + 1, L, solver)), flush=True)
    v = verify(corpus.load("conflict"), loop_iterations=2, solver=solver)
    print(row("conflicting variant, L=2", v))
    for inst in v.failed:
        print(f"  violated: {inst.describe()}")


if __name__ == "__main__":
    main()
