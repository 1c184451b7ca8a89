#!/usr/bin/env python3
"""Run a superposition of three programs and sample the outcome.

Each component program writes a different constant; with equal amplitudes
1/sqrt(3) every outcome appears with probability one third. A second run
shows destructive interference between two copies of the same program with
opposite signs.
"""

import math

from fockvm.qasm import parse_program, run_superposed
from fockvm.state import probabilities, sample

WRITER = """
LOAD #{value}
STORE a
HALT
"""


def main() -> None:
    programs = [parse_program(WRITER.format(value=v)) for v in (1, 2, 3)]
    amp = 1 / math.sqrt(3)
    result = run_superposed([(amp, p) for p in programs], [])
    probs = probabilities(result.final)
    print("three equal-weight programs:")
    for state, prob in sorted(probs.items()):
        print(f"  mem {dict(state.mem)} -> probability {prob:.12f}")
    counts = sample(result.final, 10_000, seed=2024)
    print("10000 seeded samples:")
    for state, n in sorted(counts.items()):
        print(f"  mem {dict(state.mem)} -> {n}")

    same = programs[0]
    cancelled = run_superposed(
        [(1 / math.sqrt(2), same), (complex(-1 / math.sqrt(2)), same)], []
    )
    print(f"opposite-sign copies of one program leave {len(cancelled.final)} terms")


if __name__ == "__main__":
    main()
