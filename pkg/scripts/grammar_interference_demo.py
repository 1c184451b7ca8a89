#!/usr/bin/env python3
"""Classical probabilities versus quantum amplitudes on the same rules.

A classical grammar with weights p behaves like a quantum grammar with
weights sqrt(p) as long as every output is reached by one derivation only.
With two paths to the same output the quantum amplitudes interfere and the
distributions split.
"""

import math

from fockvm.grammar import Grammar, Rule, outcome_distribution

def show(title, grammar, source, steps):
    print(title)
    for s, p in sorted(outcome_distribution(grammar, source, steps).items()):
        print(f"  {source} -> {s}: {p:.6f}")


def main() -> None:
    classical = Grammar("a", (Rule("a", "b", 0.75), Rule("a", "c", 0.25)))
    quantum = Grammar(
        "a",
        (Rule("a", "b", math.sqrt(0.75)), Rule("a", "c", math.sqrt(0.25))),
        mode="quantum",
    )
    show("single-path classical (weights p):", classical, "a", 1)
    show("single-path quantum (weights sqrt(p)), identical:", quantum, "a", 1)

    w = 1 / math.sqrt(2)
    interfering = Grammar(
        "a",
        (
            Rule("a", "b", w),
            Rule("a", "b", w),
            Rule("a", "c", w),
            Rule("a", "c", complex(-w)),
        ),
        mode="quantum",
    )
    show("two paths per output, quantum (b adds, c cancels):", interfering, "a", 1)


if __name__ == "__main__":
    main()
