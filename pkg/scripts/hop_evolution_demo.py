#!/usr/bin/env python3
"""Evolve a single quantum hopping along the memory modes.

Prints the series amplitude at each mode against the closed form
(-i t)^n / n! together with raw and renormalized probabilities.
"""

import math

from fockvm.evolution import build_hop_hamiltonian, evolve
from fockvm.state import BasisState, probabilities, unit

T = 0.1
ORDER = 8
MODES = 12


def main() -> None:
    h = build_hop_hamiltonian(MODES)
    start = unit(BasisState(mem={0: 1}))
    evolved = evolve(h, start, T, ORDER)
    probs = probabilities(evolved)
    print(f"t = {T}, order = {ORDER}, modes = {MODES}")
    print(f"{'mode':>4} {'amplitude':>28} {'closed form':>28} {'raw |amp|^2':>14} {'normalized':>12}")
    for n in range(ORDER + 1):
        state = BasisState(mem={n: 1})
        amp = evolved.amplitude(state)
        closed = (-1j * T) ** n / math.factorial(n)
        print(
            f"{n:>4} {amp:>28.3e} {closed:>28.3e}"
            f" {abs(amp) ** 2:>14.3e} {probs.get(state, 0.0):>12.3e}"
        )
    drift = max(
        abs(evolved.amplitude(BasisState(mem={n: 1})) - (-1j * T) ** n / math.factorial(n))
        for n in range(ORDER + 1)
    )
    print(f"max deviation from closed form: {drift:.3e}")


if __name__ == "__main__":
    main()
