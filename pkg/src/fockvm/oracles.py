"""Exact verification oracles for the operator algebra.

Everything in this module works with exact integer arithmetic, independent
of the floating-point evaluator in :mod:`fockvm.operators`. Amplitudes are
carried as ``coeff * sqrt(radicand)`` with integer radicands, so products of
ladder factors stay exact and same-radicand contributions cancel or combine
without rounding. That makes "exactly one" and "exactly delta_ij" checkable
as stated, which double precision cannot do (``sqrt(2)**2 != 2``).
"""

from __future__ import annotations

import math
from fractions import Fraction

Occupancies = tuple[int, ...]


def _extract_square(radicand: int) -> tuple[int, int]:
    """Write radicand as s^2 * r and return (s, r) with r square-free-ish.

    A simple trial division is plenty for the small occupancy products used
    by the checks here.
    """
    if radicand == 0:
        return 0, 1
    s = 1
    d = 2
    r = radicand
    while d * d <= r:
        while r % (d * d) == 0:
            r //= d * d
            s *= d
        d += 1
    return s, r


class _ExactTerm:
    """A basis state with amplitude coeff * sqrt(radicand), coeff rational."""

    __slots__ = ("occ", "coeff", "radicand")

    def __init__(self, occ: Occupancies, coeff: Fraction = Fraction(1), radicand: int = 1):
        self.occ = occ
        self.coeff = coeff
        self.radicand = radicand

    def raised(self, mode: int) -> "_ExactTerm":
        occ = list(self.occ)
        occ[mode] += 1
        return _ExactTerm(tuple(occ), self.coeff, self.radicand * occ[mode])

    def lowered(self, mode: int) -> "_ExactTerm | None":
        occ = list(self.occ)
        if occ[mode] == 0:
            return None
        rad = self.radicand * occ[mode]
        occ[mode] -= 1
        return _ExactTerm(tuple(occ), self.coeff, rad)

    def normalized(self) -> tuple[Occupancies, Fraction, int]:
        s, r = _extract_square(self.radicand)
        return self.occ, self.coeff * s, r


def _apply_sequence(ops, occ: Occupancies) -> "_ExactTerm | None":
    """Apply (kind, mode) ladder steps right to left; None if annihilated."""
    term = _ExactTerm(occ)
    for kind, mode in reversed(ops):
        if kind == "raise":
            term = term.raised(mode)
        elif kind == "lower":
            lowered = term.lowered(mode)
            if lowered is None:
                return None
            term = lowered
        else:
            raise ValueError(f"unknown ladder kind {kind!r}")
    return term


def _combine(terms) -> dict[tuple[Occupancies, int], Fraction]:
    acc: dict[tuple[Occupancies, int], Fraction] = {}
    for sign, term in terms:
        if term is None:
            continue
        occ, coeff, rad = term.normalized()
        key = (occ, rad)
        acc[key] = acc.get(key, Fraction(0)) + sign * coeff
    return {k: v for k, v in acc.items() if v != 0}


def commutator_defect(
    i: int, j: int, occ: Occupancies
) -> dict[tuple[Occupancies, int], Fraction]:
    """Exact result of ([a_i, a_j+] - delta_ij) applied to |occ>.

    Returns the surviving contributions keyed by (occupancies, radicand);
    an empty dict means the canonical commutation relation holds exactly on
    this state.
    """
    paths = [
        (Fraction(1), _apply_sequence([("lower", i), ("raise", j)], occ)),
        (Fraction(-1), _apply_sequence([("raise", j), ("lower", i)], occ)),
    ]
    if i == j:
        paths.append((Fraction(-1), _ExactTerm(occ)))
    return _combine(paths)


def commutator_holds(i: int, j: int, occ: Occupancies) -> bool:
    return not commutator_defect(i, j, occ)


def clear_normalization(n: int) -> tuple[int, Fraction]:
    """Apply the n-fold lowering scaled by 1/sqrt(n!) to a value-n location.

    Returns (final value, exact squared amplitude). The factorial telescopes:
    the squared ladder product is n * (n-1) * ... * 1 = n!, so the squared
    amplitude is exactly one for every n.
    """
    term = _ExactTerm((n,))
    for _ in range(n):
        lowered = term.lowered(0)
        if lowered is None:
            raise AssertionError("lowering annihilated before reaching zero")
        term = lowered
    amp_squared = Fraction(term.radicand, math.factorial(n)) * term.coeff**2
    return term.occ[0], amp_squared


def copy_normalization(n: int) -> tuple[int, Fraction]:
    """Apply the n-fold raising scaled by 1/sqrt(n!) to a zeroed location.

    Returns (final value, exact squared amplitude); the squared amplitude is
    exactly one because the raising product is again n!.
    """
    term = _ExactTerm((0,))
    for _ in range(n):
        term = term.raised(0)
    amp_squared = Fraction(term.radicand, math.factorial(n)) * term.coeff**2
    return term.occ[0], amp_squared


def verify_closed_form(kind: str, n: int, bound: int = 12) -> bool:
    """Check the normalized clear/copy closed forms at value n.

    ``kind`` is "clear" (n-fold lowering reaches zero with squared amplitude
    exactly one) or "copy" (n-fold raising reaches n from zero likewise).
    """
    if not 0 <= n <= bound:
        raise ValueError(f"n must lie in [0, {bound}], got {n}")
    if kind == "clear":
        value, amp_squared = clear_normalization(n)
        return value == 0 and amp_squared == 1
    if kind == "copy":
        value, amp_squared = copy_normalization(n)
        return value == n and amp_squared == 1
    raise ValueError(f"unknown closed form kind {kind!r}")


def address_commutator_defect(
    m: int, window: int, occ: Occupancies, dagger: bool
) -> dict[tuple[Occupancies, int], Fraction]:
    """Exact ([A, a_m+] - m) or ([A, a_m] - m) on |occ>, with the address
    operator A = sum_k k (a_k - a_k+) truncated to ``window`` modes.

    An empty dict means the address commutator yields exactly m times the
    identity on this state. Exactness requires the state's support to stay
    inside the window, which it does whenever len(occ) <= window.
    """
    if len(occ) > window:
        raise ValueError("state support exceeds the address window")
    occ = tuple(occ) + (0,) * (window - len(occ))
    target = ("raise", m) if dagger else ("lower", m)
    paths = []
    for k in range(window):
        for a_kind, a_sign in (("lower", 1), ("raise", -1)):
            sign = Fraction(k * a_sign)
            if sign == 0:
                continue
            paths.append((sign, _apply_sequence([(a_kind, k), target], occ)))
            paths.append((-sign, _apply_sequence([target, (a_kind, k)], occ)))
    paths.append((Fraction(-m), _ExactTerm(occ)))
    return _combine(paths)


def address_commutator_holds(m: int, window: int, occ: Occupancies, dagger: bool) -> bool:
    return not address_commutator_defect(m, window, occ, dagger)
