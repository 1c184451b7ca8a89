"""One-bit-word machine built on anticommuting mode operators.

Every bit location (and a one-bit register) carries raising and lowering
operators obeying anticommutation relations, so raising an occupied bit or
lowering an empty one annihilates the state, and operators acting past
occupied modes pick up signs. Signs come from a fixed canonical ordering,
register first and then modes ascending; without an ordering the
anticommutation relations cannot hold at all. Signed amplitudes are
reported as computed; they cancel in single-program probabilities.

There is no bit-level text format: programs are built as operator trees
through this module. The closed polynomial forms of the basic instructions
(clear, copy, load, store, add, subtract, multiply) are provided along with
an exhaustive value-semantics checker.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

#: Mode index of the one-bit register in the canonical ordering.
BIT_REGISTER = -1


@dataclass(frozen=True, order=True)
class BitBasisState:
    """Occupancies of the register and the memory modes, each zero or one."""

    register: int
    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.register not in (0, 1):
            raise ValueError(f"register bit must be 0 or 1, got {self.register}")
        bits = tuple(self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"bits must be 0 or 1, got {bits}")
        object.__setattr__(self, "bits", bits)

    @property
    def mode_count(self) -> int:
        return len(self.bits)

    def occupancy(self, mode: int) -> int:
        if mode == BIT_REGISTER:
            return self.register
        return self.bits[mode]

    def flipped(self, mode: int) -> "BitBasisState":
        if mode == BIT_REGISTER:
            return BitBasisState(1 - self.register, self.bits)
        bits = list(self.bits)
        bits[mode] = 1 - bits[mode]
        return BitBasisState(self.register, tuple(bits))

    def parity_before(self, mode: int) -> int:
        """Number of occupied modes strictly preceding ``mode`` in the
        canonical order (register first, then modes ascending)."""
        if mode == BIT_REGISTER:
            return 0
        return self.register + sum(self.bits[:mode])


class FermiOp:
    """Base class for bit-level operator trees."""

    def __add__(self, other):
        return FSum((self, _as_op(other)))

    def __radd__(self, other):
        return FSum((_as_op(other), self))

    def __sub__(self, other):
        return FSum((self, FScalarMul(-1.0 + 0j, _as_op(other))))

    def __rsub__(self, other):
        return FSum((_as_op(other), FScalarMul(-1.0 + 0j, self)))

    def __mul__(self, other):
        return FProduct((self, _as_op(other)))

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return FScalarMul(complex(other), self)
        return FProduct((_as_op(other), self))


@dataclass(frozen=True)
class FIdentity(FermiOp):
    pass


@dataclass(frozen=True)
class BRaise(FermiOp):
    mode: int


@dataclass(frozen=True)
class BLower(FermiOp):
    mode: int


@dataclass(frozen=True)
class BNumber(FermiOp):
    mode: int


@dataclass(frozen=True)
class FScalarMul(FermiOp):
    scalar: complex
    expr: FermiOp


@dataclass(frozen=True)
class FSum(FermiOp):
    terms: tuple[FermiOp, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("sum requires at least one term")


@dataclass(frozen=True)
class FProduct(FermiOp):
    """Right-to-left product, like the word-level operator trees."""

    factors: tuple[FermiOp, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("product requires at least one factor")


ONE = FIdentity()


def _as_op(value) -> FermiOp:
    if isinstance(value, FermiOp):
        return value
    if value == 1:
        return ONE
    if isinstance(value, (int, float, complex)):
        return FScalarMul(complex(value), ONE)
    raise TypeError(f"cannot use {value!r} as a bit operator")


def _merge(terms: Iterable[tuple[complex, BitBasisState]]) -> list[tuple[complex, BitBasisState]]:
    acc: dict[BitBasisState, complex] = {}
    for amp, state in terms:
        acc[state] = acc.get(state, 0j) + amp
    out = [(amp, state) for state, amp in acc.items() if amp != 0]
    out.sort(key=lambda t: t[1])
    return out


def apply_fermi(op: FermiOp, state: BitBasisState) -> list[tuple[complex, BitBasisState]]:
    """Apply a bit operator tree to one basis state.

    Returns merged (amplitude, state) terms; an empty list means the state
    was annihilated. Amplitudes are exact (signs and small integers only).
    """
    return _merge(_apply(op, [(1.0 + 0j, state)]))


def _apply(
    op: FermiOp, terms: list[tuple[complex, BitBasisState]]
) -> list[tuple[complex, BitBasisState]]:
    if isinstance(op, FIdentity):
        return terms
    if isinstance(op, BRaise):
        out = []
        for amp, state in terms:
            if state.occupancy(op.mode) == 0:
                sign = -1.0 if state.parity_before(op.mode) % 2 else 1.0
                out.append((amp * sign, state.flipped(op.mode)))
        return out
    if isinstance(op, BLower):
        out = []
        for amp, state in terms:
            if state.occupancy(op.mode) == 1:
                sign = -1.0 if state.parity_before(op.mode) % 2 else 1.0
                out.append((amp * sign, state.flipped(op.mode)))
        return out
    if isinstance(op, BNumber):
        return [(amp, state) for amp, state in terms if state.occupancy(op.mode) == 1]
    if isinstance(op, FScalarMul):
        return [(op.scalar * amp, state) for amp, state in _apply(op.expr, terms)]
    if isinstance(op, FSum):
        out = []
        for branch in op.terms:
            out.extend(_apply(branch, terms))
        return _merge(out)
    if isinstance(op, FProduct):
        for factor in reversed(op.factors):
            terms = _merge(_apply(factor, terms))
        return terms
    raise TypeError(f"not a bit operator: {op!r}")


# ---------------------------------------------------------------------------
# Closed polynomial forms of the basic instructions

SIMPLIFIED_KINDS = ("clear", "copy", "load", "store", "add", "subtract", "multiply")


def simplified_form(kind: str, m: int = 0, n: int | None = None) -> FermiOp:
    """Closed polynomial form of a bit-level instruction.

    ``m`` is the memory mode the instruction addresses; ``copy`` also takes
    the source mode ``n``. The forms rely on number operators being
    idempotent on bit states. The printed copy form in circulation repeats
    the clear form verbatim, which cannot copy anything; the form here
    raises the destination under the source's number operator, which gives
    the documented value semantics (destination set from source when the
    destination holds zero).
    """
    b_m, bdag_m, n_m = BLower(m), BRaise(m), BNumber(m)
    b_r, bdag_r, n_r = BLower(BIT_REGISTER), BRaise(BIT_REGISTER), BNumber(BIT_REGISTER)
    if kind == "clear":
        return ONE + (b_m - ONE) * n_m
    if kind == "copy":
        if n is None:
            raise ValueError("copy needs a source mode")
        return ONE + (bdag_m - ONE) * BNumber(n)
    if kind == "load":
        return (ONE - n_r + b_r) * (ONE - n_m) + (n_r + bdag_r) * n_m
    if kind == "store":
        return (ONE - n_m + b_m) * (ONE - n_r) + (n_m + bdag_m) * n_r
    if kind == "add":
        return ONE + (bdag_r - ONE) * n_m
    if kind == "subtract":
        return ONE + (b_r - ONE) * n_m
    if kind == "multiply":
        return ONE + (b_r - n_r) * (ONE - n_m)
    raise ValueError(f"unknown simplified form {kind!r}")


def _expected_action(kind: str, state: BitBasisState, m: int, n: int | None):
    """Intended value semantics; None means the state is annihilated."""
    r, bit = state.register, state.occupancy(m)
    if kind == "clear":
        return state if bit == 0 else state.flipped(m)
    if kind == "copy":
        src = state.occupancy(n)
        if src == 0:
            return state
        return state.flipped(m) if bit == 0 else None
    if kind == "load":
        return state if r == bit else state.flipped(BIT_REGISTER)
    if kind == "store":
        return state if bit == r else state.flipped(m)
    if kind == "add":
        if state.occupancy(m) == 0:
            return state
        return state.flipped(BIT_REGISTER) if r == 0 else None
    if kind == "subtract":
        if state.occupancy(m) == 0:
            return state
        return state.flipped(BIT_REGISTER) if r == 1 else None
    if kind == "multiply":
        target = r * state.occupancy(m)
        return state if r == target else state.flipped(BIT_REGISTER)
    raise ValueError(f"unknown simplified form {kind!r}")


@dataclass(frozen=True)
class SemanticsCase:
    state: BitBasisState
    expected: BitBasisState | None
    got: tuple[tuple[complex, BitBasisState], ...]
    ok: bool


@dataclass(frozen=True)
class SemanticsReport:
    kind: str
    cases: tuple[SemanticsCase, ...]

    @property
    def passed(self) -> bool:
        return all(case.ok for case in self.cases)

    def __bool__(self) -> bool:
        return self.passed

    def signs(self) -> dict[BitBasisState, complex]:
        """Amplitude recorded per input state, for sign inspection."""
        return {
            case.state: case.got[0][0]
            for case in self.cases
            if len(case.got) == 1
        }


def all_states(mode_count: int):
    for packed in range(2 ** (mode_count + 1)):
        register = packed & 1
        bits = tuple((packed >> (i + 1)) & 1 for i in range(mode_count))
        yield BitBasisState(register, bits)


def verify_bit_semantics(kind: str, mode_count: int = 2, m: int = 0, n: int | None = None) -> SemanticsReport:
    """Exhaustively compare a closed form's value action with its intent.

    A case passes when the operator result is the expected single state
    with amplitude modulus one (sign free), or annihilation where the
    semantics demand it. Amplitudes are recorded so signs can be reported.
    """
    if mode_count > 8:
        raise ValueError("exhaustive verification is limited to 8 modes")
    if kind == "copy" and n is None:
        n = 1
    op = simplified_form(kind, m, n)
    cases = []
    for state in all_states(mode_count):
        got = tuple(apply_fermi(op, state))
        expected = _expected_action(kind, state, m, n)
        if expected is None:
            ok = got == ()
        else:
            ok = len(got) == 1 and got[0][1] == expected and abs(abs(got[0][0]) - 1.0) == 0
        cases.append(SemanticsCase(state, expected, got, ok))
    return SemanticsReport(kind, tuple(cases))


# ---------------------------------------------------------------------------
# Algebraic relation checks


def anticommutator_is_delta(i: int, j: int, mode_count: int) -> bool:
    """Check {b_i, b_j+} = delta_ij exactly on every basis state."""
    delta = 1.0 if i == j else 0.0
    for state in all_states(mode_count):
        forward = _apply(BRaise(j), [(1.0 + 0j, state)])
        forward = _apply(BLower(i), forward)
        backward = _apply(BLower(i), [(1.0 + 0j, state)])
        backward = _apply(BRaise(j), backward)
        combined = _merge(forward + backward)
        expected = [(complex(delta), state)] if delta else []
        if combined != expected:
            return False
    return True


def anticommutator_vanishes(i: int, j: int, mode_count: int, daggered: bool) -> bool:
    """Check {b_i, b_j} = 0 (or the daggered pair) on every basis state."""
    op = BRaise if daggered else BLower
    for state in all_states(mode_count):
        one = _apply(op(i), _apply(op(j), [(1.0 + 0j, state)]))
        two = _apply(op(j), _apply(op(i), [(1.0 + 0j, state)]))
        if _merge(one + two):
            return False
    return True


def number_is_idempotent(mode: int, mode_count: int) -> bool:
    """The identity the closed forms rely on: N and N^2 agree pointwise."""
    op = BNumber(mode)
    for state in all_states(mode_count):
        once = apply_fermi(op, state)
        twice = apply_fermi(FProduct((op, op)), state)
        if once != twice:
            return False
    return True
