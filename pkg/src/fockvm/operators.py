"""Operator expression trees and their evaluator.

Programs and Hamiltonians are expression trees built from a small set of
primitives acting on machine basis states:

* ``Raise``/``Lower``: ladder operators, value v to v+1 with amplitude
  sqrt(v+1), or v to v-1 with amplitude sqrt(v) (annihilating at zero).
* ``NumberOp``: leaves the state alone, multiplies the amplitude by v.
* ``Clear``: the normalized lowering power that sets a location to zero
  with amplitude one.
* ``Copy``: the normalized raising power that copies a source value onto a
  zeroed destination with amplitude one.
* ``SetValue``: the normalized set-to-value form (the star-assignment
  operator of the C layer); writes the value of an integer exponent
  expression into a location with amplitude one.
* ``GuardedPower``: a base operator raised to an integer exponent computed
  per basis term from number operators, including the step guards
  Theta (1 iff x >= 0, so Theta(0) = 1) and ThetaTheta (1 iff x == 0).
* ``InstructionOp``: the amplitude-one value action of an arithmetic or
  bitwise assembly instruction on the register.
* ``RecursiveRef``/``Define``: re-entry points for compiled programs with
  backward jumps; ``Bra`` marks a term as halted (a halted term is inert
  under every further operator).

Products apply right to left, sums distribute and merge, and guarded
exponents are evaluated per basis term, so superposition terms evolve
independently. Everything here is pure: evaluation returns new states.

The input and output streams are pseudo-locations: ``Copy(dst, IN)``
consumes the head of the input stream and ``Copy(OUT, src)`` appends to the
output stream. No other primitive touches the streams.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Union

from . import isa
from .errors import (
    CopyOntoNonzero,
    FuelExhausted,
    NegativeExponent,
    UndefinedReference,
    UnsupportedLocation,
)
from .state import DROP_TOLERANCE, BasisState, Superposition, merge

#: Default evaluator recursion budget, matching the default fuel counter.
DEFAULT_FUEL_BUDGET = 10


# ---------------------------------------------------------------------------
# Locations


@dataclass(frozen=True)
class Location:
    """A storage slot: the register, program counter, fuel counter, one of
    the two stream pseudo-locations, or a memory address."""

    kind: str
    addr: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in {"register", "pc", "fuel", "in", "out", "mem"}:
            raise ValueError(f"unknown location kind {self.kind!r}")
        if self.kind == "mem":
            if self.addr is None or self.addr < 0:
                raise ValueError(f"memory address must be nonnegative, got {self.addr!r}")
        elif self.addr is not None:
            raise ValueError(f"{self.kind} takes no address")

    def __str__(self) -> str:
        names = {
            "register": "Register",
            "pc": "ProgramCounter",
            "fuel": "Fuel",
            "in": "In",
            "out": "Out",
        }
        if self.kind == "mem":
            return f"(Mem {self.addr})"
        return names[self.kind]


REGISTER = Location("register")
PC = Location("pc")
FUEL = Location("fuel")
IN = Location("in")
OUT = Location("out")


def Mem(addr: int) -> Location:
    return Location("mem", addr)


def location_value(state: BasisState, loc: Location) -> int:
    if loc.kind == "mem":
        return state.mem_value(loc.addr)
    if loc.kind == "register":
        return state.register
    if loc.kind == "pc":
        return state.pc
    if loc.kind == "fuel":
        return state.fuel
    raise UnsupportedLocation(f"{loc} has no readable value")


def with_location(state: BasisState, loc: Location, value: int) -> BasisState:
    if loc.kind == "mem":
        return state.with_mem(loc.addr, value)
    if loc.kind == "register":
        return state.with_register(value)
    if loc.kind == "pc":
        return state.with_pc(value)
    if loc.kind == "fuel":
        return state.with_fuel(value)
    raise UnsupportedLocation(f"{loc} cannot be written directly")


# ---------------------------------------------------------------------------
# Integer exponent expressions


class ExponentExpr:
    """Integer-valued expression over number operators.

    Supports +, -, * with other exponent expressions or plain integers, so
    guard formulas read naturally, e.g. ``ThetaTheta(Num(PC) - 4)``.
    """

    def __add__(self, other):
        return ExpAdd(self, as_exponent(other))

    def __radd__(self, other):
        return ExpAdd(as_exponent(other), self)

    def __sub__(self, other):
        return ExpSub(self, as_exponent(other))

    def __rsub__(self, other):
        return ExpSub(as_exponent(other), self)

    def __mul__(self, other):
        return ExpMul(self, as_exponent(other))

    def __rmul__(self, other):
        return ExpMul(as_exponent(other), self)


@dataclass(frozen=True)
class Const(ExponentExpr):
    value: int


@dataclass(frozen=True)
class Num(ExponentExpr):
    """The eigenvalue of the number operator at a location."""

    loc: Location


@dataclass(frozen=True)
class ExpAdd(ExponentExpr):
    left: ExponentExpr
    right: ExponentExpr


@dataclass(frozen=True)
class ExpSub(ExponentExpr):
    left: ExponentExpr
    right: ExponentExpr


@dataclass(frozen=True)
class ExpMul(ExponentExpr):
    left: ExponentExpr
    right: ExponentExpr


@dataclass(frozen=True)
class Theta(ExponentExpr):
    """Step guard: 1 iff the argument is >= 0. Theta(0) = 1 throughout."""

    arg: ExponentExpr


@dataclass(frozen=True)
class ThetaTheta(ExponentExpr):
    """Equality guard: 1 iff the argument is exactly 0."""

    arg: ExponentExpr


def as_exponent(value: Union[int, ExponentExpr]) -> ExponentExpr:
    if isinstance(value, ExponentExpr):
        return value
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"cannot use {value!r} as an exponent expression")
    return Const(value)


def eval_exponent(expr: ExponentExpr, state: BasisState) -> int:
    """Exact integer evaluation of an exponent expression on a basis state."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Num):
        return location_value(state, expr.loc)
    if isinstance(expr, ExpAdd):
        return eval_exponent(expr.left, state) + eval_exponent(expr.right, state)
    if isinstance(expr, ExpSub):
        return eval_exponent(expr.left, state) - eval_exponent(expr.right, state)
    if isinstance(expr, ExpMul):
        return eval_exponent(expr.left, state) * eval_exponent(expr.right, state)
    if isinstance(expr, Theta):
        return 1 if eval_exponent(expr.arg, state) >= 0 else 0
    if isinstance(expr, ThetaTheta):
        return 1 if eval_exponent(expr.arg, state) == 0 else 0
    raise TypeError(f"not an exponent expression: {expr!r}")


# ---------------------------------------------------------------------------
# Operator expression nodes


class OperatorExpr:
    """Base class for operator expression tree nodes."""


@dataclass(frozen=True)
class Identity(OperatorExpr):
    pass


@dataclass(frozen=True)
class Raise(OperatorExpr):
    loc: Location


@dataclass(frozen=True)
class Lower(OperatorExpr):
    loc: Location


@dataclass(frozen=True)
class NumberOp(OperatorExpr):
    loc: Location


@dataclass(frozen=True)
class Clear(OperatorExpr):
    loc: Location


@dataclass(frozen=True)
class Copy(OperatorExpr):
    """Copy the source value onto the destination, which must hold zero.

    ``Copy(dst, IN)`` consumes the input head; ``Copy(OUT, src)`` appends to
    the output stream (no zero requirement, appending is the write).
    """

    dst: Location
    src: Location


@dataclass(frozen=True)
class ScalarMul(OperatorExpr):
    scalar: complex
    expr: OperatorExpr


@dataclass(frozen=True)
class Product(OperatorExpr):
    """Operator product; the rightmost factor applies first."""

    factors: tuple[OperatorExpr, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("Product requires at least one factor")


@dataclass(frozen=True)
class Sum(OperatorExpr):
    terms: tuple[OperatorExpr, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("Sum requires at least one term")


@dataclass(frozen=True)
class GuardedPower(OperatorExpr):
    """Base operator applied k times, k evaluated per basis term.

    Exponent 0 means identity; a negative exponent is an error.
    """

    base: OperatorExpr
    exponent: ExponentExpr


@dataclass(frozen=True)
class SetValue(OperatorExpr):
    """Set a location to the value of an exponent expression, amplitude one.

    The normalized raise-to-power/lower-to-zero composite in closed form;
    ``SetValue(loc, Const(0))`` acts exactly like ``Clear(loc)``.
    """

    loc: Location
    value: ExponentExpr


@dataclass(frozen=True)
class InstructionOp(OperatorExpr):
    """Amplitude-one value action of a register instruction."""

    instr: isa.Instruction


@dataclass(frozen=True)
class RecursiveRef(OperatorExpr):
    """Re-enter the named definition, spending one unit of evaluator budget."""

    label: str


@dataclass(frozen=True)
class Bra(OperatorExpr):
    """Marks a term halted; halted terms pass through everything unchanged."""


@dataclass(frozen=True)
class Define(OperatorExpr):
    """Bind ``label`` to ``body`` for recursive references, then apply it."""

    label: str
    body: OperatorExpr


def product(*factors: OperatorExpr) -> OperatorExpr:
    """Build a product, collapsing the single-factor case."""
    if len(factors) == 1:
        return factors[0]
    return Product(tuple(factors))


def summation(*terms: OperatorExpr) -> OperatorExpr:
    if len(terms) == 1:
        return terms[0]
    return Sum(tuple(terms))


def scaled(scalar: complex, expr: OperatorExpr) -> OperatorExpr:
    return ScalarMul(complex(scalar), expr)


# ---------------------------------------------------------------------------
# Evaluation


class EvalTerm(NamedTuple):
    amplitude: complex
    state: BasisState
    halted: bool


class EvalStats:
    """Counters filled in during evaluation, for run reporting."""

    __slots__ = ("primitive_ops", "reentries")

    def __init__(self) -> None:
        self.primitive_ops = 0
        self.reentries = 0


def apply_primitive(op: OperatorExpr, state: BasisState) -> list[tuple[complex, BasisState]]:
    """Action of a single primitive on one basis state.

    Returns a list of (amplitude, state) results; an empty list means the
    state was annihilated.
    """
    if isinstance(op, Raise):
        v = location_value(state, op.loc)
        return [(complex(math.sqrt(v + 1)), with_location(state, op.loc, v + 1))]
    if isinstance(op, Lower):
        v = location_value(state, op.loc)
        if v == 0:
            return []
        return [(complex(math.sqrt(v)), with_location(state, op.loc, v - 1))]
    if isinstance(op, NumberOp):
        return [(complex(location_value(state, op.loc)), state)]
    if isinstance(op, Clear):
        return [(1.0 + 0j, with_location(state, op.loc, 0))]
    if isinstance(op, Copy):
        return [(1.0 + 0j, _copy_action(state, op.dst, op.src))]
    raise TypeError(f"not a primitive operator: {op!r}")


def _copy_action(state: BasisState, dst: Location, src: Location) -> BasisState:
    if dst.kind == "out":
        if src.kind in {"in", "out"}:
            raise UnsupportedLocation("output copy source must be a storage location")
        return state.append_output(location_value(state, src))
    if dst.kind == "in" or src.kind == "out":
        raise UnsupportedLocation("streams support only input reads and output appends")
    if location_value(state, dst) != 0:
        raise CopyOntoNonzero(
            f"copy onto nonzero destination {dst} (value {location_value(state, dst)})"
        )
    if src.kind == "in":
        value, state = state.pop_input()
    else:
        value = location_value(state, src)
    return with_location(state, dst, value)


def _merge_eval_terms(terms: Iterable[EvalTerm], tol: float) -> list[EvalTerm]:
    acc: dict[tuple[BasisState, bool], complex] = {}
    for amp, state, halted in terms:
        key = (state, halted)
        acc[key] = acc.get(key, 0j) + amp
    kept = [
        EvalTerm(amp, state, halted)
        for (state, halted), amp in acc.items()
        if abs(amp) >= tol
    ]
    kept.sort(key=lambda t: (t.state, t.halted))
    return kept


def _dispatch(
    expr: OperatorExpr,
    terms: list[EvalTerm],
    env: Mapping[str, OperatorExpr],
    budget: int,
    tol: float,
    stats: EvalStats | None,
) -> list[EvalTerm]:
    if isinstance(expr, Identity):
        return terms

    if isinstance(expr, (Raise, Lower, NumberOp, Clear, Copy)):
        out: list[EvalTerm] = []
        for term in terms:
            if term.halted:
                out.append(term)
                continue
            if stats is not None:
                stats.primitive_ops += 1
            for factor, state in apply_primitive(expr, term.state):
                out.append(EvalTerm(term.amplitude * factor, state, False))
        return out

    if isinstance(expr, ScalarMul):
        if not cmath.isfinite(expr.scalar):
            raise ValueError(f"non-finite scalar {expr.scalar!r}")
        live = _dispatch(expr.expr, [t for t in terms if not t.halted], env, budget, tol, stats)
        scaled_terms = [EvalTerm(expr.scalar * t.amplitude, t.state, t.halted) for t in live]
        return [t for t in terms if t.halted] + scaled_terms

    if isinstance(expr, Product):
        for factor in reversed(expr.factors):
            terms = _merge_eval_terms(_dispatch(factor, terms, env, budget, tol, stats), tol)
        return terms

    if isinstance(expr, Sum):
        out = []
        for branch in expr.terms:
            out.extend(_dispatch(branch, terms, env, budget, tol, stats))
        return _merge_eval_terms(out, tol)

    if isinstance(expr, GuardedPower):
        out = []
        for term in terms:
            if term.halted:
                out.append(term)
                continue
            k = eval_exponent(expr.exponent, term.state)
            if k < 0:
                raise NegativeExponent(f"guarded power exponent evaluated to {k}")
            branch = [term]
            for _ in range(k):
                branch = _dispatch(expr.base, branch, env, budget, tol, stats)
            out.extend(branch)
        return out

    if isinstance(expr, SetValue):
        out = []
        for term in terms:
            if term.halted:
                out.append(term)
                continue
            value = eval_exponent(expr.value, term.state)
            if value < 0:
                raise NegativeExponent(f"set-value target evaluated to {value}")
            if stats is not None:
                stats.primitive_ops += 1
            out.append(EvalTerm(term.amplitude, with_location(term.state, expr.loc, value), False))
        return out

    if isinstance(expr, InstructionOp):
        out = []
        for term in terms:
            if term.halted:
                out.append(term)
                continue
            if stats is not None:
                stats.primitive_ops += 1
            out.append(EvalTerm(term.amplitude, isa.apply_to_state(expr.instr, term.state), False))
        return out

    if isinstance(expr, RecursiveRef):
        body = env.get(expr.label)
        out = []
        for term in terms:
            if term.halted:
                out.append(term)
                continue
            if budget <= 0:
                raise FuelExhausted(
                    f"recursive re-entry of {expr.label!r} with no budget left"
                )
            if body is None:
                raise UndefinedReference(f"no definition for label {expr.label!r}")
            if stats is not None:
                stats.reentries += 1
            out.extend(_dispatch(body, [term], env, budget - 1, tol, stats))
        return out

    if isinstance(expr, Bra):
        return [EvalTerm(t.amplitude, t.state, True) for t in terms]

    if isinstance(expr, Define):
        extended = dict(env)
        extended[expr.label] = expr.body
        return _dispatch(expr.body, terms, extended, budget, tol, stats)

    raise TypeError(f"not an operator expression: {expr!r}")


def apply_with_status(
    expr: OperatorExpr,
    s: Superposition,
    env: Mapping[str, OperatorExpr] | None = None,
    fuel_budget: int = DEFAULT_FUEL_BUDGET,
    *,
    drop_tolerance: float = DROP_TOLERANCE,
    stats: EvalStats | None = None,
) -> list[EvalTerm]:
    """Like :func:`apply_expr` but keeps the per-term halted flags."""
    if fuel_budget < 0:
        raise ValueError(f"fuel budget must be nonnegative, got {fuel_budget}")
    terms = [EvalTerm(amp, state, False) for amp, state in s.terms]
    result = _dispatch(expr, terms, env or {}, fuel_budget, drop_tolerance, stats)
    return _merge_eval_terms(result, drop_tolerance)


def apply_expr(
    expr: OperatorExpr,
    s: Superposition,
    env: Mapping[str, OperatorExpr] | None = None,
    fuel_budget: int = DEFAULT_FUEL_BUDGET,
    *,
    drop_tolerance: float = DROP_TOLERANCE,
    stats: EvalStats | None = None,
) -> Superposition:
    """Apply an operator expression to a superposition.

    ``env`` supplies definitions for ``RecursiveRef`` labels not bound by an
    enclosing ``Define``. ``fuel_budget`` bounds recursive re-entries; a
    re-entry attempted with no budget raises :class:`FuelExhausted`.
    """
    terms = apply_with_status(
        expr, s, env, fuel_budget, drop_tolerance=drop_tolerance, stats=stats
    )
    return merge(((t.amplitude, t.state) for t in terms), drop_tolerance)


def locations(node: object) -> set[Location]:
    """Every location referenced anywhere in an operator or exponent tree."""
    found: set[Location] = set()

    def walk(obj: object) -> None:
        if isinstance(obj, Location):
            found.add(obj)
        elif isinstance(obj, (OperatorExpr, ExponentExpr)):
            for value in vars(obj).values():
                walk(value)
        elif isinstance(obj, tuple):
            for item in obj:
                walk(item)

    walk(node)
    return found


# ---------------------------------------------------------------------------
# Deterministic textual dump


def _format_scalar(value: complex) -> str:
    re = format(value.real, ".12g")
    if value.imag == 0:
        return re
    return f"({re},{format(value.imag, '.12g')})"


def sexpr(node: object) -> str:
    """Deterministic S-expression dump of operator and exponent trees."""
    if isinstance(node, Location):
        return str(node)
    if isinstance(node, Identity):
        return "(Identity)"
    if isinstance(node, Raise):
        return f"(Raise {sexpr(node.loc)})"
    if isinstance(node, Lower):
        return f"(Lower {sexpr(node.loc)})"
    if isinstance(node, NumberOp):
        return f"(NumberOp {sexpr(node.loc)})"
    if isinstance(node, Clear):
        return f"(Clear {sexpr(node.loc)})"
    if isinstance(node, Copy):
        return f"(Copy {sexpr(node.dst)} {sexpr(node.src)})"
    if isinstance(node, ScalarMul):
        return f"(ScalarMul {_format_scalar(node.scalar)} {sexpr(node.expr)})"
    if isinstance(node, Product):
        return "(Product " + " ".join(sexpr(f) for f in node.factors) + ")"
    if isinstance(node, Sum):
        return "(Sum " + " ".join(sexpr(t) for t in node.terms) + ")"
    if isinstance(node, GuardedPower):
        return f"(GuardedPower {sexpr(node.base)} {sexpr(node.exponent)})"
    if isinstance(node, SetValue):
        return f"(SetValue {sexpr(node.loc)} {sexpr(node.value)})"
    if isinstance(node, InstructionOp):
        instr = node.instr
        if instr.operand is None:
            return f"(Instruction {instr.opcode.value})"
        return f"(Instruction {instr.opcode.value} {instr.operand})"
    if isinstance(node, RecursiveRef):
        return f"(RecursiveRef {node.label})"
    if isinstance(node, Bra):
        return "(Bra)"
    if isinstance(node, Define):
        return f"(Define {node.label} {sexpr(node.body)})"
    if isinstance(node, Const):
        return str(node.value)
    if isinstance(node, Num):
        return f"(NumberOp {sexpr(node.loc)})"
    if isinstance(node, ExpAdd):
        return f"(Add {sexpr(node.left)} {sexpr(node.right)})"
    if isinstance(node, ExpSub):
        return f"(Sub {sexpr(node.left)} {sexpr(node.right)})"
    if isinstance(node, ExpMul):
        return f"(Mul {sexpr(node.left)} {sexpr(node.right)})"
    if isinstance(node, Theta):
        return f"(Theta {sexpr(node.arg)})"
    if isinstance(node, ThetaTheta):
        return f"(ThetaTheta {sexpr(node.arg)})"
    raise TypeError(f"cannot print {node!r}")
