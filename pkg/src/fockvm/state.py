"""Machine states, superpositions, and measurement statistics.

A basis state is one classical machine configuration: the register, the
program counter, a recursion counter ("fuel"), a sparse memory map, and the
two I/O streams. All stored values are exact nonnegative Python integers of
arbitrary size; amplitudes are double-precision complex numbers. Basis
vectors are unit norm by construction.

Superpositions are finite lists of (amplitude, basis state) terms kept in a
canonical form: identical states merged, near-zero amplitudes dropped, terms
sorted lexicographically on (register, pc, fuel, mem, input, output).
"""

from __future__ import annotations

import cmath
import json
import math
import random
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, replace
from functools import cached_property

from .errors import EmptyState, InputExhausted, ParseError

#: Amplitudes with modulus below this after a merge are treated as
#: cancellation noise and removed. Callers may override per merge.
DROP_TOLERANCE = 1e-12

#: Significant digits used by the canonical text format and the CLI.
SIGNIFICANT_DIGITS = 12

Amplitude = complex


def _check_counter(name: str, value: object) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < 0:
        raise ValueError(f"{name} must be nonnegative, got {value}")
    return value


@dataclass(frozen=True, order=True)
class BasisState:
    """One classical machine configuration.

    ``mem`` may be given as a mapping or as (address, value) pairs; it is
    normalized to a sorted tuple with all zero entries removed, so two states
    with the same contents always compare and hash equal. ``input`` holds
    the not-yet-consumed input values, ``output`` the values emitted so far.
    """

    register: int = 0
    pc: int = 0
    fuel: int = 0
    mem: tuple[tuple[int, int], ...] = ()
    input: tuple[int, ...] = ()
    output: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        _check_counter("register", self.register)
        _check_counter("pc", self.pc)
        _check_counter("fuel", self.fuel)
        items = self.mem.items() if isinstance(self.mem, Mapping) else tuple(self.mem)
        cleaned: dict[int, int] = {}
        for addr, value in items:
            _check_counter("memory address", addr)
            _check_counter(f"memory value at {addr}", value)
            if addr in cleaned:
                raise ValueError(f"duplicate memory address {addr}")
            if value > 0:
                cleaned[addr] = value
        object.__setattr__(self, "mem", tuple(sorted(cleaned.items())))
        for field in ("input", "output"):
            stream = tuple(getattr(self, field))
            for v in stream:
                _check_counter(f"{field} value", v)
            object.__setattr__(self, field, stream)

    @cached_property
    def _mem_map(self) -> dict[int, int]:
        return dict(self.mem)

    def mem_value(self, addr: int) -> int:
        """Value stored at ``addr``; absent addresses read as zero."""
        return self._mem_map.get(addr, 0)

    def with_register(self, value: int) -> "BasisState":
        return replace(self, register=value)

    def with_pc(self, value: int) -> "BasisState":
        return replace(self, pc=value)

    def with_fuel(self, value: int) -> "BasisState":
        return replace(self, fuel=value)

    def with_mem(self, addr: int, value: int) -> "BasisState":
        items = dict(self._mem_map)
        if value > 0:
            items[addr] = value
        else:
            items.pop(addr, None)
        return replace(self, mem=tuple(sorted(items.items())))

    def pop_input(self) -> tuple[int, "BasisState"]:
        """Consume the head of the input stream."""
        if not self.input:
            raise InputExhausted("input stream is empty")
        return self.input[0], replace(self, input=self.input[1:])

    def append_output(self, value: int) -> "BasisState":
        return replace(self, output=self.output + (value,))


@dataclass(frozen=True)
class Superposition:
    """A canonical finite superposition of basis states.

    Build instances through :func:`merge` (or :func:`unit`); the constructor
    assumes its terms are already canonical.
    """

    terms: tuple[tuple[complex, BasisState], ...] = ()

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def amplitude(self, state: BasisState) -> complex:
        for amp, s in self.terms:
            if s == state:
                return amp
        return 0j

    def norm_squared(self) -> float:
        return sum(abs(amp) ** 2 for amp, _ in self.terms)

    def states(self) -> tuple[BasisState, ...]:
        return tuple(s for _, s in self.terms)


def unit(state: BasisState) -> Superposition:
    """The unit-amplitude superposition containing just ``state``."""
    return Superposition(((1.0 + 0j, state),))


def merge(
    terms: Iterable[tuple[complex, BasisState]],
    drop_tolerance: float = DROP_TOLERANCE,
) -> Superposition:
    """Combine raw (amplitude, state) pairs into canonical form.

    Amplitudes of identical basis states are summed, terms whose modulus
    falls below ``drop_tolerance`` are removed, and the survivors are sorted
    into the canonical order. Idempotent by construction.
    """
    acc: dict[BasisState, complex] = {}
    for amp, state in terms:
        amp = complex(amp)
        if not (cmath.isfinite(amp)):
            raise ValueError(f"non-finite amplitude {amp!r}")
        acc[state] = acc.get(state, 0j) + amp
    kept = [(amp, state) for state, amp in acc.items() if abs(amp) >= drop_tolerance]
    kept.sort(key=lambda t: t[1])
    return Superposition(tuple(kept))


def inner_product(a: Superposition, b: Superposition) -> complex:
    """Hermitian inner product; basis states compare by full field equality."""
    amps = {state: amp for amp, state in a.terms}
    total = 0j
    for amp_b, state in b.terms:
        amp_a = amps.get(state)
        if amp_a is not None:
            total += amp_a.conjugate() * amp_b
    return total


def probabilities(s: Superposition) -> dict[BasisState, float]:
    """Measurement probabilities |amp|^2 normalized to total one."""
    if not s.terms:
        raise EmptyState("cannot take probabilities of an empty superposition")
    weights = [(state, abs(amp) ** 2) for amp, state in s.terms]
    total = sum(w for _, w in weights)
    return {state: w / total for state, w in weights}


def sample(s: Superposition, count: int, seed: int) -> dict[BasisState, int]:
    """Draw ``count`` independent measurements, deterministic per ``seed``.

    Returns counts only for outcomes that actually occurred.
    """
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    probs = probabilities(s)
    if count == 0:
        return {}
    states = list(probs)
    weights = [probs[state] for state in states]
    rng = random.Random(seed)
    counts: dict[BasisState, int] = {}
    for state in rng.choices(states, weights=weights, k=count):
        counts[state] = counts.get(state, 0) + 1
    return counts


def distance(a: Superposition, b: Superposition) -> float:
    """L2 distance between two superpositions."""
    amps: dict[BasisState, complex] = {state: amp for amp, state in a.terms}
    for amp, state in b.terms:
        amps[state] = amps.get(state, 0j) - amp
    return math.sqrt(sum(abs(v) ** 2 for v in amps.values()))


def round_significant(x: float) -> float:
    """Round to the canonical 12 significant digits."""
    return float(format(x, f".{SIGNIFICANT_DIGITS}g"))


def serialize(s: Superposition) -> str:
    """Canonical text form: a JSON list of term records.

    Each record carries the amplitude as a [re, im] pair printed with 12
    significant digits plus the state fields; memory is an address:value
    object. Term order and memory key order are canonical, so identical
    superpositions always serialize to identical text.
    """
    records = []
    for amp, state in s.terms:
        records.append(
            {
                "amplitude": [round_significant(amp.real), round_significant(amp.imag)],
                "register": state.register,
                "pc": state.pc,
                "fuel": state.fuel,
                "mem": {str(addr): value for addr, value in state.mem},
                "input": list(state.input),
                "output": list(state.output),
            }
        )
    return json.dumps(records, indent=1)


def _record_int(record: dict, key: str) -> int:
    value = record.get(key, 0)
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ParseError(f"field {key!r} must be a nonnegative integer, got {value!r}")
    return value


def _record_stream(record: dict, key: str) -> tuple[int, ...]:
    values = record.get(key, [])
    if not isinstance(values, list):
        raise ParseError(f"field {key!r} must be a list")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise ParseError(f"field {key!r} must hold nonnegative integers, got {v!r}")
        out.append(v)
    return tuple(out)


def deserialize(text: str) -> Superposition:
    """Parse the canonical text form back into a superposition.

    Raises :class:`ParseError` with line and column information on malformed
    JSON, and without position on schema violations.
    """
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    if not isinstance(records, list):
        raise ParseError("state text must be a JSON list of term records")
    terms = []
    for record in records:
        if not isinstance(record, dict):
            raise ParseError(f"term record must be an object, got {record!r}")
        amp = record.get("amplitude")
        if (
            not isinstance(amp, list)
            or len(amp) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in amp)
        ):
            raise ParseError(f"amplitude must be a [re, im] number pair, got {amp!r}")
        mem_obj = record.get("mem", {})
        if not isinstance(mem_obj, dict):
            raise ParseError("field 'mem' must be an address:value object")
        mem = {}
        for key, value in mem_obj.items():
            try:
                addr = int(key)
            except ValueError:
                raise ParseError(f"memory address {key!r} is not an integer") from None
            if addr < 0 or isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ParseError(f"bad memory entry {key!r}: {value!r}")
            mem[addr] = value
        state = BasisState(
            register=_record_int(record, "register"),
            pc=_record_int(record, "pc"),
            fuel=_record_int(record, "fuel"),
            mem=mem,
            input=_record_stream(record, "input"),
            output=_record_stream(record, "output"),
        )
        terms.append((complex(amp[0], amp[1]), state))
    return merge(terms)
