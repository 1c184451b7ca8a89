"""Probabilistic rewrite grammars, classical and quantum.

A grammar is a list of rewrite rules over strings of single-character
symbols, each rule carrying a weight: a nonnegative real probability in
classical mode, a complex amplitude in quantum mode. Two derivation
conventions are supported because both occur in practice:

* step derivations rewrite one occurrence per step (each choice of position
  and rule is a separate branch), and
* parallel passes rewrite every symbol occurrence exactly once,
  independently, using the single-symbol rules.

Transition probabilities follow four rules: sum the amplitudes of all
derivation sequences from input to output (lengths one up to the bound);
each sequence's amplitude is the product of its step weights; in quantum
mode the relative probability is the squared modulus of that sum (classical
mode uses the sum itself, since classical weights are probabilities, not
amplitudes); and absolute probabilities divide by the total over every
output reachable within the same bound, so they sum to one.

Rule weights are relative: they are normalized within the set of rules
sharing a left-hand side before use (by the sum classically, by the root
sum of squared moduli in quantum mode).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .errors import NoRuleForSymbol, ParseError

CLASSICAL = "classical"
QUANTUM = "quantum"


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: str
    weight: complex = 1.0 + 0j

    def __post_init__(self) -> None:
        if not self.lhs:
            raise ValueError("rule left-hand side must be nonempty")
        if not cmath.isfinite(self.weight):
            raise ValueError(f"rule weight must be finite, got {self.weight!r}")
        object.__setattr__(self, "weight", complex(self.weight))


@dataclass(frozen=True)
class Grammar:
    start: str
    rules: tuple[Rule, ...]
    mode: str = CLASSICAL

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))
        if not self.rules:
            raise ValueError("a grammar needs at least one rule")
        if self.mode not in {CLASSICAL, QUANTUM}:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == CLASSICAL:
            for rule in self.rules:
                if rule.weight.imag != 0 or rule.weight.real < 0:
                    raise ValueError(
                        f"classical weights must be nonnegative reals, got {rule.weight!r}"
                    )


class Successor(NamedTuple):
    string: str
    position: int
    rule: Rule
    weight: complex


@dataclass(frozen=True)
class DerivationPath:
    """A sequence of (position, rule index) steps and its exact amplitude."""

    steps: tuple[tuple[int, int], ...]
    amplitude: complex


@lru_cache(maxsize=None)
def _normalized_weights(grammar: Grammar) -> tuple[complex, ...]:
    """Per-rule weights normalized within each left-hand-side group."""
    groups: dict[str, list[int]] = {}
    for idx, rule in enumerate(grammar.rules):
        groups.setdefault(rule.lhs, []).append(idx)
    out = [0j] * len(grammar.rules)
    for indices in groups.values():
        if grammar.mode == CLASSICAL:
            total = sum(grammar.rules[i].weight.real for i in indices)
        else:
            total = math.sqrt(sum(abs(grammar.rules[i].weight) ** 2 for i in indices))
        for i in indices:
            out[i] = grammar.rules[i].weight / total if total else 0j
    return tuple(out)


def _parse_weight(text: str, line: int) -> complex:
    text = text.strip()
    try:
        if text.startswith("(") and text.endswith(")"):
            re_part, im_part = text[1:-1].split(",")
            return complex(float(re_part), float(im_part))
        return complex(float(text), 0.0)
    except ValueError:
        raise ParseError(f"malformed weight {text!r}", line=line) from None


def parse_grammar(text: str) -> Grammar:
    """Parse the line format: optional ``mode:`` line, a ``start:`` line,
    then ``rule: lhs -> rhs [@ weight]`` lines. ``#`` starts a comment.

    Weights are reals or ``(re,im)`` pairs and default to one.
    """
    mode = CLASSICAL
    start: str | None = None
    rules: list[Rule] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(":")
        key = key.strip().lower()
        rest = rest.strip()
        if key == "mode":
            if rest not in {CLASSICAL, QUANTUM}:
                raise ParseError(f"mode must be classical or quantum, got {rest!r}", line=lineno)
            mode = rest
        elif key == "start":
            if not rest:
                raise ParseError("start line needs a symbol string", line=lineno)
            start = rest
        elif key == "rule":
            body, _, weight_text = rest.partition("@")
            lhs, arrow, rhs = body.partition("->")
            if not arrow:
                raise ParseError("rule needs the form 'lhs -> rhs'", line=lineno)
            lhs = lhs.strip()
            rhs = rhs.strip()
            if not lhs:
                raise ParseError("rule left-hand side is empty", line=lineno)
            weight = _parse_weight(weight_text, lineno) if weight_text.strip() else 1.0 + 0j
            rules.append(Rule(lhs, rhs, weight))
        else:
            raise ParseError(f"unknown directive {key!r}", line=lineno)
    if start is None:
        raise ParseError("missing start line", line=1)
    if not rules:
        raise ParseError("grammar has no rules", line=1)
    try:
        return Grammar(start, tuple(rules), mode)
    except ValueError as exc:
        raise ParseError(str(exc), line=1) from None


def step_successors(grammar: Grammar, s: str, position: int | None = None) -> list[Successor]:
    """All single-rewrite successors of ``s``.

    Each (occurrence position, applicable rule) pair yields one successor,
    ordered by position then rule index. ``position`` restricts rewriting
    to occurrences starting there. Weights are the per-group normalized
    rule weights.
    """
    weights = _normalized_weights(grammar)
    out: list[tuple[tuple[int, int], Successor]] = []
    for idx, rule in enumerate(grammar.rules):
        span = len(rule.lhs)
        pos = s.find(rule.lhs)
        while pos != -1:
            if position is None or pos == position:
                result = s[:pos] + rule.rhs + s[pos + span :]
                out.append(((pos, idx), Successor(result, pos, rule, weights[idx])))
            pos = s.find(rule.lhs, pos + 1)
    out.sort(key=lambda item: item[0])
    return [succ for _, succ in out]


def pass_distribution(grammar: Grammar, s: str) -> dict[str, float]:
    """Rewrite every symbol of ``s`` exactly once, independently.

    Classical mode only. Uses the single-symbol rules; each symbol's
    applicable rule weights are normalized among themselves, and identical
    outcome strings aggregate their probabilities.
    """
    if grammar.mode != CLASSICAL:
        raise ValueError("parallel passes are defined for classical grammars")
    weights = _normalized_weights(grammar)
    per_symbol: list[list[tuple[str, float]]] = []
    for symbol in s:
        options = [
            (rule.rhs, weights[idx].real)
            for idx, rule in enumerate(grammar.rules)
            if rule.lhs == symbol
        ]
        if not options:
            raise NoRuleForSymbol(f"no single-symbol rule rewrites {symbol!r}")
        per_symbol.append(options)
    outcomes: dict[str, float] = {"": 1.0}
    for options in per_symbol:
        nxt: dict[str, float] = {}
        for prefix, p in outcomes.items():
            for rhs, q in options:
                key = prefix + rhs
                nxt[key] = nxt.get(key, 0.0) + p * q
        outcomes = nxt
    return outcomes


def derivation_paths(
    grammar: Grammar,
    source: str,
    target: str,
    max_steps: int,
    position: int | None = None,
) -> list[DerivationPath]:
    """Every derivation sequence from ``source`` to ``target`` within the
    step bound, with its exact amplitude (the complex product of the step
    weights). Mostly a debugging and cross-checking aid; the probability
    computation sums amplitudes without materializing paths.
    """
    weights = _normalized_weights(grammar)
    found: list[DerivationPath] = []

    def rewrites(s: str) -> list[tuple[int, int, str]]:
        out = []
        for idx, rule in enumerate(grammar.rules):
            pos = s.find(rule.lhs)
            while pos != -1:
                if position is None or pos == position:
                    out.append((pos, idx, s[:pos] + rule.rhs + s[pos + len(rule.lhs) :]))
                pos = s.find(rule.lhs, pos + 1)
        out.sort(key=lambda item: item[:2])
        return out

    def walk(s: str, steps: tuple[tuple[int, int], ...], amp: complex) -> None:
        if len(steps) >= max_steps:
            return
        for pos, idx, result in rewrites(s):
            next_amp = amp * weights[idx]
            path = steps + ((pos, idx),)
            if result == target:
                found.append(DerivationPath(path, next_amp))
            walk(result, path, next_amp)

    walk(source, (), 1.0 + 0j)
    return found


def _amplitude_sums(
    grammar: Grammar, source: str, max_steps: int, position: int | None
) -> dict[str, complex]:
    """Sum of derivation amplitudes per reachable string, over path lengths
    one through ``max_steps``."""
    acc: dict[str, complex] = {}
    frontier: dict[str, complex] = {source: 1.0 + 0j}
    for _ in range(max_steps):
        nxt: dict[str, complex] = {}
        for s, amp in frontier.items():
            for succ in step_successors(grammar, s, position=position):
                nxt[succ.string] = nxt.get(succ.string, 0j) + amp * succ.weight
        frontier = nxt
        for s, amp in nxt.items():
            acc[s] = acc.get(s, 0j) + amp
        if not frontier:
            break
    return acc


def _relative(grammar: Grammar, amplitude: complex) -> float:
    if grammar.mode == CLASSICAL:
        return amplitude.real
    return abs(amplitude) ** 2


def transition_probability(
    grammar: Grammar,
    source: str,
    target: str,
    max_steps: int,
    position: int | None = None,
) -> tuple[float, float]:
    """(relative, absolute) probability of rewriting ``source`` to ``target``.

    Derivations of every length from one to ``max_steps`` count, including
    ones that revisit the target and return. An unreachable target has
    relative probability zero. ``position`` restricts every rewrite to one
    occurrence position, which isolates a single branching site.
    """
    if max_steps < 0:
        raise ValueError(f"max_steps must be nonnegative, got {max_steps}")
    sums = _amplitude_sums(grammar, source, max_steps, position)
    relative = _relative(grammar, sums.get(target, 0j))
    total = sum(_relative(grammar, amp) for amp in sums.values())
    absolute = relative / total if total else 0.0
    return relative, absolute


def outcome_distribution(
    grammar: Grammar, source: str, max_steps: int, position: int | None = None
) -> dict[str, float]:
    """Absolute probabilities of every output reachable within the bound."""
    sums = _amplitude_sums(grammar, source, max_steps, position)
    rel = {s: _relative(grammar, amp) for s, amp in sums.items()}
    total = sum(rel.values())
    if not total:
        return {}
    return {s: r / total for s, r in rel.items()}
